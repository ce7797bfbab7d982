import json

import numpy as np
import pytest

from stablefold.errors import NumericalError, ParameterError
from stablefold.folding import FoldingGeometry, fold_f, tent_g
from stablefold.images import (
    GridDensity,
    SmoothInitial,
    image_sum,
    periodic_decomposition,
    periodic_density,
    reflected_density,
    scaled_reflected_density,
    smooth_initial_density,
    tabulate,
    uniform_targets,
    wrapped_density,
)
from stablefold.stable import StableLaw, make_rng, sample_stable

ALPHAS = [1.0, 1.5, 1.9, 2.0]


def fourier_reflected(alpha, t, u, terms=4000):
    # Neumann cosine series on [-1, 1] for a start at the centre
    j = np.arange(1, terms + 1)
    w = np.exp(-t * (np.pi * j) ** alpha)
    return 0.5 + np.cos(np.pi * np.outer(u, j)) @ w


def fourier_wrapped(alpha, t, u, terms=8000):
    j = np.arange(1, terms + 1)
    w = np.exp(-t * (np.pi * j / 2.0) ** alpha)
    return 0.25 + 0.5 * np.cos(np.pi * np.outer(u, j) / 2.0) @ w


def bin_probabilities(density, edges, order=40):
    x, wts = np.polynomial.legendre.leggauss(order)
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        pts = 0.5 * (b - a) * x + 0.5 * (a + b)
        out.append(0.5 * (b - a) * np.dot(wts, density(pts)))
    return np.array(out)


def assert_histogram_matches(samples, density, lo=-1.0, hi=1.0, bins=20, z=4.0):
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    freq = counts / len(samples)
    p = bin_probabilities(density, edges)
    se = np.sqrt(p * (1.0 - p) / len(samples))
    worst = np.max(np.abs(freq - p) / se)
    assert worst < z, f"worst bin off by {worst:.2f} standard errors"


# --- image sums against independent spectral series ------------------------------


@pytest.mark.parametrize("t", [0.05, 0.1, 0.5])
def test_gaussian_matches_neumann_cosine_series(t):
    u = np.linspace(-1.0, 1.0, 201)
    np.testing.assert_allclose(reflected_density(StableLaw(2.0, t), u), fourier_reflected(2.0, t, u), atol=1e-8, rtol=0)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("t", [0.05, 0.3, 2.0])
def test_reflected_matches_fourier_series(alpha, t):
    u = np.linspace(-1.0, 1.0, 41)
    np.testing.assert_allclose(reflected_density(StableLaw(alpha, t), u), fourier_reflected(alpha, t, u), atol=1e-9, rtol=0)


@pytest.mark.parametrize("alpha", [0.7, 1.2, 1.5, 2.0])
def test_wrapped_matches_fourier_series(alpha):
    u = np.linspace(-2.0, 2.0, 41)
    np.testing.assert_allclose(wrapped_density(StableLaw(alpha, 0.4), u), fourier_wrapped(alpha, 0.4, u), atol=1e-9, rtol=0)


def test_wrapped_gaussian_value_at_two():
    # images at +-2, +-6, ... of the variance-2 Gaussian
    k = np.arange(-20, 21)
    ref = np.sum(np.exp(-((2.0 - 4.0 * k) ** 2) / 4.0)) / np.sqrt(4.0 * np.pi)
    val = wrapped_density(StableLaw(2.0, 1.0), 2.0)
    assert val == pytest.approx(ref, abs=1e-14)
    assert val == pytest.approx(0.2077, abs=1e-4)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_large_time_limits(alpha):
    law = StableLaw(alpha, 50.0)
    np.testing.assert_allclose(wrapped_density(law, np.linspace(-2, 2, 21)), 0.25, atol=1e-12)
    np.testing.assert_allclose(reflected_density(law, np.linspace(-1, 1, 21)), 0.5, atol=1e-12)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_reflected_is_two_wrapped_images(alpha):
    law = StableLaw(alpha, 0.2)
    u = np.linspace(-1.0, 1.0, 51)
    np.testing.assert_allclose(reflected_density(law, u), wrapped_density(law, u) + wrapped_density(law, u + 2.0), atol=1e-10, rtol=0)


@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5, 2.0])
def test_wrapped_periodic_and_even(alpha):
    law = StableLaw(alpha, 0.3)
    u = np.linspace(-2.0, 2.0, 33)
    w = wrapped_density(law, u)
    np.testing.assert_allclose(w, wrapped_density(law, u + 4.0), atol=1e-13)
    np.testing.assert_allclose(w, wrapped_density(law, -u), atol=1e-13)


def test_cauchy_image_sums_normalize():
    for t in (0.01, 0.1, 1.0):
        law = StableLaw(1.0, t)
        g = tabulate(lambda u: reflected_density(law, u), (-1.0, 1.0), 20001)
        assert g.integral() == pytest.approx(1.0, abs=1e-6)
        # closed form of the Cauchy wrapped kernel: sinh/(cosh - cos)
        u = np.linspace(-1, 1, 11)
        c = np.pi * t
        ref = 0.5 * np.sinh(c) / (np.cosh(c) - np.cos(np.pi * u))
        np.testing.assert_allclose(reflected_density(law, u), ref, atol=1e-12)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_reflected_zero_outside_and_even(alpha):
    law = StableLaw(alpha, 0.1)
    assert reflected_density(law, 1.2) == 0.0
    assert reflected_density(law, -1.0001) == 0.0
    u = np.linspace(0.0, 1.0, 26)
    np.testing.assert_array_equal(reflected_density(law, u), reflected_density(law, -u))


def test_image_cap_raises():
    with pytest.raises(NumericalError):
        image_sum(StableLaw(2.0, 1e12), 0.0, 2.0)


# --- Monte-Carlo against folded exact samples ------------------------------------


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("t", [0.05, 1.0])
def test_reflected_density_matches_folded_samples(alpha, t):
    law = StableLaw(alpha, t)
    y = tent_g(fold_f(sample_stable(law, 200_000, 99)))
    assert_histogram_matches(y, lambda u: reflected_density(law, u))


# --- scaled interval ---------------------------------------------------------------


def test_scaled_r1_identical():
    law = StableLaw(1.5, 0.3)
    u = np.linspace(-1.0, 1.0, 21)
    np.testing.assert_array_equal(scaled_reflected_density(law, FoldingGeometry(r=1.0), u), reflected_density(law, u))


def test_scaled_substitution():
    lhs = scaled_reflected_density(StableLaw(2.0, 4.0), FoldingGeometry(r=2.0), 0.0)
    assert lhs == pytest.approx(reflected_density(StableLaw(2.0, 1.0), 0.0) / 2.0, rel=1e-14)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("r", [0.5, 2.0, 3.0])
def test_scaled_normalized_and_matches_samples(alpha, r):
    law = StableLaw(alpha, 0.4)
    geom = FoldingGeometry(r=r)
    g = tabulate(lambda u: scaled_reflected_density(law, geom, u), (-r, r), 4001)
    assert g.integral() == pytest.approx(1.0, abs=1e-6)
    y = r * tent_g(fold_f(sample_stable(law, 100_000, 5) / r))
    assert_histogram_matches(y, lambda u: scaled_reflected_density(law, geom, u), -r, r)


@pytest.mark.parametrize("alpha", [1.5, 2.0])
@pytest.mark.parametrize("r", [0.5, 2.0])
def test_rescaled_density_is_time_changed(alpha, r):
    t = 0.7
    geom = FoldingGeometry(r=r)
    u = np.linspace(-1.0, 1.0, 41)
    psi = r * scaled_reflected_density(StableLaw(alpha, t), geom, r * u)
    ref = reflected_density(StableLaw(alpha, t * r**-alpha), u)
    assert np.max(np.abs(psi - ref)) < 1e-10


# --- periodic starts ---------------------------------------------------------------


def test_periodic_n1_is_reflected():
    law = StableLaw(1.5, 0.2)
    u = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(periodic_density(law, 1, u), reflected_density(law, u), atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_periodic_has_period_2_over_n(n, alpha):
    law = StableLaw(alpha, 0.1)
    u = np.linspace(-1.0, 1.0 - 2.0 / n, 57)
    np.testing.assert_allclose(periodic_density(law, n, u), periodic_density(law, n, u + 2.0 / n), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_cell_decomposition(n, alpha):
    law = StableLaw(alpha, 0.05)
    u = np.linspace(-1.0, 1.0, 30 * n + 1)
    np.testing.assert_allclose(periodic_density(law, n, u), periodic_decomposition(law, n, u), atol=1e-8, rtol=0)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_cell_scaling(n, alpha):
    # on the cell around each start the density is the 1/n-interval density over n
    law = StableLaw(alpha, 0.05)
    w = np.linspace(-1.0 / n, 1.0 / n, 21)[1:-1]
    cell = scaled_reflected_density(law, FoldingGeometry(r=1.0 / n), w) / n
    for s in (2.0 * np.arange(n) + 1.0) / n:
        np.testing.assert_allclose(periodic_density(law, n, w - 1.0 + s), cell, atol=1e-8)


@pytest.mark.parametrize("n", [2, 3])
def test_periodic_matches_samples(n):
    law = StableLaw(1.5, 0.05)
    rng = make_rng(17)
    starts = -1.0 + (2.0 * rng.integers(0, n, 200_000) + 1.0) / n
    y = tent_g(fold_f(starts + sample_stable(law, 200_000, rng)))
    assert_histogram_matches(y, lambda u: periodic_density(law, n, u))


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
def test_periodic_time_scaling(alpha):
    n, t = 3, 0.02
    u = np.linspace(-1.0, 1.0, 41)
    lhs = periodic_density(StableLaw(alpha, t), n, u)
    rhs = periodic_density(StableLaw(alpha, t * n**alpha), 1, n * (u + 1.0) - 1.0 - 2.0 * np.floor(n * (u + 1.0) / 2.0))
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


# --- smooth initial laws -------------------------------------------------------------


def raised_cosine_samples(center, width, size, rng):
    out = np.empty(0)
    while len(out) < size:
        v = rng.uniform(center - width, center + width, 2 * size)
        keep = rng.uniform(0.0, 1.0, 2 * size) < (1.0 + np.cos(np.pi * (v - center) / width)) / 2.0
        out = np.concatenate([out, v[keep]])
    return out[:size]


def test_smooth_initial_validation():
    with pytest.raises(ParameterError):
        SmoothInitial(lambda v: np.full_like(np.asarray(v, dtype=float), 0.4))
    with pytest.raises(ParameterError):
        # unit mass but non-zero slope at the edges
        SmoothInitial(lambda v: 0.5 + 0.25 * np.asarray(v, dtype=float))
    # the flat density itself has zero slope and is admissible
    SmoothInitial(lambda v: np.full_like(np.asarray(v, dtype=float), 0.5))
    with pytest.raises(ParameterError):
        SmoothInitial.raised_cosine(0.5, 0.8)
    mu = SmoothInitial.raised_cosine(0.2, 0.5)
    assert mu(0.2) == pytest.approx(2.0)


def test_uniform_initial():
    flat = SmoothInitial(lambda v: np.full_like(np.asarray(v, dtype=float), 0.5), check=False)
    u = np.linspace(-1, 1, 9)
    for t in (0.01, 0.3):
        np.testing.assert_allclose(smooth_initial_density(StableLaw(1.5, t), flat, u), 0.5, atol=1e-8)
    # -1 + z is uniform on [-2, 0], which g folds onto [-1, 0]
    early = smooth_initial_density(StableLaw(1.5, 1e-3), flat, np.array([-0.5, 0.5]), shifted=True)
    np.testing.assert_allclose(early, [1.0, 0.0], atol=0.01)
    gaps = [np.max(np.abs(smooth_initial_density(StableLaw(1.5, t), flat, u, shifted=True) - 0.5)) for t in (0.1, 0.5, 2.0, 5.0)]
    assert np.all(np.diff(gaps) < 0) and gaps[-1] < 1e-3


@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_narrow_bump_at_centre_approaches_centre_start(alpha):
    law = StableLaw(alpha, 0.2)
    u = np.linspace(-1, 1, 11)
    target = reflected_density(law, u)
    errs = [np.max(np.abs(smooth_initial_density(law, SmoothInitial.raised_cosine(0.0, w), u) - target)) for w in (0.4, 0.2, 0.1)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 5e-3


def test_shifted_edge_bump_approaches_centre_start():
    # half bump against v = 1: the -1 + z start concentrates at the centre
    law = StableLaw(1.5, 0.2)
    u = np.linspace(-1, 1, 11)
    target = reflected_density(law, u)
    errs = []
    for w in (0.4, 0.2, 0.1, 0.05):
        mu = SmoothInitial(lambda v, w=w: np.where(np.asarray(v) >= 1 - w, (1 + np.cos(np.pi * (np.asarray(v) - 1) / w)) / w, 0.0))
        errs.append(np.max(np.abs(smooth_initial_density(law, mu, u, shifted=True) - target)))
    # one-sided bumps converge linearly in the width
    assert np.all(np.diff(errs) < 0) and errs[-1] < 0.02


@pytest.mark.parametrize("shifted", [False, True])
def test_smooth_initial_normalized(shifted):
    law = StableLaw(1.5, 0.1)
    init = SmoothInitial.raised_cosine(0.3, 0.5)
    g = tabulate(lambda u: smooth_initial_density(law, init, u, shifted), (-1.0, 1.0), 401)
    assert g.integral() == pytest.approx(1.0, abs=1e-6)


def test_smooth_initial_against_samples():
    # the displayed integral is the law of g(f(y + z)); the shifted one of g(f(y - 1 + z))
    law = StableLaw(1.5, 0.05)
    init = SmoothInitial.raised_cosine(0.3, 0.5)
    rng = make_rng(23)
    z = raised_cosine_samples(0.3, 0.5, 200_000, rng)
    y = sample_stable(law, len(z), rng)
    assert_histogram_matches(tent_g(fold_f(y + z)), lambda u: smooth_initial_density(law, init, u))
    assert_histogram_matches(tent_g(fold_f(y - 1.0 + z)), lambda u: smooth_initial_density(law, init, u, shifted=True))
    u = np.linspace(-1, 1, 21)
    gap = np.max(np.abs(smooth_initial_density(law, init, u) - smooth_initial_density(law, init, u, shifted=True)))
    assert gap > 0.1


# --- containers ----------------------------------------------------------------------


def test_uniform_targets():
    P, pi = uniform_targets()
    assert P.values[len(P.values) // 2] == 0.25
    assert pi.values[len(pi.values) // 2] == 0.5
    assert P.integral() == pytest.approx(1.0, abs=1e-14)
    assert pi.integral() == pytest.approx(1.0, abs=1e-14)
    assert P.support == (-2.0, 2.0) and pi.support == (-1.0, 1.0)


def test_grid_density_serialization():
    g = tabulate(lambda u: reflected_density(StableLaw(2.0, 0.5), u), (-1.0, 1.0), 201)
    lines = g.to_csv().splitlines()
    assert lines[0] == "u,value" and len(lines) == 202
    assert float(lines[101].split(",")[0]) == 0.0
    back = GridDensity.from_dict(json.loads(json.dumps(g.to_dict())))
    np.testing.assert_array_equal(back.values, g.values)
    assert back.same_grid(g)
    assert g.integral() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("nodes", [2, 200])
def test_tabulate_needs_odd_nodes(nodes):
    with pytest.raises(ParameterError):
        tabulate(np.cos, (-1.0, 1.0), nodes)


def test_grid_density_validation():
    with pytest.raises(ParameterError):
        GridDensity((-1.0, 1.0), 0.5, [0.1, 0.2, 0.3])
    with pytest.raises(ParameterError):
        GridDensity((-1.0, 1.0), 1.0, [0.5, -0.1, 0.5])
