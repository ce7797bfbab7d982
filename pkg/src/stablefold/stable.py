"""Symmetric alpha-stable increments.

The law of ``y(t)`` has characteristic function ``exp(-t |u|**alpha)``.
Densities are evaluated on the unit-time law ``p_1`` and rescaled through
``p_t(x) = t**(-1/alpha) p_1(x t**(-1/alpha))``.  ``p_1`` uses closed forms
for alpha in {1, 2}; otherwise it switches between adaptive Gauss-Kronrod
inversion of the characteristic function (small ``|z|``) and the optimally
truncated power-law tail series (large ``|z|``).  Bulk requests in the
quadrature region go through a Chebyshev table built from, and checked
against, that same quadrature.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import gamma, gammaln, gammaincc

from .errors import NumericalError, ParameterError

DENSITY_TOL = 1e-10
# exp(-U**alpha) < 1e-14 beyond the quadrature cutoff U
_CUTOFF_EXPONENT = -np.log(1e-14)
_QUAD_EPSABS = 1e-12
_SERIES_TERMS = 300
_SERIES_TOL = 1e-14
_GAUSS_MAX_Z = 12.5  # exp(-z**2/4) < 1e-17
_CHEB_WIDTH = 0.5
_CHEB_DEG = 24
# small requests go straight to quadrature rather than building a table
_CHEB_MIN_POINTS = 64


@dataclass(frozen=True)
class StableLaw:
    """Symmetric stable law of ``y(t)`` with stability index ``alpha``."""

    alpha: float
    t: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.alpha) or not 0.0 < self.alpha <= 2.0:
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha!r}")
        if not np.isfinite(self.t) or self.t <= 0.0:
            raise ParameterError(f"t must be positive, got {self.t!r}")

    @property
    def scale(self):
        """Spatial scale ``t**(1/alpha)``."""
        return self.t ** (1.0 / self.alpha)

    def at(self, t):
        return StableLaw(self.alpha, t)


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def characteristic_function(law, u):
    """``E exp(i u y(t)) = exp(-t |u|**alpha)``; real because the law is symmetric."""
    u_arr = np.asarray(u, dtype=float)
    return _scalar_or_array(np.exp(-law.t * np.abs(u_arr) ** law.alpha), u)


# --- tail series ------------------------------------------------------------
#
# p_1(z) ~ (1/pi) sum_j c_j z**(-alpha j - 1),
# c_j = (-1)**(j+1) Gamma(alpha j + 1) / j! * sin(j pi alpha / 2).
# Convergent for alpha < 1, asymptotic for alpha > 1.  The truncation point
# and the error estimate come from the envelope |c_j| / |sin(...)|.


def _series_indices():
    return np.arange(1, _SERIES_TERMS + 1, dtype=float)


def series_coefficients(alpha):
    """Signed coefficients ``c_j / pi`` of the tail series, j = 1.._SERIES_TERMS."""
    j = _series_indices()
    sign = (-1.0) ** (j + 1) * np.sin(j * np.pi * alpha / 2.0)
    log_mag = gammaln(alpha * j + 1.0) - gammaln(j + 1.0) - np.log(np.pi)
    return sign * np.exp(np.minimum(log_mag, 700.0))


def series_log_envelope(alpha, z):
    """log of the unsigned term sizes, shape ``(len(z), _SERIES_TERMS)``."""
    j = _series_indices()
    z = np.atleast_1d(np.asarray(z, dtype=float))
    base = gammaln(alpha * j + 1.0) - gammaln(j + 1.0) - np.log(np.pi)
    return base[None, :] - np.outer(np.log(z), alpha * j + 1.0)


def _truncation(alpha, zmin):
    """Terms to keep for every ``z >= zmin``: optimal at ``zmin``, fewer if they fall below 1e-18."""
    log_env = series_log_envelope(alpha, [zmin])[0]
    J = int(np.argmin(log_env))
    small = np.nonzero(log_env < np.log(1e-18))[0]
    if len(small):
        J = min(J, int(small[0]))
    return J


def _series_terms(alpha, z, J):
    # unsigned term sizes, columns j = 1..J+1; the last column is the error estimate
    j = np.arange(1, J + 2, dtype=float)
    base = gammaln(alpha * j + 1.0) - gammaln(j + 1.0) - np.log(np.pi)
    log_terms = base[None, :] - np.outer(np.log(z), alpha * j + 1.0)
    sign = (-1.0) ** (j[:-1] + 1) * np.sin(j[:-1] * np.pi * alpha / 2.0)
    return np.exp(np.minimum(log_terms, 700.0)), sign


def _tail_series(alpha, z):
    """Truncated series at ``z >= 1``; returns (value, error estimate).

    The truncation index is optimal at the smallest ``z``; further out the
    terms only shrink, so the same index is at least as accurate there.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    J = _truncation(alpha, float(np.min(z)))
    terms, sign = _series_terms(alpha, z, J)
    return terms[:, :-1] @ sign, terms[:, -1]


@lru_cache(maxsize=256)
def series_threshold(alpha):
    """Smallest scaled distance beyond which the tail series meets _SERIES_TOL.

    Returns ``inf`` for alpha = 2, whose tail lies beyond all orders.
    """
    if alpha == 2.0:
        return np.inf
    z = np.arange(1.0, 40.0 + 1e-9, 0.125)
    # error of the optimally truncated series is its smallest term
    err = np.exp(np.min(series_log_envelope(alpha, z), axis=1))
    bad = np.nonzero(err >= _SERIES_TOL)[0]
    if len(bad) == 0:
        return 1.0
    if bad[-1] == len(z) - 1:
        return np.inf
    return float(z[bad[-1] + 1])


def _quadrature_cutoff(alpha):
    return _CUTOFF_EXPONENT ** (1.0 / alpha)


def _cutoff_tail_bound(alpha, cutoff):
    # int_U^inf exp(-u**alpha) du = Gamma(1/alpha, U**alpha) / alpha
    a = 1.0 / alpha
    return gamma(a) * gammaincc(a, cutoff**alpha) / alpha


def _invert(alpha, z, kernel):
    """(1/pi) int_0^inf kernel(u, z) exp(-u**alpha) du for an array of z."""
    cutoff = _quadrature_cutoff(alpha)

    def integrand(u):
        return kernel(u, z) * np.exp(-(u**alpha))

    value, err = quad_vec(
        integrand, 0.0, cutoff, epsabs=_QUAD_EPSABS, epsrel=0.0, norm="max", limit=20000
    )
    err = (err + _cutoff_tail_bound(alpha, cutoff)) / np.pi
    if err > DENSITY_TOL:
        raise NumericalError(
            f"characteristic-function inversion reached only {err:.2e}", achieved=err
        )
    return value / np.pi


def invert_density(alpha, z):
    """p_1 at ``z`` by direct quadrature of the characteristic function."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return _invert(alpha, z, lambda u, zz: np.cos(np.multiply.outer(u, zz)))


class _ChebTable:
    """Piecewise Chebyshev interpolant of p_1 on [0, zmax], built from quadrature.

    Each panel of width ``_CHEB_WIDTH`` carries a degree ``_CHEB_DEG``
    interpolant.  The table is checked against fresh quadrature at points
    between the nodes; ``ok`` is False if that check misses DENSITY_TOL / 10.
    """

    def __init__(self, alpha, zmax):
        self.panels = int(np.ceil(zmax / _CHEB_WIDTH))
        k = np.arange(_CHEB_DEG + 1)
        x = np.cos(np.pi * (k + 0.5) / (_CHEB_DEG + 1))
        left = _CHEB_WIDTH * np.arange(self.panels)
        z = (left[:, None] + 0.5 * _CHEB_WIDTH * (x[None, :] + 1.0)).ravel()
        vals = invert_density(alpha, z).reshape(self.panels, -1)
        self.coef = np.array([np.polynomial.chebyshev.chebfit(x, v, _CHEB_DEG) for v in vals])
        probe = (left[:, None] + _CHEB_WIDTH * np.array([0.013, 0.29, 0.5, 0.71, 0.987])[None, :]).ravel()
        self.error = float(np.max(np.abs(self(probe) - invert_density(alpha, probe))))
        self.ok = self.error < DENSITY_TOL / 10.0

    def __call__(self, z):
        idx = np.minimum((z / _CHEB_WIDTH).astype(int), self.panels - 1)
        x = 2.0 * (z - _CHEB_WIDTH * idx) / _CHEB_WIDTH - 1.0
        c = self.coef[idx]
        # Clenshaw recurrence, one coefficient row per point
        b1 = np.zeros_like(z)
        b2 = np.zeros_like(z)
        for j in range(_CHEB_DEG, 0, -1):
            b1, b2 = 2.0 * x * b1 - b2 + c[:, j], b1
        return x * b1 - b2 + c[:, 0]


@lru_cache(maxsize=64)
def _cheb_table(alpha):
    return _ChebTable(alpha, max(series_threshold(alpha), 1.0))


def _unit_density(alpha, z):
    """p_1 at non-negative z (1-d array)."""
    if alpha == 2.0:
        return np.exp(-(z**2) / 4.0) / np.sqrt(4.0 * np.pi)
    if alpha == 1.0:
        return 1.0 / (np.pi * (1.0 + z**2))
    out = np.empty_like(z)
    far = z >= max(series_threshold(alpha), 1.0)
    if far.any():
        out[far], _ = _tail_series(alpha, z[far])
    near = ~far
    if near.any():
        table = _cheb_table(alpha) if near.sum() > _CHEB_MIN_POINTS else None
        if table is not None and table.ok:
            out[near] = table(z[near])
        else:
            out[near] = invert_density(alpha, z[near])
    return out


def stable_density(law, x):
    """Density ``p_t(x)`` of ``y(t)``; vectorised over ``x``."""
    x_arr = np.asarray(x, dtype=float)
    scale = law.scale
    z = np.abs(x_arr.ravel()) / scale
    vals = _unit_density(law.alpha, z) / scale
    return _scalar_or_array(vals.reshape(x_arr.shape), x)


def stable_cdf(law, x):
    """Distribution function ``P(y(t) <= x)``."""
    x_arr = np.asarray(x, dtype=float)
    alpha = law.alpha
    z = x_arr.ravel() / law.scale
    az = np.abs(z)
    if alpha == 2.0:
        from scipy.special import ndtr

        upper = ndtr(-az / np.sqrt(2.0))
    elif alpha == 1.0:
        upper = 0.5 - np.arctan(az) / np.pi
    else:
        upper = np.empty_like(az)
        far = az >= max(series_threshold(alpha), 1.0)
        if far.any():
            upper[far] = _upper_tail_series(alpha, az[far])
        near = ~far
        if near.any():
            zn = az[near]
            # sin(u z) / u, written through sinc to stay finite at u = 0
            half = _invert(alpha, zn, lambda u, zz: zz * np.sinc(np.multiply.outer(u, zz) / np.pi))
            upper[near] = 0.5 - half
    cdf = np.where(z >= 0, 1.0 - upper, upper)
    return _scalar_or_array(cdf.reshape(x_arr.shape), x)


def _upper_tail_series(alpha, z):
    # P(y(1) > z) ~ sum_j c_j / (pi alpha j) z**(-alpha j), same envelope as the density
    J = _truncation(alpha, float(np.min(z)))
    terms, sign = _series_terms(alpha, z, J)
    j = np.arange(1, J + 1, dtype=float)
    return (terms[:, :-1] * z[:, None] / (alpha * j)) @ sign


def gaussian_reach(law):
    """Distance beyond which the alpha = 2 density is below 1e-17 / scale."""
    return _GAUSS_MAX_Z * law.scale


def sample_stable(law, count, seed):
    """Exact draws of ``y(t)`` by the Chambers-Mallows-Stuck construction.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    count = int(count)
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    return _cms(law.alpha, rng, count) * law.scale


def _cms(alpha, rng, size):
    v = rng.uniform(-np.pi / 2.0, np.pi / 2.0, size=size)
    w = rng.standard_exponential(size=size)
    if alpha == 1.0:
        return np.tan(v)
    if alpha == 2.0:
        return 2.0 * np.sin(v) * np.sqrt(w)
    return (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    )


def make_rng(seed, *key):
    """Counter-based generator for the stream ``(seed, *key)``."""
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
