"""Diffusion on the hypercube [-1, 1]**k.

Anomalous diffusion is a product of independent one-dimensional reflected
processes.  For normal diffusion (alpha = 2) the Neumann heat equation is
solved exactly by cosine modes ``prod_r cos(pi n j_r y_r)`` decaying at rate
``pi**2 n**2 sum_r j_r**2``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError

REGIME_RATIO = 1e-3
DEFAULT_MODES = 8


class ProductDensity:
    """Tensor product of one-dimensional grid densities, evaluated by linear interpolation."""

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ParameterError("need at least one factor")
        for f in factors:
            lo, hi = f.support
            if abs(lo + 1.0) > 1e-12 or abs(hi - 1.0) > 1e-12:
                raise ParameterError("product factors must be densities on [-1, 1]")
        self.factors = factors

    @property
    def k(self):
        return len(self.factors)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.k:
            raise ParameterError(f"points must have trailing dimension {self.k}")
        out = np.ones(pts.shape[:-1])
        for r, f in enumerate(self.factors):
            out = out * np.interp(pts[..., r], f.nodes, f.values, left=0.0, right=0.0)
        return out

    def on_grid(self):
        """Values on the tensor grid of the factor nodes."""
        out = self.factors[0].values
        for f in self.factors[1:]:
            out = np.multiply.outer(out, f.values)
        return out

    def integral(self):
        total = 1.0
        for f in self.factors:
            total *= f.integral()
        return total


def product_density(per_dim):
    return ProductDensity(per_dim)


def product_bound(delta, k=2):
    """Sup-norm bound on a k-fold product density whose factors are within ``delta`` of 1/2.

    k = 2 gives ``delta (1 + delta)``; general k telescopes to
    ``2**-k ((1 + 2 delta)**k - 1)``, which coincides at k = 2.
    """
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    if k == 2:
        return delta * (1.0 + delta)
    return 0.5**k * ((1.0 + 2.0 * delta) ** k - 1.0)


@dataclass
class SpectralInit:
    """Initial density ``2**-k + sum_j a(j) prod_r cos(pi n j_r y_r)`` on [-1, 1]**k.

    ``coeffs`` maps index tuples with entries in ``1..m`` to amplitudes.
    """

    k: int
    n: int
    coeffs: dict

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        self.k, self.n = int(self.k), int(self.n)
        clean = {}
        for idx, a in self.coeffs.items():
            idx = (idx,) if np.ndim(idx) == 0 else tuple(int(j) for j in idx)
            if len(idx) != self.k or min(idx) < 1:
                raise ParameterError(f"mode index {idx} is not a {self.k}-tuple of positive ints")
            clean[idx] = float(a)
        self.coeffs = clean
        nodes = 8 * self.n * self.m_max + 1
        axis = np.linspace(-1.0, 1.0, min(nodes, 257 if self.k <= 2 else 33))
        grid = np.stack(np.meshgrid(*([axis] * self.k), indexing="ij"), axis=-1)
        if np.min(self._evaluate(grid, 0.0)) <= 0.0:
            raise ParameterError("initial density is not strictly positive on the grid")

    @property
    def m_max(self):
        return max((max(idx) for idx in self.coeffs), default=1)

    def rate(self, idx):
        return np.pi**2 * self.n**2 * sum(j * j for j in idx)

    def _evaluate(self, pts, t):
        out = np.full(pts.shape[:-1], 0.5**self.k)
        for idx, a in self.coeffs.items():
            mode = np.full(pts.shape[:-1], a * np.exp(-self.rate(idx) * t))
            for r, j in enumerate(idx):
                mode = mode * np.cos(np.pi * self.n * j * pts[..., r])
            out = out + mode
        return out

    @classmethod
    def default(cls, k, n, modes=DEFAULT_MODES):
        """Diagonal modes ``a(j, ..., j) = 0.4 * 2**-k / j**2``, j = 1..modes."""
        return cls(k, n, {(j,) * k: 0.4 * 0.5**k / j**2 for j in range(1, modes + 1)})


def spectral_solution(init, t, point):
    """Exact Neumann heat solution at time ``t``; ``point`` has trailing dimension k."""
    pts = np.asarray(point, dtype=float)
    if pts.shape[-1:] != (init.k,) and not (init.k == 1 and pts.ndim == 0):
        raise ParameterError(f"points must have trailing dimension {init.k}")
    if pts.ndim == 0:
        pts = pts[None]
    if np.any(np.abs(pts) > 1.0 + 1e-12):
        raise ParameterError("points must lie in [-1, 1]**k")
    if t < 0:
        raise ParameterError(f"t must be non-negative, got {t}")
    out = init._evaluate(pts, t)
    return float(out) if out.ndim == 0 else out


def hypercube_grid(k, nodes):
    axis = np.linspace(-1.0, 1.0, nodes)
    return np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1)


def sup_distance(init, t, nodes=None):
    """``sup |Pi_t - 2**-k|`` on a node grid that contains every mode extremum."""
    nodes = nodes or 2 * init.n * init.m_max + 1
    tensor = hypercube_grid(init.k, nodes)
    return float(np.max(np.abs(spectral_solution(init, t, tensor) - 0.5**init.k)))


def asymptotic_start(init, ratio=REGIME_RATIO):
    """Earliest time at which every other mode is below ``ratio`` times the leading one."""
    lead = (1,) * init.k
    a1 = abs(init.coeffs.get(lead, 0.0))
    if a1 == 0.0:
        raise ParameterError("leading coefficient a(1, ..., 1) is zero")
    t0 = 0.0
    for idx, a in init.coeffs.items():
        if idx == lead or a == 0.0:
            continue
        gap = init.rate(idx) - init.rate(lead)
        t0 = max(t0, np.log(abs(a) / (ratio * a1)) / gap)
    return t0


def decay_rate_fit(init, t_grid=None, points=8):
    """Least-squares slope of ``log ||Pi_t - 2**-k||`` against ``t``.

    Without ``t_grid`` the fit spans one e-folding of the leading mode from
    :func:`asymptotic_start`.
    """
    t_min = asymptotic_start(init)
    if t_grid is None:
        lead_rate = init.rate((1,) * init.k)
        t_grid = t_min + np.linspace(0.0, 1.0 / lead_rate, points)
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) < 2:
        raise ParameterError("need at least two times to fit a slope")
    if t_grid.min() < t_min * (1.0 - 1e-12):
        raise RegimeError(
            f"higher modes exceed {REGIME_RATIO:g} of the leading mode before t={t_min:.4g}"
        )
    logs = np.log([sup_distance(init, t) for t in t_grid])
    slope = np.polyfit(t_grid, logs, 1)[0]
    return float(slope)
