"""Convergence of the reflected densities to the uniform law.

Distances are sup-norms over node grids.  The geometric bound combines the
Doeblin constant ``Q_h = inf P̄_h`` with the initial gap ``||P̄_h - 1/4||``:

    ||pi_t - 1/2|| <= 2 (1 - 4 Q_h)**(floor(t/h) - 1) ||P̄_h - 1/4||.

Interval half-width ``r`` and start lattice order ``n`` enter only through
the effective time ``t r**(-alpha) n**alpha``, after the density has been
rescaled to [-1, 1].
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvariantViolation, ParameterError, SearchFailure
from .folding import FoldingGeometry
from .images import periodic_density, reflected_density, scaled_reflected_density, wrapped_density
from .stable import StableLaw

GRID_NODES = 4097
BOUND_SLACK = 1e-9
DEFAULT_EPSILON = 0.01
T_CAP = 1e4
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def sup_norm_distance(d1, d2):
    """Largest nodewise gap between two densities on the same grid."""
    if not d1.same_grid(d2):
        raise ParameterError("densities live on different grids")
    return float(np.max(np.abs(d1.values - d2.values)))


def _golden_min(func, lo, hi, tol=1e-12):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = func(d)
    return (a + b) / 2.0


@lru_cache(maxsize=512)
def _q_infimum(alpha, t, nodes):
    law = StableLaw(alpha, t)
    w = np.linspace(0.0, 2.0, nodes)
    vals = wrapped_density(law, w)
    i = int(np.argmin(vals))
    lo, hi = w[max(i - 1, 0)], w[min(i + 1, nodes - 1)]
    best = min(float(vals[i]), wrapped_density(law, _golden_min(lambda x: wrapped_density(law, x), lo, hi)))
    return best


def q_infimum(law, nodes=GRID_NODES):
    """``inf`` of the transition density ``P̄_t(v - u)`` over [-2, 2)**2.

    By 4-periodicity and symmetry it is the minimum of ``P̄_t`` on [0, 2]:
    a node scan followed by golden-section polishing.
    """
    return _q_infimum(law.alpha, law.t, int(nodes))


@lru_cache(maxsize=512)
def _wrapped_gap(alpha, t, nodes):
    law = StableLaw(alpha, t)
    u = np.linspace(-2.0, 2.0, nodes)
    gap = np.abs(wrapped_density(law, u) - 0.25)
    i = int(np.argmax(gap))
    # a node misses the true sup by at most the change across the adjacent cells
    neighbours = gap[max(i - 1, 0) : i + 2]
    slack = float(np.max(np.abs(neighbours - gap[i])))
    return float(gap[i]) + slack


def wrapped_gap(law, nodes=GRID_NODES):
    """``||P̄_t - P||`` on the scan grid, padded by the grid-induced error."""
    return _wrapped_gap(law.alpha, law.t, int(nodes))


def _floor_ratio(t, h):
    return int(math.floor(t / h + 1e-12))


def lemma1_bound(law_h, t, nodes=GRID_NODES):
    """Geometric bound on ``||pi_t - pi||`` from one-step quantities at ``h = law_h.t``."""
    h = law_h.t
    if t < h * (1.0 - 1e-12):
        raise ParameterError(f"bound requires t >= h, got t={t} < h={h}")
    k = _floor_ratio(t, h)
    contraction = 1.0 - 4.0 * q_infimum(law_h, nodes)
    return 2.0 * contraction ** (k - 1) * wrapped_gap(law_h, nodes)


def effective_time(alpha, t, geom):
    """Time on [-1, 1] equivalent to time ``t`` in geometry ``geom``."""
    return t * geom.time_factor(alpha) * geom.n**alpha


def normalized_density(alpha, t, geom, u):
    """Density of the folded process rescaled to [-1, 1].

    ``psi(u) = r pi_{t,r}(r u)`` for a scaled interval, the periodic-start
    density for ``n > 1``.  Mixed geometries (r != 1 and n > 1) are rejected.
    """
    law = StableLaw(alpha, t)
    if geom.n > 1 and geom.r != 1.0:
        raise ParameterError("use either a scaled interval or periodic starts, not both")
    if geom.n > 1:
        return periodic_density(law, geom.n, u)
    if geom.r != 1.0:
        return geom.r * scaled_reflected_density(law, geom, geom.r * np.asarray(u))
    return reflected_density(law, u)


def distance_nodes(geom, base=1024):
    """Odd node count placing every periodic-start peak on a node."""
    return base * geom.n + 1


def distance_to_uniform(alpha, t, geom=FoldingGeometry(), nodes=None):
    """``sup_u |psi_t(u) - 1/2|`` over the node grid on [-1, 1]."""
    nodes = distance_nodes(geom) if nodes is None else nodes
    u = np.linspace(-1.0, 1.0, nodes)
    return float(np.max(np.abs(normalized_density(alpha, t, geom, u) - 0.5)))


@dataclass
class MixingReport:
    alpha: float
    h: float
    r: float
    n: int
    epsilon: float
    times: np.ndarray
    distances: np.ndarray
    bounds: np.ndarray
    T_est: float = math.nan
    notes: dict = field(default_factory=dict)

    def to_csv(self):
        lines = ["t,distance,bound"]
        for t, d, b in zip(self.times, self.distances, self.bounds):
            lines.append(f"{t:.17g},{d:.17g},{b:.17g}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        def clean(xs):
            return [None if not np.isfinite(x) else float(x) for x in xs]

        return {
            "alpha": self.alpha,
            "h": self.h,
            "r": self.r,
            "n": self.n,
            "epsilon": self.epsilon,
            "T_est": None if not np.isfinite(self.T_est) else self.T_est,
            "rows": {
                "t": clean(self.times),
                "distance": clean(self.distances),
                "bound": clean(self.bounds),
            },
            "notes": self.notes,
        }


def verify_bound(alpha, h, t_grid, geom=FoldingGeometry(), epsilon=DEFAULT_EPSILON, nodes=None):
    """Measure distances on ``t_grid`` and check them against the geometric bound.

    Rows whose effective time is below ``h`` carry a NaN bound.  Any row
    exceeding its bound by more than ``BOUND_SLACK`` raises
    :class:`InvariantViolation`.
    """
    times = np.asarray(sorted(float(t) for t in t_grid))
    if len(times) == 0 or times[0] <= 0:
        raise ParameterError("time grid must be non-empty and positive")
    if h <= 0:
        raise ParameterError(f"h must be positive, got {h}")
    law_h = StableLaw(alpha, h)
    distances = np.array([distance_to_uniform(alpha, t, geom, nodes) for t in times])
    bounds = np.full_like(distances, np.nan)
    for i, t in enumerate(times):
        tau = effective_time(alpha, t, geom)
        if tau >= h * (1.0 - 1e-12):
            bounds[i] = lemma1_bound(law_h, tau)
    defined = np.isfinite(bounds)
    excess = distances[defined] - bounds[defined]
    if np.any(excess > BOUND_SLACK):
        worst = int(np.argmax(excess))
        raise InvariantViolation(
            f"distance exceeds bound by {excess[worst]:.3e} at t={times[defined][worst]}",
            achieved=float(excess[worst]),
        )
    hit = np.nonzero(distances <= epsilon)[0]
    t_est = float(times[hit[0]]) if len(hit) else math.nan
    notes = {"lattice_exponent": "L = floor(t * n**alpha)"} if geom.n > 1 else {}
    return MixingReport(alpha, h, geom.r, geom.n, epsilon, times, distances, bounds, t_est, notes)


def characteristic_time(alpha, geom=FoldingGeometry(), epsilon=DEFAULT_EPSILON, rel_tol=1e-4, t_cap=T_CAP):
    """Smallest ``t`` with ``distance_to_uniform <= epsilon``, by bisection.

    Distances use the density rescaled to [-1, 1], so the epsilon threshold
    is the same dimensionless level for every ``r`` and ``n``.
    """
    if not 0.0 < epsilon < 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    StableLaw(alpha, 1.0)
    nodes = distance_nodes(geom)

    def dist(t):
        return distance_to_uniform(alpha, t, geom, nodes)

    hi = min(1.0, t_cap)
    while dist(hi) > epsilon:
        if hi >= t_cap:
            raise SearchFailure(f"epsilon={epsilon} not reached before t={t_cap}")
        hi = min(2.0 * hi, t_cap)
    lo = hi / 2.0
    while dist(lo) <= epsilon:
        hi, lo = lo, lo / 2.0
        if lo < 1e-12:
            raise SearchFailure("distance already below epsilon at vanishing time")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if dist(mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
