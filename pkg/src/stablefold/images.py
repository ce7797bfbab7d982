"""Densities of the folded processes by the method of images.

Every density here is a lattice sum ``sum_k p_t(u - L k)`` of free stable
densities.  Images within a few series thresholds of ``u`` are summed
directly; the remaining infinite tail of a heavy-tailed law is summed in
closed form by pushing the power-law series through Hurwitz zeta functions,

    sum_{k > K} (L k -+ u)**(-s) = L**(-s) zeta(s, K + 1 -+ u / L).

Gaussian (alpha = 2) tails are simply cut where they drop below 1e-17.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta

from .errors import NumericalError, ParameterError
from .folding import FoldingGeometry
from .stable import (
    gaussian_reach,
    series_coefficients,
    series_log_envelope,
    series_threshold,
    stable_density,
)

MAX_IMAGES = 100_000
_TAIL_TERM_FLOOR = 1e-17
_SIMPSON_TOL = 1e-8


def _out(values, like):
    return float(values) if np.ndim(like) == 0 else values


@dataclass
class GridDensity:
    """A density tabulated at ``len(values)`` equispaced nodes over ``support``."""

    support: tuple
    step: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        lo, hi = (float(s) for s in self.support)
        self.support = (lo, hi)
        self.values = np.asarray(self.values, dtype=float)
        self.step = float(self.step)
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ParameterError("GridDensity needs a 1-d array of at least two values")
        if abs(lo + self.step * (len(self.values) - 1) - hi) > 1e-9 * max(1.0, hi - lo):
            raise ParameterError("support, step and number of values are inconsistent")
        if np.any(self.values < -1e-12):
            raise ParameterError("density values must be non-negative")

    @property
    def nodes(self):
        lo, _ = self.support
        return lo + self.step * np.arange(len(self.values))

    def integral(self):
        return float(np.trapezoid(self.values, dx=self.step))

    def same_grid(self, other):
        return (
            len(self.values) == len(other.values)
            and np.allclose(self.support, other.support, rtol=0, atol=1e-12)
            and abs(self.step - other.step) <= 1e-12
        )

    def to_csv(self):
        lines = ["u,value"]
        lines += [f"{u:.17g},{v:.17g}" for u, v in zip(self.nodes, self.values)]
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "support": list(self.support),
            "step": self.step,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["support"]), data["step"], np.asarray(data["values"]))


def tabulate(func, support, nodes=201):
    """Sample ``func`` on an odd number of nodes so the midpoint is a node."""
    nodes = int(nodes)
    if nodes < 3 or nodes % 2 == 0:
        raise ParameterError(f"grid needs an odd node count >= 3, got {nodes}")
    lo, hi = support
    u = np.linspace(lo, hi, nodes)
    values = np.asarray(func(u), dtype=float)
    return GridDensity((lo, hi), (hi - lo) / (nodes - 1), values)


def uniform_targets(nodes=401):
    """Stationary laws: 1/4 on [-2, 2) for f(y(t)) and 1/2 on [-1, 1] for Y(t)."""
    wrapped = tabulate(lambda u: np.full_like(u, 0.25), (-2.0, 2.0), nodes)
    reflected = tabulate(lambda u: np.full_like(u, 0.5), (-1.0, 1.0), nodes)
    return wrapped, reflected


# --- lattice sums -------------------------------------------------------------


def image_count(law, spacing, umax):
    """Number ``K`` of images per side summed directly (the rest is the tail)."""
    if law.alpha == 2.0:
        reach = gaussian_reach(law)
    else:
        reach = max(2.0 * series_threshold(law.alpha), 4.0) * law.scale
    K = max(0, int(np.ceil((reach + umax) / spacing)) - 1)
    if K > MAX_IMAGES:
        raise NumericalError(
            f"image series needs {K} images per side (cap {MAX_IMAGES})", achieved=np.nan
        )
    return K


def _tail(law, u, spacing, K):
    """sum over |k| > K of p_t(u - spacing k), via the power-law series."""
    alpha, scale = law.alpha, law.scale
    z_near = (spacing * (K + 1) - np.max(np.abs(u))) / scale
    log_env = series_log_envelope(alpha, [z_near])[0]
    jstar = int(np.argmin(log_env))
    small = np.nonzero(log_env < np.log(_TAIL_TERM_FLOOR * min(1.0, scale)))[0]
    J = min(jstar, int(small[0]) + 1 if len(small) else jstar)
    coeffs = series_coefficients(alpha)
    total = np.zeros_like(u)
    q = u / spacing
    for j in range(1, J + 1):
        s = alpha * j + 1.0
        hz = zeta(s, K + 1 - q) + zeta(s, K + 1 + q)
        pos = hz > 0
        log_mag = j * np.log(law.t) - s * np.log(spacing)
        term = np.zeros_like(u)
        term[pos] = coeffs[j - 1] * np.exp(log_mag + np.log(hz[pos]))
        total += term
    return total


def image_sum(law, u, spacing):
    """``sum_k p_t(u - spacing k)`` over all integers k; periodic in ``u``."""
    u_arr = np.asarray(u, dtype=float)
    flat = u_arr.ravel()
    # the lattice sum is even, so evaluating at |u| makes symmetry exact
    flat = np.abs(flat - spacing * np.round(flat / spacing))
    if flat.size == 0:
        return u_arr.copy()
    K = image_count(law, spacing, float(np.max(np.abs(flat))))
    k = np.arange(-K, K + 1, dtype=float)
    pts = flat[:, None] - spacing * k[None, :]
    direct = stable_density(law, pts.ravel()).reshape(pts.shape)
    # sum smallest images first
    order = np.argsort(-np.abs(k))
    total = direct[:, order].sum(axis=1)
    if law.alpha != 2.0:
        total = total + _tail(law, flat, spacing, K)
    return _out(total.reshape(u_arr.shape), u)


def wrapped_density(law, u):
    """Density of f(y(t)) extended 4-periodically to the whole line."""
    return image_sum(law, u, 4.0)


def _restrict(values, u, half_width, like):
    u_arr = np.asarray(u, dtype=float)
    inside = np.abs(u_arr) <= half_width * (1.0 + 1e-15)
    res = np.where(inside, values, 0.0)
    return _out(res, like)


def reflected_density(law, u):
    """Density of Y(t) = g(f(y(t))) on [-1, 1]; zero outside."""
    u_arr = np.asarray(u, dtype=float)
    vals = image_sum(law, np.clip(u_arr, -1.0, 1.0), 2.0)
    return _restrict(vals, u_arr, 1.0, u)


def scaled_reflected_density(law, geom, u):
    """Density of Y_r(t) = r g(f(y(t) / r)) on [-r, r]."""
    r = geom.r
    inner = law.at(law.t * geom.time_factor(law.alpha))
    u_arr = np.asarray(u, dtype=float)
    vals = reflected_density(inner, np.clip(u_arr / r, -1.0, 1.0)) / r
    return _restrict(vals, u_arr, r, u)


def periodic_density(law, n, u):
    """Density on [-1, 1] for starts spread uniformly over ``-1 + (2k+1)/n``.

    The starts and their mirror images form the lattice ``-1 + 1/n + 2k/n``,
    so the density is ``(1/n) sum_k p_t(u + 1 - 1/n - 2k/n)``.  For odd n the
    lattice contains 0 and this is the plain ``2/n``-spaced sum.
    """
    FoldingGeometry(n=n)
    u_arr = np.asarray(u, dtype=float)
    vals = image_sum(law, np.clip(u_arr, -1.0, 1.0) + 1.0 - 1.0 / n, 2.0 / n) / n
    return _restrict(vals, u_arr, 1.0, u)


def periodic_decomposition(law, n, u):
    """Right-hand side of the cell decomposition of ``periodic_density``.

    ``(1/n) sum_k pi_{t,1/n}(u + 1 - (2k+1)/n)`` where each term lives on its
    own cell of half-width ``1/n``.  Cells are half-open,
    ``[-1 + 2k/n, -1 + 2(k+1)/n)``, with the last one closed, and a point's
    cell is read off ``u`` directly so shared edges are counted once.
    """
    FoldingGeometry(n=n)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    geom = FoldingGeometry(r=1.0 / n)
    inside = np.abs(u_arr) <= 1.0
    k = np.clip(np.floor((u_arr + 1.0) * n / 2.0), 0, n - 1)
    w = u_arr + 1.0 - (2.0 * k + 1.0) / n
    total = np.zeros_like(u_arr)
    total[inside] = scaled_reflected_density(law, geom, np.clip(w[inside], -1.0 / n, 1.0 / n)) / n
    return _out(total if np.ndim(u) else total[0], u)


# --- smooth initial laws --------------------------------------------------------


@dataclass
class SmoothInitial:
    """Initial density ``mu`` on [-1, 1] with vanishing slope at both edges.

    Set ``check=False`` to admit densities outside that class (used only as
    analytic test cases).
    """

    mu: object
    check: bool = True

    def __post_init__(self):
        if self.check:
            mass = quad(lambda v: float(self.mu(np.asarray(v))), -1.0, 1.0, limit=200)[0]
            if abs(mass - 1.0) > 1e-8:
                raise ParameterError(f"initial density integrates to {mass!r}, not 1")
            h = 1e-5
            for edge, sgn in ((1.0, -1.0), (-1.0, 1.0)):
                pts = edge + sgn * h * np.arange(3)
                f0, f1, f2 = (float(self.mu(np.asarray(p))) for p in pts)
                slope = sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
                if abs(slope) > 1e-6:
                    raise ParameterError(f"initial density slope at {edge:+g} is {slope:.3g}")

    def __call__(self, v):
        return self.mu(v)

    @classmethod
    def raised_cosine(cls, center=0.0, width=1.0):
        """Bump ``(1 + cos(pi (v - c) / w)) / (2 w)`` supported on ``|v - c| <= w``."""
        if width <= 0 or center - width < -1.0 - 1e-12 or center + width > 1.0 + 1e-12:
            raise ParameterError("raised-cosine support must lie inside [-1, 1]")

        def mu(v):
            x = (np.asarray(v, dtype=float) - center) / width
            return np.where(np.abs(x) <= 1.0, (1.0 + np.cos(np.pi * x)) / (2.0 * width), 0.0)

        return cls(mu)


def smooth_initial_density(law, init, u, shifted=False):
    """Density of the reflected process started from ``init`` on [-1, 1].

    The default evaluates ``int (Pbar(u - v) + Pbar(u + 2 + v)) mu(v) dv``,
    which is the law of ``g(f(y(t) + z))``.  ``shifted=True`` instead gives
    the law of ``g(f(y(t) - 1 + z))``, i.e.
    ``int (Pbar(u + 1 - v) + Pbar(u + 1 + v)) mu(v) dv``.

    Composite Simpson on 2**k panels, doubled until the Richardson error
    estimate drops below 1e-8.
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if shifted:
        def kernel(v):
            return wrapped_density(law, u_arr[:, None] + 1.0 - v) + wrapped_density(
                law, u_arr[:, None] + 1.0 + v
            )
    else:
        def kernel(v):
            return wrapped_density(law, u_arr[:, None] - v) + wrapped_density(
                law, u_arr[:, None] + 2.0 + v
            )

    def integrand(v):
        return kernel(v[None, :]) * np.asarray(init(v), dtype=float)[None, :]

    panels = 16
    v = np.linspace(-1.0, 1.0, panels + 1)
    fv = integrand(v)
    prev = _simpson(fv, 2.0 / panels)
    err = np.inf
    while panels < 2**16:
        mid = (v[:-1] + v[1:]) / 2.0
        fm = integrand(mid)
        merged = np.empty((fv.shape[0], 2 * panels + 1))
        merged[:, 0::2] = fv
        merged[:, 1::2] = fm
        v = np.linspace(-1.0, 1.0, 2 * panels + 1)
        fv, panels = merged, 2 * panels
        cur = _simpson(fv, 2.0 / panels)
        err = float(np.max(np.abs(cur - prev))) / 15.0
        prev = cur + (cur - prev) / 15.0 if err < _SIMPSON_TOL else cur
        if err < _SIMPSON_TOL:
            break
    else:
        raise NumericalError(f"Simpson refinement stalled at error {err:.2e}", achieved=err)
    res = np.where(np.abs(u_arr) <= 1.0, prev, 0.0)
    return _out(res if np.ndim(u) else res[0], u)


def _simpson(f, h):
    # f has an odd number of columns; panels are pairs of intervals
    return h / 3.0 * (f[:, 0] + f[:, -1] + 4.0 * f[:, 1:-1:2].sum(axis=1) + 2.0 * f[:, 2:-1:2].sum(axis=1))
