"""Reflection algebra on the half-open interval [-2, 2).

``fold_f`` wraps the real line onto [-2, 2) and is a homomorphism onto the
circle group ``(C, group_add)``; ``tent_g`` folds [-2, 2) onto [-1, 1].
Their composition reflects a free trajectory between the edges +-1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

PERIOD = 4.0
# residues this close to a fold boundary are snapped onto it
BOUNDARY_SNAP = 1e-15


def _out(values, like):
    return float(values) if np.ndim(like) == 0 else values


def fold_f(u):
    """``((u + 2) mod 4) - 2`` with floor-mod, so the result lies in [-2, 2).

    Computed as ``u - 4 k`` with integer ``k``; residues of out-of-range
    inputs within ``BOUNDARY_SNAP`` of +-2 snap to -2.
    """
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise ParameterError("fold_f requires finite input")
    res = u_arr - PERIOD * np.floor((u_arr + 2.0) / PERIOD)
    res = np.where(res >= 2.0, res - PERIOD, np.where(res < -2.0, res + PERIOD, res))
    tol = BOUNDARY_SNAP * np.maximum(1.0, np.abs(u_arr))
    res = np.where((res + 2.0 < tol) | (2.0 - res < tol), -2.0, res)
    # inputs already in range are returned untouched, so 0 is an exact unit
    res = np.where((u_arr >= -2.0) & (u_arr < 2.0), u_arr, res)
    return _out(res, u)


def _check_folded(u, name="u"):
    u_arr = np.asarray(u, dtype=float)
    if np.any(~((u_arr >= -2.0) & (u_arr < 2.0))):
        raise ParameterError(f"{name} must lie in [-2, 2)")
    return u_arr


def tent_g(u):
    """Fold [-2, 2) onto [-1, 1]; identity on the closed middle third."""
    v = _check_folded(u)
    res = np.where(v > 1.0, 2.0 - v, np.where(v < -1.0, -2.0 - v, v))
    return _out(res, u)


def group_add(u, v):
    _check_folded(u)
    _check_folded(v, "v")
    return fold_f(np.add(u, v))


def group_neg(u):
    _check_folded(u)
    return fold_f(np.negative(u))


def circle_distance(u, v):
    """Distance between two points of [-2, 2) viewed as a circle of length 4."""
    d = np.abs(np.subtract(u, v)) % PERIOD
    return np.minimum(d, PERIOD - d)


@dataclass(frozen=True)
class FoldingGeometry:
    """Interval half-width ``r`` and periodicity order ``n`` of the start lattice."""

    r: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r <= 0:
            raise ParameterError(f"r must be positive, got {self.r!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    def time_factor(self, alpha):
        """``m = r**(-alpha)``: time on [-r, r] maps to time ``t m`` on [-1, 1]."""
        return self.r ** (-alpha)


def reflect_position(y, geom=FoldingGeometry()):
    """Reflect free positions ``y`` into [-r, r]: ``r g(f(y / r))``."""
    r = geom.r
    res = r * tent_g(fold_f(np.asarray(y, dtype=float) / r))
    return _out(res, y)


def periodic_start_lattice(n):
    """The lattice ``(2k + 1) / n``, k = 0..n-1; starts sit at ``-1 + s``."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be an integer >= 1, got {n!r}")
    n = int(n)
    return (2.0 * np.arange(n) + 1.0) / n
