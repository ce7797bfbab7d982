"""Monte-Carlo uniformity experiment for the reflected process.

``y(1)`` is imitated by a normalised sum of symmetric Pareto variables,
positions ``g(f(t**(1/alpha) yhat))`` are binned into ten equal cells of
[-1, 1] and the deviation from uniformity is scored by

    S(t) = 10 M sum_j (S_j - 1/10)**2,

which is Pearson's chi-square statistic for ten equiprobable cells.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .errors import ParameterError
from .folding import fold_f, tent_g
from .stable import StableLaw, make_rng, sample_stable

NBINS = 10
WORKERS_ENV = "STABLEFOLD_WORKERS"
DEFAULT_M = 10_000
DEFAULT_N = 10_000
TABLE_ALPHAS = (1.9, 1.95, 1.99)
TABLE_TIMES = tuple(round(0.01 * i, 2) for i in range(1, 10))
_CHUNK_DRAWS = 4_000_000


def _check_alpha(alpha):
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")


def sample_pareto_summand(alpha, rng, size=None):
    """Symmetric Pareto draws with ``P(|v| > x) = x**(-alpha)`` for ``x > 1``."""
    _check_alpha(alpha)
    x = rng.uniform(-1.0, 1.0, size=size)
    mag = np.maximum(np.abs(x), np.finfo(float).tiny) ** (-1.0 / alpha)
    return np.where(x < 0, -mag, mag)


def sample_yhat(alpha, N, rng, size=None):
    """``(v_1 + ... + v_N) / N**(1/alpha)``; ``size`` independent copies."""
    N = int(N)
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    count = 1 if size is None else int(size)
    out = np.empty(count)
    rows = max(1, _CHUNK_DRAWS // N)
    for start in range(0, count, rows):
        stop = min(count, start + rows)
        out[start:stop] = sample_pareto_summand(alpha, rng, (stop - start, N)).sum(axis=1)
    out /= N ** (1.0 / alpha)
    return float(out[0]) if size is None else out


def pareto_sum_scale(alpha):
    """Time ``c`` with ``yhat -> y(c)`` in law as ``N -> inf``.

    For ``P(|v| > x) = x**(-alpha)`` the limit has log-characteristic
    function ``-c |u|**alpha`` with ``c = Gamma(1 - alpha) cos(pi alpha / 2)``
    (``pi / 2`` at alpha = 1).  Diverges at alpha = 2, where the summand
    variance is infinite.
    """
    _check_alpha(alpha)
    if alpha == 2.0:
        raise ParameterError("the normalised Pareto sum has no alpha = 2 limit")
    if alpha == 1.0:
        return np.pi / 2.0
    return float(gamma(1.0 - alpha) * np.cos(np.pi * alpha / 2.0))


def bin_frequencies(samples):
    """Proportions in the ten cells ``[-1 + 0.2 j, -1 + 0.2 (j + 1))``; the last is closed."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("no samples to bin")
    if np.any((x < -1.0) | (x > 1.0)) or not np.all(np.isfinite(x)):
        raise ParameterError("samples must lie in [-1, 1]")
    idx = np.minimum(np.floor((x + 1.0) * (NBINS / 2.0)).astype(int), NBINS - 1)
    return np.bincount(idx, minlength=NBINS) / x.size


def s_statistic(freqs, M):
    freqs = np.asarray(freqs, dtype=float)
    if len(freqs) != NBINS or abs(freqs.sum() - 1.0) > 1e-9:
        raise ParameterError("frequencies must be ten proportions summing to 1")
    return float(NBINS * M * np.sum((freqs - 1.0 / NBINS) ** 2))


def reflected_samples(alpha, t, M, N, rng, sampler="pareto"):
    """``M`` draws of ``g(f(t**(1/alpha) yhat))``.

    ``sampler="exact"`` swaps ``yhat`` for an exact draw of its limit law
    ``y(pareto_sum_scale(alpha))``.
    """
    if sampler == "pareto":
        y = sample_yhat(alpha, N, rng, size=M)
    elif sampler == "exact":
        y = sample_stable(StableLaw(alpha, pareto_sum_scale(alpha)), M, rng)
    else:
        raise ParameterError(f"unknown sampler {sampler!r}")
    return tent_g(fold_f(t ** (1.0 / alpha) * y))


@dataclass
class ChiSquareTable:
    alphas: tuple
    times: tuple
    M: int
    N: int
    seed: int
    S: np.ndarray  # rows follow times, columns follow alphas
    sampler: str = "pareto"

    def to_csv(self):
        lines = ["t,alpha,S,M,N,seed"]
        for i, t in enumerate(self.times):
            for j, a in enumerate(self.alphas):
                lines.append(f"{t:g},{a:g},{self.S[i, j]:.6f},{self.M},{self.N},{self.seed}")
        return "\n".join(lines) + "\n"

    def to_text(self):
        head = ["t"] + [f"S(t) for a={a:g}" for a in self.alphas]
        rows = [[f"{t:g}"] + [f"{s:.2f}" for s in self.S[i]] for i, t in enumerate(self.times)]
        widths = [max(len(r[c]) for r in [head] + rows) for c in range(len(head))]
        fmt = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths))
        rule = "-" * len(fmt(head))
        return "\n".join([fmt(head), rule] + [fmt(r) for r in rows]) + "\n"

    def to_dict(self):
        return {
            "alphas": list(self.alphas),
            "times": list(self.times),
            "M": self.M,
            "N": self.N,
            "seed": self.seed,
            "sampler": self.sampler,
            "S": self.S.tolist(),
        }


def _cell(args):
    alpha, t, M, N, seed, ia, it, sampler = args
    rng = make_rng(seed, ia, it)
    return s_statistic(bin_frequencies(reflected_samples(alpha, t, M, N, rng, sampler)), M)


def worker_count(default=1):
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ParameterError(f"{WORKERS_ENV} must be >= 1")
    return n


def run_table(alphas=TABLE_ALPHAS, times=TABLE_TIMES, M=DEFAULT_M, N=DEFAULT_N, seed=0, sampler="pareto", workers=None):
    """S(t) for every (t, alpha) cell; cell (it, ia) draws from stream ``(seed, ia, it)``."""
    alphas, times = tuple(float(a) for a in alphas), tuple(float(t) for t in times)
    M, N = int(M), int(N)
    if M < 100 or N < 10:
        raise ParameterError("need M >= 100 and N >= 10")
    for a in alphas:
        _check_alpha(a)
    if any(t <= 0 for t in times):
        raise ParameterError("times must be positive")
    jobs = [
        (a, t, M, N, int(seed), ia, it, sampler)
        for it, t in enumerate(times)
        for ia, a in enumerate(alphas)
    ]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            flat = list(pool.map(_cell, jobs))
    else:
        flat = [_cell(j) for j in jobs]
    S = np.array(flat).reshape(len(times), len(alphas))
    return ChiSquareTable(alphas, times, M, N, int(seed), S, sampler)
