"""Monte Carlo experiment drivers.

Every driver runs independent replicates; replicate ``i`` draws from the
seed ``mix64(master_seed, i)`` (``mix64(mix64(master_seed, key), i)``
when an experiment has several cells), and results are reduced in index
order, so tables do not depend on ``threads``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .limit_laws import g_of_S, ml_cdf, ml_moment, sample_ml, z_moment
from .seeding import make_rng, mix64
from .sim_core import ModelParams, beta1_inverse, census, duplication_labels, max_coupling_gap, simulate_coupled

DEFAULT_SEED = 20051


# --------------------------------------------------------------------------
# replicate harness

def _run_chunk(task, master_seed, start, stop):
    return [task(mix64(master_seed, i)) for i in range(start, stop)]


def map_replicates(task: Callable[[int], object], replicates: int, master_seed: int,
                   threads: Optional[int] = None) -> list:
    """``[task(mix64(master_seed, i)) for i in range(replicates)]``, optionally in parallel.

    ``task`` must be picklable when ``threads > 1``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    threads = (os.cpu_count() or 1) if threads is None else int(threads)
    if threads <= 1 or replicates < 2:
        return _run_chunk(task, master_seed, 0, replicates)
    n_chunks = min(replicates, 4 * threads)
    bounds = np.linspace(0, replicates, n_chunks + 1).astype(int)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_chunk, task, master_seed, int(a), int(b))
                   for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        out = []
        for f in futures:
            out.extend(f.result())
    return out


def _mean_se(values: np.ndarray, axis=0):
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    mean = values.mean(axis=axis)
    se = values.std(axis=axis, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    return mean, se


def _check_r(r):
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r}")


def _check_reps(replicates):
    if int(replicates) != replicates or replicates < 1:
        raise ValueError(f"replicates must be a positive integer, got {replicates}")


# --------------------------------------------------------------------------
# tail counts and the power law

def default_s_grid(r: float, N: int, points: int = 40) -> np.ndarray:
    """Integer sizes, geometric from 1 to ``2 N^(1-r)`` (duplicates removed)."""
    top = max(2.0, 2.0 * N ** (1.0 - r))
    return np.unique(np.round(np.geomspace(1.0, top, points)).astype(np.int64))


@dataclass
class TailTable:
    r: float
    N: int
    replicates: int
    master_seed: int
    S: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    prediction: np.ndarray

    def rows(self):
        return list(zip(self.S.tolist(), self.mean.tolist(), self.stderr.tolist(), self.prediction.tolist()))

    def relative_error(self) -> np.ndarray:
        return (self.mean - self.prediction) / self.prediction


def _tail_task(r, N, S_grid, seed):
    fc = census(duplication_labels(make_rng(seed), r, N))
    return fc.tail_counts(S_grid)


def run_tail_experiment(r: float, N: int, replicates: int, S_grid=None,
                        master_seed: int = DEFAULT_SEED, threads: Optional[int] = 1) -> TailTable:
    """Mean number of families of size >= S over independent populations, with ``g(S)``."""
    _check_r(r)
    _check_reps(replicates)
    S_grid = default_s_grid(r, N) if S_grid is None else np.asarray(S_grid, dtype=np.int64)
    if np.any(np.diff(S_grid) <= 0) or S_grid[0] < 1:
        raise ValueError("S_grid must be ascending positive integers")
    counts = np.array(map_replicates(partial(_tail_task, r, N, S_grid), replicates, master_seed, threads))
    mean, se = _mean_se(counts)
    return TailTable(r, N, replicates, master_seed, S_grid, mean, se, g_of_S(r, N, S_grid))


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    slope_stderr: float
    S_min: float
    S_max: float
    n_points: int


def fit_loglog_slope(table: TailTable, S_min: float, S_max: float) -> SlopeFit:
    """Least-squares line through ``(log S, log mean F)`` for ``S_min <= S <= S_max``."""
    sel = (table.S >= S_min) & (table.S <= S_max) & (table.mean > 0)
    if np.count_nonzero(sel) < 3:
        raise ValueError("need at least 3 grid points with positive counts in range")
    res = stats.linregress(np.log(table.S[sel]), np.log(table.mean[sel]))
    return SlopeFit(res.slope, res.intercept, res.stderr, float(S_min), float(S_max), int(np.count_nonzero(sel)))


# --------------------------------------------------------------------------
# coupling bound

@dataclass
class CouplingReport:
    r: float
    replicates: int
    master_seed: int
    N: np.ndarray
    mean_gap: np.ndarray
    stderr: np.ndarray

    @property
    def bound(self) -> np.ndarray:
        return 5.0 / np.sqrt(self.N)

    @property
    def ratio(self) -> np.ndarray:
        return self.mean_gap / self.bound

    def rows(self):
        return list(zip(self.N.tolist(), self.mean_gap.tolist(), self.stderr.tolist(),
                        self.bound.tolist(), self.ratio.tolist()))

    def loglog_slope(self) -> Tuple[float, float]:
        """Slope of ``log mean_gap`` against ``log N`` and its standard error."""
        res = stats.linregress(np.log(self.N), np.log(self.mean_gap))
        return res.slope, res.stderr


def _coupling_task(r, N, seed):
    return max_coupling_gap(simulate_coupled(ModelParams(r, N), seed))


def run_coupling_experiment(r: float, N_list: Sequence[int], replicates: int,
                            master_seed: int = DEFAULT_SEED, threads: Optional[int] = 1) -> CouplingReport:
    _check_r(r)
    _check_reps(replicates)
    N_arr = np.asarray(N_list, dtype=np.int64)
    if np.any(N_arr < 2):
        raise ValueError("every N must be >= 2")
    means, ses = [], []
    for N in N_arr:
        gaps = map_replicates(partial(_coupling_task, r, int(N)), replicates, mix64(master_seed, int(N)), threads)
        m, s = _mean_se(gaps)
        means.append(m)
        ses.append(s)
    return CouplingReport(r, replicates, master_seed, N_arr, np.array(means), np.array(ses))


# --------------------------------------------------------------------------
# Kolmogorov-Smirnov

def ks_statistic(samples, reference_cdf: Callable, n_effective: Optional[float] = None) -> Tuple[float, float]:
    """Sup distance between the empirical CDF of ``samples`` and ``reference_cdf``.

    The p-value is the asymptotic Kolmogorov tail at ``sqrt(n) D``; pass
    ``n_effective = n m / (n + m)`` when the reference is itself an
    empirical CDF of ``m`` draws.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 10:
        raise ValueError("need at least 10 samples")
    F = np.asarray(reference_cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    D = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    n_eff = n if n_effective is None else n_effective
    return D, float(stats.kstwobign.sf(D * math.sqrt(n_eff)))


def empirical_cdf(reference) -> Callable:
    ref = np.sort(np.asarray(reference, dtype=float))
    return lambda x: np.searchsorted(ref, x, side="right") / ref.size


# --------------------------------------------------------------------------
# largest families

@dataclass
class LargestFamilyReport:
    r: float
    N: int
    k: int
    replicates: int
    master_seed: int
    samples: np.ndarray          # R_k / N^(1-r), conditioned on k founding when k >= 2
    unconditional: np.ndarray    # R_k / N^(1-r), zeros included
    ks_D: float
    ks_p: float
    moments: List[Tuple[float, float, float, float]] = field(default_factory=list)  # (m, mean, stderr, theory)

    @property
    def acceptance(self) -> float:
        return self.samples.size / self.replicates


def _largest_task(r, N, k, seed):
    labels = duplication_labels(make_rng(seed), r, N)
    return np.count_nonzero(labels == 1), np.count_nonzero(labels == k), bool(labels[k - 1] == k)


def mb_reference_sample(r: float, k: int, size: int, seed) -> np.ndarray:
    """Draws of ``M B^(1-r)``, ``M`` Mittag-Leffler(1-r), ``B`` Beta(1, k-1) independent."""
    rng = make_rng(seed)
    M = sample_ml(1.0 - r, rng, size)
    B = beta1_inverse(1.0 - rng.random(size), k - 1.0)
    return M * B ** (1.0 - r)


def run_largest_family_experiment(r: float, N: int, replicates: int, k: int = 1,
                                  master_seed: int = DEFAULT_SEED, threads: Optional[int] = 1,
                                  moments=(1.0, 2.0), reference_size: int = 200_000) -> LargestFamilyReport:
    """Scaled size ``R_k / N^(1-r)`` of family ``k`` against its Mittag-Leffler limit.

    Replicate ``i`` uses the same seed for every ``N``, and the simulator
    consumes randomness individual by individual, so runs at different
    ``N`` are nested (common random numbers).
    """
    _check_r(r)
    _check_reps(replicates)
    if k < 1 or k > N:
        raise ValueError("need 1 <= k <= N")
    out = map_replicates(partial(_largest_task, r, N, k), replicates, master_seed, threads)
    R1 = np.array([o[0] for o in out], dtype=float)
    Rk = np.array([o[1] for o in out], dtype=float)
    founded = np.array([o[2] for o in out])
    scale = N ** (1.0 - r)
    alpha = 1.0 - r
    if k == 1:
        samples = unconditional = R1 / scale
        D, p = ks_statistic(samples, lambda x: ml_cdf(alpha, x))
        theory = [ml_moment(alpha, m) for m in moments]
    else:
        unconditional = Rk / scale
        samples = unconditional[founded]
        if samples.size == 0:
            raise ValueError(f"no replicate had individual {k} found a family")
        ref = mb_reference_sample(r, k, reference_size, mix64(master_seed, 2 ** 40 + k))
        n_eff = samples.size * ref.size / (samples.size + ref.size)
        D, p = ks_statistic(samples, empirical_cdf(ref), n_effective=n_eff) if samples.size >= 10 else (math.nan, math.nan)
        theory = [z_moment(r, k, m) for m in moments]
    rows = []
    for m, t in zip(moments, theory):
        mean, se = _mean_se(unconditional ** m)
        rows.append((float(m), float(mean), float(se), float(t)))
    return LargestFamilyReport(r, N, k, replicates, master_seed, samples, unconditional, D, p, rows)


# --------------------------------------------------------------------------
# decay beyond the power-law window

@dataclass
class DecayTable:
    r: float
    N: int
    replicates: int
    master_seed: int
    x: np.ndarray
    estimate: np.ndarray   # mean number of families larger than x N^(1-r)
    stderr: np.ndarray
    slope: float           # d log(estimate) / d x^(1/r)
    slope_stderr: float

    @property
    def t_stat(self) -> float:
        return self.slope / self.slope_stderr if self.slope_stderr > 0 else -math.inf

    def rows(self):
        return list(zip(self.x.tolist(), self.estimate.tolist(), self.stderr.tolist()))

    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.estimate) <= 0))

    def is_concave(self) -> bool:
        """``log estimate`` concave in ``x^(1/r)`` (slopes between grid points decreasing)."""
        u = self.x ** (1.0 / self.r)
        with np.errstate(divide="ignore"):
            v = np.log(self.estimate)
        if not np.all(np.isfinite(v)):
            return False
        sl = np.diff(v) / np.diff(u)
        return bool(np.all(np.diff(sl) <= 0))


def _decay_task(r, N, thresholds, seed):
    sizes = census(duplication_labels(make_rng(seed), r, N)).family_sizes
    # strict exceedance: #{k : R_k > t}
    return sizes.size - np.searchsorted(sizes, thresholds, side="right")


def run_tail_decay_experiment(r: float, N: int, replicates: int, x_grid: Sequence[float],
                              master_seed: int = DEFAULT_SEED, threads: Optional[int] = 1) -> DecayTable:
    """Estimate ``sum_k P(R_k > x N^(1-r))`` and regress its log on ``x^(1/r)``.

    The slope's standard error comes from the delta method applied to the
    replicate covariance of the estimates (the grid points share replicates).
    """
    _check_r(r)
    _check_reps(replicates)
    x = np.asarray(x_grid, dtype=float)
    if np.any(x < 1) or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be ascending and >= 1")
    counts = np.array(map_replicates(partial(_decay_task, r, N, x * N ** (1.0 - r)),
                                     replicates, master_seed, threads), dtype=float)
    mean, se = _mean_se(counts)
    slope, slope_se = math.nan, math.nan
    if x.size >= 2 and np.all(mean > 0):
        u = x ** (1.0 / r)
        c = (u - u.mean()) / np.sum((u - u.mean()) ** 2)
        slope = float(c @ np.log(mean))
        cov = np.atleast_2d(np.cov(counts, rowvar=False)) / replicates
        grad = c / mean
        slope_se = float(math.sqrt(max(grad @ cov @ grad, 0.0)))
    return DecayTable(r, N, replicates, master_seed, x, mean, se, slope, slope_se)
