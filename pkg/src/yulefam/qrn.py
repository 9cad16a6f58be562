"""Direct sampler for the stick-breaking approximation to family fractions.

``W_1 = 1`` and, independently for ``k >= 2``, ``W_k`` is zero with
probability ``1 - r`` and Beta(1, k - 1) otherwise.  The approximate
fraction of the population in family ``k`` is ``p_k = W_k * Y_k`` where
``Y_k = prod_{j>k} (1 - W_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import make_rng
from .sim_core import beta1_inverse, stick_suffix_products


def _check_r(r):
    if not (0.0 < r < 1.0):
        raise ValueError(f"r must lie in (0, 1), got {r}")


@dataclass(frozen=True)
class StickSequence:
    r: float
    N: int
    W: np.ndarray
    Y: np.ndarray
    p: np.ndarray

    def tail_count(self, S: float) -> int:
        """Number of ``k`` with ``N * p_k >= S``."""
        return int(np.count_nonzero(self.N * self.p >= S))


@dataclass(frozen=True)
class SparseStickSequence:
    """Only the nonzero sticks: ``W[i]`` sits at position ``index[i]`` (1-based)."""

    r: float
    N: int
    index: np.ndarray
    W: np.ndarray

    def Y_at(self, k):
        """``Y_k`` for scalar or array ``k`` in ``1..N``."""
        # suffix[i] = prod over sparse entries i..end
        suffix = np.append(np.cumprod((1.0 - self.W)[::-1])[::-1], 1.0)
        return suffix[np.searchsorted(self.index, np.asarray(k), side="right")]

    def to_dense(self) -> StickSequence:
        W = np.zeros(self.N)
        W[0] = 1.0
        W[self.index - 1] = self.W
        return _assemble(self.r, W)


def _assemble(r, W):
    Y = stick_suffix_products(W)
    p = W * Y
    return StickSequence(r, W.size, W, Y, p)


def sample_qrn(r: float, N: int, seed: int) -> StickSequence:
    _check_r(r)
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = make_rng(seed)
    u = rng.random((N, 2))
    k = np.arange(1, N + 1, dtype=float)
    W = np.zeros(N)
    W[0] = 1.0
    on = u[:, 0] < r
    on[0] = False
    W[on] = beta1_inverse(1.0 - u[on, 1], k[on] - 1.0)
    return _assemble(r, W)


def sample_qrn_sparse(r: float, N: int, seed: int, chunk: int = 4096) -> SparseStickSequence:
    """Sparse sampler for large ``N``: memory O(rN) instead of O(N).

    Nonzero positions are generated by geometric gaps, so this draws from
    a different stream than :func:`sample_qrn` for the same seed.
    """
    _check_r(r)
    rng = make_rng(seed)
    pos = []
    last = 1
    while last < N:
        gaps = rng.geometric(r, size=chunk)
        cand = last + np.cumsum(gaps)
        pos.append(cand[cand <= N])
        last = int(cand[-1])
    index = np.concatenate(pos) if pos else np.zeros(0, dtype=np.int64)
    W = beta1_inverse(1.0 - rng.random(index.size), index - 1.0)
    return SparseStickSequence(r, N, index.astype(np.int64), W)


def expected_Y(r: float, N: int, k: int) -> float:
    """``E[Y_k] = prod_{j=k+1}^N (1 - r/j)``; also the mean of ``X_k``."""
    if not 1 <= k <= N:
        raise ValueError("need 1 <= k <= N")
    j = np.arange(k + 1, N + 1, dtype=float)
    return float(np.exp(np.sum(np.log1p(-r / j))))


def expected_Y_all(r: float, N: int) -> np.ndarray:
    """``expected_Y(r, N, k)`` for every ``k = 1..N`` at once."""
    j = np.arange(2, N + 1, dtype=float)
    logs = np.log1p(-r / j)
    out = np.zeros(N)
    out[:-1] = np.cumsum(logs[::-1])[::-1]
    return np.exp(out)


def stick_tail_prob(r: float, k: int, a: float) -> float:
    """``P(W_k >= a) = r (1 - a)^(k - 1)`` for ``k >= 2``, ``0 < a < 1``."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    return r * (1.0 - a) ** (k - 1)
