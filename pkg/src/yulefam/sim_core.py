"""Forward simulation of the duplication model.

Individuals are numbered by birth order ``n = 1..N``.  Individual ``n >= 2``
founds a new family with probability ``r`` (and then carries label ``n``);
otherwise it copies the label of a uniformly chosen earlier individual.
Because every living individual splits at the same rate, this embedded
jump chain has exactly the law of the continuous-time population at the
moment it reaches size ``N``.

Label arrays are stored 0-based (``labels[n - 1]`` is the label of
individual ``n``) but carry 1-based label values, so a founder born at
position ``k`` has label ``k`` and individual 1 always has label 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .seeding import make_rng


@dataclass(frozen=True)
class ModelParams:
    r: float
    n_individuals: int

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0):
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if int(self.n_individuals) != self.n_individuals or self.n_individuals < 1:
            raise ValueError(f"n_individuals must be a positive integer, got {self.n_individuals}")
        object.__setattr__(self, "n_individuals", int(self.n_individuals))

    @property
    def N(self) -> int:
        return self.n_individuals

    def require_interior(self):
        if not (0.0 < self.r < 1.0):
            raise ValueError(f"the coupled construction needs 0 < r < 1, got r={self.r}")


@dataclass(frozen=True)
class TypeAssignment:
    labels: np.ndarray

    @property
    def n_individuals(self) -> int:
        return int(self.labels.size)

    def founders(self) -> np.ndarray:
        """Birth positions (1-based) of family founders, ascending."""
        return np.flatnonzero(self.labels == np.arange(1, self.labels.size + 1)) + 1

    def check(self):
        n = np.arange(1, self.labels.size + 1)
        if self.labels[0] != 1:
            raise AssertionError("individual 1 must carry label 1")
        if np.any(self.labels > n) or np.any(self.labels < 1):
            raise AssertionError("label exceeds birth position")
        # every label in use must belong to a founder
        used = np.unique(self.labels)
        if np.any(self.labels[used - 1] != used):
            raise AssertionError("label in use whose bearer did not found it")


@dataclass(frozen=True)
class FamilyCensus:
    """Family sizes ``counts[k] = R_k`` indexed by label (``counts[0]`` unused)."""

    counts: np.ndarray
    n_individuals: int
    _sorted: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_sorted", np.sort(self.counts[self.counts > 0]))

    @property
    def sizes(self) -> dict:
        labels = np.flatnonzero(self.counts)
        return {int(k): int(self.counts[k]) for k in labels}

    @property
    def family_sizes(self) -> np.ndarray:
        """Nonzero family sizes, ascending."""
        return self._sorted

    @property
    def n_families(self) -> int:
        return int(self._sorted.size)

    @property
    def cumulative(self) -> np.ndarray:
        """``X_k`` for ``k = 1..N``: fraction of individuals with label <= k."""
        return np.cumsum(self.counts[1:]) / self.n_individuals

    def tail_counts(self, S) -> np.ndarray:
        """Vectorized ``#{k : R_k >= S}``."""
        S = np.asarray(S)
        return self._sorted.size - np.searchsorted(self._sorted, S, side="left")


@dataclass(frozen=True)
class CoupledRun:
    """Joint realization of sticks ``W`` and the population census.

    Arrays are 0-based in ``k``: ``W[k - 1] = W_k``, ``X[k - 1] = X_k``.
    """

    r: float
    W: np.ndarray
    census: FamilyCensus
    X: np.ndarray
    Y: np.ndarray
    labels: Optional[np.ndarray] = None


def census(assignment) -> FamilyCensus:
    labels = assignment.labels if isinstance(assignment, TypeAssignment) else np.asarray(assignment)
    n = labels.size
    return FamilyCensus(np.bincount(labels, minlength=n + 1), n)


def tail_count(fc: FamilyCensus, S: int) -> int:
    """Number of families of size at least ``S``."""
    if S < 1:
        raise ValueError("S must be >= 1")
    return int(fc.tail_counts(S))


def _resolve_labels(parent: np.ndarray) -> np.ndarray:
    # pointer jumping: every parent index is <= its own index, so chains
    # terminate at founders (fixed points) after O(log depth) rounds
    while True:
        nxt = parent.take(parent)
        if np.array_equal(nxt, parent):
            return parent
        parent = nxt


def duplication_labels(rng: np.random.Generator, r: float, n: int, size: Optional[int] = None) -> np.ndarray:
    """Draw label arrays for ``size`` independent populations (shape ``(size, n)``).

    With ``size=None`` a single 1-D array is returned.  Each individual
    consumes one uniform pair (founder coin, parent choice), so the first
    ``m`` labels of a run of size ``n`` coincide with a run of size ``m``
    drawn from the same generator state.
    """
    rows = 1 if size is None else int(size)
    u = rng.random((rows, n, 2))
    idx = np.arange(n)
    parent = np.minimum((u[..., 1] * idx).astype(np.int64), np.maximum(idx - 1, 0))
    founder = u[..., 0] < r
    founder[:, 0] = True
    parent = np.where(founder, idx, parent)
    flat = (parent + (np.arange(rows) * n)[:, None]).ravel()
    labels = (_resolve_labels(flat).reshape(rows, n) - (np.arange(rows) * n)[:, None]) + 1
    return labels[0] if size is None else labels


def simulate_duplication(params: ModelParams, seed: int) -> TypeAssignment:
    return TypeAssignment(duplication_labels(make_rng(seed), params.r, params.N))


def beta1_inverse(u: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Beta(1, b) variate from a uniform ``u`` in (0, 1]: ``1 - u**(1/b)``."""
    return -np.expm1(np.log(u) / b)


def stick_suffix_products(W: np.ndarray) -> np.ndarray:
    """``Y_k = prod_{j>k} (1 - W_j)``, with ``Y_N = 1``."""
    Y = np.ones_like(W, dtype=float)
    if W.size > 1:
        Y[:-1] = np.cumprod((1.0 - W[:0:-1]))[::-1]
    return Y


def _coupled_draws(rng, r, n):
    u = rng.random((n, 3))
    k = np.arange(1, n + 1)
    founder = u[:, 0] < r
    founder[0] = True
    W = np.zeros(n)
    W[0] = 1.0
    fk = founder.copy()
    fk[0] = False
    W[fk] = beta1_inverse(1.0 - u[fk, 1], k[fk] - 1.0)
    return founder, W, 1.0 - u[:, 2]


def simulate_coupled(params: ModelParams, seed: int, method: str = "inverse") -> CoupledRun:
    """Realize the sticks ``W_k`` and the population on one probability space.

    A non-founder ``n`` examines founded labels ``k < n`` from the top down
    and joins label ``k`` with probability ``W_k``, falling back to label 1.
    ``method="cascade"`` flips those coins literally (O(r N^2));
    the default ``"inverse"`` samples the cascade's outcome in one step:
    the probability that it ends at a label ``<= j`` is ``Y_j / Y_{n-1}``,
    so the label is the first ``j`` with ``Y_j >= U * Y_{n-1}``.
    """
    params.require_interior()
    n = params.N
    rng = make_rng(seed)
    founder, W, u = _coupled_draws(rng, params.r, n)
    Y = stick_suffix_products(W)
    labels = np.arange(1, n + 1)
    joiners = np.flatnonzero(~founder)  # 0-based positions, all >= 1
    if method == "inverse":
        target = u[joiners] * Y[joiners - 1]
        labels[joiners] = np.searchsorted(Y, target, side="left") + 1
    elif method == "cascade":
        founded = []
        for i in range(1, n):
            if founder[i]:
                founded.append(i)
                continue
            lab = 1
            for k0 in reversed(founded):
                if rng.random() < W[k0]:
                    lab = k0 + 1
                    break
            labels[i] = lab
    else:
        raise ValueError(f"unknown method {method!r}")
    fc = census(labels)
    return CoupledRun(params.r, W, fc, fc.cumulative, Y, labels)


def max_coupling_gap(run: CoupledRun) -> float:
    return float(np.max(np.abs(np.asarray(run.X) - np.asarray(run.Y))))
