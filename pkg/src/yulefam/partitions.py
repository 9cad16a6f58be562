"""Exact partition laws, Chinese restaurant samplers and an enumeration oracle.

Partitions are of ``{1, ..., n}``, with blocks ordered by their least
element ``a_1 = 1 < a_2 < ... < a_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .seeding import make_rng

MAX_ENUMERATION_N = 12


@dataclass(frozen=True)
class SetPartition:
    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0]))
        if any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be nonempty")
        flat = sorted(i for b in blocks for i in b)
        if flat != list(range(1, len(flat) + 1)):
            raise ValueError("blocks must partition {1, ..., n}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "SetPartition":
        """Group positions ``1..n`` by equal label."""
        groups = {}
        for i, lab in enumerate(labels, start=1):
            groups.setdefault(lab, []).append(i)
        return cls(tuple(tuple(g) for g in groups.values()))

    @classmethod
    def from_rgs(cls, rgs: Sequence[int]) -> "SetPartition":
        return cls.from_labels(rgs)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def least_elements(self) -> Tuple[int, ...]:
        return tuple(b[0] for b in self.blocks)

    def rgs(self) -> Tuple[int, ...]:
        """Restricted growth string (0-based block index of each element)."""
        out = [0] * self.n
        for j, b in enumerate(self.blocks):
            for i in b:
                out[i - 1] = j
        return tuple(out)

    def __str__(self):
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    @classmethod
    def parse(cls, text: str) -> "SetPartition":
        """Inverse of ``str``: ``"1,2|3"`` is ``{{1,2},{3}}``."""
        return cls(tuple(tuple(int(i) for i in b.split(",")) for b in text.split("|")))


@dataclass(frozen=True)
class CRPParams:
    alpha: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")
        # (0, 0) is admitted: customer 1 opens table 1 and nobody opens another
        if not (self.theta > -self.alpha or (self.alpha == 0.0 and self.theta == 0.0)):
            raise ValueError(f"theta must exceed -alpha, got theta={self.theta}, alpha={self.alpha}")


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def enumerate_partitions(n: int) -> Iterator[SetPartition]:
    """All partitions of ``{1..n}`` in restricted-growth-string order (lazy)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration is capped at n = {MAX_ENUMERATION_N}")
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield SetPartition.from_rgs(a)
        # rightmost position that can be incremented
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = max(b[j - 1], a[j - 1] + 1)


def _log_fact_sizes(part):
    return float(np.sum(gammaln(np.asarray(part.sizes, dtype=float))))


def dup_partition_prob(r: float, partition: SetPartition, log: bool = False) -> float:
    """Probability that the duplication model's label partition equals ``partition``.

    ``r^(k-1) (1-r)^(n-k) / (n-1)! * prod (n_i - 1)! * prod_{j>=2} (a_j - 1)``
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    n, k = partition.n, partition.k
    if not log:
        num = math.prod(math.factorial(s - 1) for s in partition.sizes)
        num *= math.prod(a - 1 for a in partition.least_elements[1:])
        return float(Fraction(num, math.factorial(n - 1))) * r ** (k - 1) * (1.0 - r) ** (n - k)
    lp = (k - 1) * math.log(r) + (n - k) * math.log1p(-r) - math.lgamma(n)
    lp += _log_fact_sizes(partition)
    lp += sum(math.log(a - 1) for a in partition.least_elements[1:])
    return lp


def ewens_prob(theta: float, partition: SetPartition, log: bool = False) -> float:
    """Ewens sampling formula ``theta^(k-1) / prod_{m=1}^{n-1} (m + theta) * prod (n_i - 1)!``."""
    if not theta > 0:
        raise ValueError("theta must be > 0")
    n, k = partition.n, partition.k
    if not log and n <= 100:
        num = math.prod(math.factorial(s - 1) for s in partition.sizes)
        return num * theta ** (k - 1) / math.prod(m + theta for m in range(1, n))
    lp = (k - 1) * math.log(theta) - (math.lgamma(n + theta) - math.lgamma(1.0 + theta))
    lp += _log_fact_sizes(partition)
    return lp if log else math.exp(lp)


def polya_sequence_prob(a: int, b: int, outcome: Sequence[int], log: bool = False) -> float:
    """Probability of an exact white(1)/black(0) draw sequence from a Polya urn.

    Starts with ``a`` white and ``b`` black balls; depends only on the
    number of ones, so the sequence is exchangeable.
    """
    if a < 1 or b < 1:
        raise ValueError("a and b must be >= 1")
    outcome = np.asarray(outcome)
    if not np.all((outcome == 0) | (outcome == 1)):
        raise ValueError("outcome must be binary")
    N, s = outcome.size, int(outcome.sum())
    lp = (math.lgamma(a + s) + math.lgamma(b + N - s) + math.lgamma(a + b)
          - math.lgamma(a) - math.lgamma(b) - math.lgamma(a + b + N))
    return lp if log else math.exp(lp)


def simulate_crp(params: CRPParams, n: int, seed) -> SetPartition:
    """Seat ``n`` customers by the two-parameter Chinese restaurant rule."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    alpha, theta = params.alpha, params.theta
    sizes = [1]
    labels = [0]
    for m in range(1, n):
        k = len(sizes)
        weights = np.append(np.asarray(sizes, dtype=float) - alpha, theta + k * alpha)
        u = rng.random() * (m + theta)
        t = int(np.searchsorted(np.cumsum(weights), u, side="right"))
        t = min(t, k)
        if t == k:
            sizes.append(1)
        else:
            sizes[t] += 1
        labels.append(t)
    return SetPartition.from_labels(labels)


def crp_table_counts(params: CRPParams, n: int, replicates: int, seed) -> np.ndarray:
    """Number of occupied tables after ``n`` customers, for many restaurants.

    Under the seating rule the table count is itself a Markov chain (a new
    table opens with probability ``(theta + k alpha)/(m + theta)``), so it
    can be advanced for all replicates at once.
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    k = np.ones(replicates, dtype=np.int64)
    for m in range(1, n):
        p = (params.theta + k * params.alpha) / (m + params.theta)
        k += rng.random(replicates) < p
    return k


def pd_stick_sample(params: CRPParams, K: int, seed) -> np.ndarray:
    """First ``K`` terms ``D_k prod_{j<k} (1 - D_j)``, ``D_j ~ Beta(1 - alpha, theta + j alpha)``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if params.alpha == 0.0 and params.theta == 0.0:
        raise ValueError("Poisson-Dirichlet sticks need theta > -alpha")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    j = np.arange(1, K + 1)
    D = rng.beta(1.0 - params.alpha, params.theta + j * params.alpha)
    left = np.concatenate([[1.0], np.cumprod(1.0 - D)[:-1]])
    return D * left
