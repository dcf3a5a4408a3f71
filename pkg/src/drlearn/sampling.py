"""Randomized-level machinery for the multi-level gradient estimator.

A level k in 1..K stands for a subset size min(2^k, N).  Levels are drawn
from a truncated geometric pmf q_k proportional to r^(k-1); the drawn subset
is split into two half-size draws whose estimates telescope against the next
level down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngState

# r minimizing (expected work) x (estimator variance): the geometric mean of
# the feasible range (1/4, 1/2)
R_STAR = 2.0 ** -1.5


@dataclass(frozen=True)
class LevelDistribution:
    """Truncated geometric level pmf and the subset size of each level.

    q is normalized to sum exactly to 1 (the geometric ratio between
    consecutive levels is what matters for cost/variance; an unnormalized
    vector would leak bias into the estimator through the singleton term).
    """

    n: int
    r: float
    k_max: int
    q: np.ndarray
    level_sizes: np.ndarray
    cdf: np.ndarray


@dataclass(frozen=True)
class SampledLevels:
    """One draw of the level machinery.

    m_full holds the level subset in draw order; m_left/m_right are its two
    half-size windows (overlapping by one element only at an odd-sized top
    level); singleton is the extra index for the base term.
    """

    tau: int
    m_full: np.ndarray
    m_left: np.ndarray
    m_right: np.ndarray
    singleton: int


def build_level_distribution(n: int, r: float = R_STAR) -> LevelDistribution:
    """Level pmf for a dataset of n rows: K = ceil(log2 n), q_k ~ r^(k-1)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 < r < 0.5:
        raise ValueError(f"need r in (0, 1/2) for bounded expected cost, got {r}")
    k_max = (n - 1).bit_length()
    raw = r ** np.arange(k_max, dtype=np.float64)
    q = raw / raw.sum()
    cdf = np.cumsum(q)
    cdf[-1] = 1.0
    sizes = np.minimum(2 ** np.arange(1, k_max + 1, dtype=np.int64), n)
    return LevelDistribution(n=n, r=float(r), k_max=k_max, q=q, level_sizes=sizes, cdf=cdf)


def sample_tau(dist: LevelDistribution, rng: RngState) -> int:
    """One level draw in 1..K by inverse CDF."""
    return int(np.searchsorted(dist.cdf, rng.gen.random(), side="right")) + 1


def sample_tau_many(dist: LevelDistribution, size: int, rng: RngState) -> np.ndarray:
    """Vectorized level draws (same inverse-CDF transform as sample_tau)."""
    return np.searchsorted(dist.cdf, rng.gen.random(size), side="right").astype(np.int64) + 1


def sample_without_replacement(n: int, m: int, rng: RngState) -> np.ndarray:
    """m distinct indices from [0, n), uniform over ordered draws.

    Partial Fisher-Yates over a virtual arange(n): touched positions live in
    a dict, so cost is O(m) regardless of n.
    """
    if not 0 < m <= n:
        raise ValueError(f"need 0 < m <= n, got m={m}, n={n}")
    swaps: dict[int, int] = {}
    out = np.empty(m, dtype=np.int64)
    for i in range(m):
        j = int(rng.gen.integers(i, n))
        vi = swaps.get(i, i)
        vj = swaps.get(j, j)
        out[i] = vj
        swaps[j] = vi
        swaps[i] = vj
    return out


def sample_subsets(dist: LevelDistribution, tau: int, rng: RngState) -> SampledLevels:
    """Draw the level-tau subset, its two halves, and the singleton index.

    The subset is the first M draws of a without-replacement sequence; the
    halves are the first and last ceil(M/2) draws (disjoint whenever M is
    even, i.e. always except at an odd-sized top level).  Draw-order
    randomness makes each half marginally a uniform sample of its size.  The
    singleton is the (M+1)-th draw, except at the top level where M = N
    leaves nothing to draw and an independent uniform index is used instead.
    """
    if not 1 <= tau <= dist.k_max:
        raise ValueError(f"tau must be in 1..{dist.k_max}, got {tau}")
    n = dist.n
    m = int(dist.level_sizes[tau - 1])
    if m == n:
        draws = sample_without_replacement(n, n, rng)
        singleton = int(rng.gen.integers(n))
    else:
        draws = sample_without_replacement(n, m + 1, rng)
        singleton = int(draws[m])
    full = draws[:m]
    half = (m + 1) // 2
    return SampledLevels(
        tau=tau,
        m_full=full,
        m_left=full[:half],
        m_right=full[m - half:],
        singleton=singleton,
    )
