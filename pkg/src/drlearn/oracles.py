"""Brute-force references for the test suite.

Nothing here is used by production paths; these functions trade scale for
exactness so solver and estimator outputs can be checked against something
computed a completely different way.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .data import Dataset
from .divergences import CHI2, PhiDivergence, rho_bar
from .estimators import full_gradient, subsampled_grad
from .losses import LOGISTIC
from .sampling import LevelDistribution


def _simplex_grid(m: int, g: int) -> np.ndarray:
    """All pmfs on m points with entries that are multiples of 1/g (stars and bars)."""
    if m == 1:
        return np.ones((1, 1))
    cuts = np.array(list(itertools.combinations(range(g + m - 1), m - 1)), dtype=np.int64)
    parts = np.hstack(
        [cuts[:, :1], np.diff(cuts, axis=1) - 1, (g + m - 2) - cuts[:, -1:]]
    )
    return parts / g


def inner_max_grid(z, rho: float, divergence: PhiDivergence = CHI2, grid_step: float = 1e-3):
    """Best feasible simplex grid point; exhaustive, so m is capped at 5.

    Mirrors the full-data solver guard: radii at or beyond rho_bar(m) are
    rejected (uniqueness no longer holds there and the oracle is meant to
    certify the interior regime).
    """
    z = np.asarray(z, dtype=np.float64).ravel()
    m = z.size
    if m > 5:
        raise ValueError(f"grid oracle supports m <= 5, got {m}")
    if m >= 2 and rho >= rho_bar(divergence, m):
        raise ValueError(f"rho={rho} >= rho_bar={rho_bar(divergence, m):.6g} for m={m}")
    g = int(round(1.0 / grid_step))
    grid = _simplex_grid(m, g)
    div_vals = divergence.phi(m * grid).mean(axis=1)
    feasible = div_vals <= rho + 1e-12
    if not np.any(feasible):
        raise ValueError(f"no feasible grid point at step {grid_step} for rho={rho}")
    objectives = grid @ z
    objectives[~feasible] = -np.inf
    best = int(np.argmax(objectives))
    return grid[best], float(objectives[best])


def exact_giles_expectation(
    theta: np.ndarray,
    data: Dataset,
    dist: LevelDistribution,
    rho: float,
    c: float = 1.0,
    delta: float = 0.01,
    divergence: PhiDivergence = CHI2,
    eps: float = 1e-7,
    loss=LOGISTIC,
) -> np.ndarray:
    """Exact expectation of the multi-level gradient draw by enumeration.

    Sums q_k * E[draw | level k] over levels, enumerating every subset, every
    half-split and every singleton choice with its exact probability.  Only
    feasible for power-of-two n up to 8.
    """
    n = data.n
    if n > 8 or n & (n - 1) != 0:
        raise ValueError(f"enumeration oracle needs power-of-two n <= 8, got {n}")
    if dist.n != n:
        raise ValueError(f"level distribution built for n={dist.n}, dataset has n={n}")

    cache: dict[frozenset, np.ndarray] = {}

    def grad_on(subset) -> np.ndarray:
        key = frozenset(subset)
        if key not in cache:
            cache[key] = subsampled_grad(
                theta, data, np.fromiter(subset, dtype=np.int64), rho, c, delta, divergence, eps, loss
            ).g
        return cache[key]

    total = np.zeros(data.d)
    everyone = range(n)
    for k in range(1, dist.k_max + 1):
        m = int(dist.level_sizes[k - 1])
        subsets = list(itertools.combinations(everyone, m))
        e_full = np.zeros(data.d)
        e_half = np.zeros(data.d)
        e_single = np.zeros(data.d)
        for subset in subsets:
            e_full += grad_on(subset)
            halves = list(itertools.combinations(subset, m // 2))
            acc = np.zeros(data.d)
            for left in halves:
                right = tuple(sorted(set(subset) - set(left)))
                acc += 0.5 * (grad_on(left) + grad_on(right))
            e_half += acc / len(halves)
            if k < dist.k_max:
                others = [grad_on((s,)) for s in everyone if s not in subset]
                e_single += np.mean(others, axis=0)
        e_full /= len(subsets)
        e_half /= len(subsets)
        if k < dist.k_max:
            e_single /= len(subsets)
        else:
            e_single = np.mean([grad_on((s,)) for s in everyone], axis=0)
        total += dist.q[k - 1] * e_single + (e_full - e_half)
    return total


def exhaustive_bias(
    theta: np.ndarray,
    data: Dataset,
    m: int,
    rho: float,
    c: float = 1.0,
    delta: float = 0.01,
    divergence: PhiDivergence = CHI2,
    eps: float = 1e-7,
    loss=LOGISTIC,
) -> float:
    """Exact squared bias || E[subset gradient] - full gradient ||^2.

    Enumerates every size-m subset, so comb(n, m) is capped at 1e5.
    """
    n = data.n
    n_subsets = comb(n, m)
    if n_subsets > 100_000:
        raise ValueError(f"comb({n}, {m}) = {n_subsets} exceeds the enumeration cap of 1e5")
    mean_g = np.zeros(data.d)
    for subset in itertools.combinations(range(n), m):
        mean_g += subsampled_grad(
            theta, data, np.array(subset), rho, c, delta, divergence, eps, loss
        ).g
    mean_g /= n_subsets
    g_full, _ = full_gradient(theta, data, rho, divergence, eps, loss, check_rho=True)
    return float(np.sum((mean_g - g_full) ** 2))
