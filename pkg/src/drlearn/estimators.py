"""Stochastic estimators of the worst-case loss gradient.

``subsampled_grad`` solves the reweighting problem on a subset with an
inflated radius and returns the weighted gradient; its expectation over
uniform subsets is biased, with squared bias of the order of the inflation
squared.  ``giles_grad`` removes the bias entirely by drawing a random level
and adding the telescoping half-split correction scaled by 1/q_tau.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .divergences import CHI2, PhiDivergence, rho_inflated
from .inner import robust_loss_full, solve_inner
from .losses import LOGISTIC
from .rng import RngState
from .sampling import LevelDistribution, sample_subsets, sample_tau


@dataclass
class GradientEstimate:
    """One gradient draw plus cost accounting.

    samples_used counts drawn indices (the cumulative-samples cost axis);
    loss_estimate is the worst-case objective of the main subproblem.
    """

    g: np.ndarray
    samples_used: int
    inner_solves: int
    wall_clock_s: float
    loss_estimate: float


def subsampled_grad(
    theta: np.ndarray,
    data: Dataset,
    idx,
    rho: float,
    c: float = 1.0,
    delta: float = 0.01,
    divergence: PhiDivergence = CHI2,
    eps: float = 1e-7,
    loss=LOGISTIC,
) -> GradientEstimate:
    """Worst-case-weighted gradient restricted to rows ``idx``.

    The radius is inflated for the subset size, so with idx = all rows it
    reduces exactly to the full worst-case gradient.
    """
    t0 = time.perf_counter()
    idx = np.asarray(idx)
    if idx.size == 0:
        raise ValueError("empty index set")
    if np.unique(idx).size != idx.size:
        raise ValueError("indices must be distinct")
    rho_m = rho_inflated(rho, idx.size, data.n, c, delta)
    z = loss.losses(theta, data, idx)
    sol = solve_inner(z, rho_m, divergence, eps)
    g = loss.weighted_grad(theta, data, idx, sol.p)
    return GradientEstimate(
        g=g,
        samples_used=int(idx.size),
        inner_solves=1,
        wall_clock_s=time.perf_counter() - t0,
        loss_estimate=sol.objective,
    )


def giles_grad(
    theta: np.ndarray,
    data: Dataset,
    dist: LevelDistribution,
    rho: float,
    c: float = 1.0,
    delta: float = 0.01,
    divergence: PhiDivergence = CHI2,
    eps: float = 1e-7,
    rng: RngState = None,
    loss=LOGISTIC,
) -> GradientEstimate:
    """Unbiased gradient draw: base singleton term plus debiasing correction.

    Draws a level tau and M(tau)+1 indices, solves the reweighting problem
    on the subset, on each half and on the singleton (each with the radius
    inflation for its own size), and returns

        g_singleton + (g_full - (g_left + g_right)/2) / q_tau.

    samples_used is M(tau)+1; inner_solves records the 4 solves.
    """
    if dist.n != data.n:
        raise ValueError(f"level distribution built for n={dist.n}, dataset has n={data.n}")
    t0 = time.perf_counter()
    tau = sample_tau(dist, rng)
    picks = sample_subsets(dist, tau, rng)

    def sub(idx):
        return subsampled_grad(theta, data, idx, rho, c, delta, divergence, eps, loss)

    est_full = sub(picks.m_full)
    est_left = sub(picks.m_left)
    est_right = sub(picks.m_right)
    est_one = sub(np.array([picks.singleton]))
    correction = est_full.g - 0.5 * (est_left.g + est_right.g)
    g = est_one.g + correction / dist.q[tau - 1]
    return GradientEstimate(
        g=g,
        samples_used=int(picks.m_full.size) + 1,
        inner_solves=4,
        wall_clock_s=time.perf_counter() - t0,
        loss_estimate=est_full.loss_estimate,
    )


def full_gradient(
    theta: np.ndarray,
    data: Dataset,
    rho: float,
    divergence: PhiDivergence = CHI2,
    eps: float = 1e-7,
    loss=LOGISTIC,
    check_rho: bool = False,
) -> tuple[np.ndarray, float]:
    """Exact worst-case (sub)gradient and objective over the full dataset."""
    sol = robust_loss_full(theta, data, rho, divergence, eps, loss, check_rho=check_rho)
    g = loss.weighted_grad(theta, data, np.arange(data.n), sol.p)
    return g, sol.objective
