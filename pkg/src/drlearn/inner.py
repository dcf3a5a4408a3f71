"""Worst-case reweighting: maximize sum_m p_m z_m over the divergence ball.

Given per-sample losses z_1..z_M, the solver finds the pmf P* within
divergence ``rho`` of the uniform weights that maximizes the weighted loss:

    max_P  sum_m p_m z_m
    s.t.   mean_m phi(M p_m) <= rho,   sum_m p_m = 1,   p_m >= 0.

Two regimes:

* If the vertex candidate -- uniform mass on the argmax entries of z, zero
  elsewhere -- already lies inside the ball, it is optimal (the dual weight
  ``alpha`` on the divergence constraint is 0) and we return it directly.
* Otherwise the divergence constraint is active at the optimum.  For a fixed
  alpha > 0 the stationarity condition gives the weights
  ``M p_m = (phi')^{-1}((z_m - lambda)/alpha)``, clamped to 0 where the
  unconstrained value would go negative; lambda is pinned by sum_m p_m = 1
  (closed form for KL, a sorted scan for chi-squared, bisection in general),
  and an outer bisection drives the divergence of P(alpha) onto rho.

The ball is strictly convex for both shipped divergences, so off ties in z
the optimum is unique.  For radii at or above the all-weights-positive bound
(`rho_bar`) the solver still returns a valid optimum; it may sit on the
simplex boundary (some p_m = 0) and the weighted gradient built from it is a
subgradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .divergences import CHI2, PhiDivergence, rho_bar
from .losses import LOGISTIC

CASE_ALPHA_ZERO = "alpha_zero"
CASE_BISECTION = "bisection"

# z values within this absolute distance of max(z) join the argmax set
ARGMAX_TIE_TOL = 1e-12

_ALPHA_FLOOR = 1e-300
_ALPHA_CEIL = 1e18
_MAX_BISECT_ITERS = 200


class InnerSolverError(RuntimeError):
    """Bisection could not bracket or meet the divergence tolerance."""


@dataclass
class InnerSolution:
    """Optimal weights with duals and solve diagnostics.

    alpha/lam are the multipliers of the divergence and simplex constraints;
    bisection_iters counts divergence evaluations (0 in the alpha-zero case).
    """

    p: np.ndarray
    alpha: float
    lam: float
    objective: float
    case_taken: str
    bisection_iters: int


def _chi2_weights(z, z_sorted, prefix, m, alpha):
    # Exact solve of sum(w) = M for w = max(0, 1 + (z - lam)/(2 alpha)):
    # with the top-j entries active, lam_j = (S_j - 2 alpha (M - j)) / j,
    # and the valid truncation is the largest j whose own entry stays active
    # (same water-filling argument as euclidean simplex projection).
    j_range = np.arange(1.0, m + 1.0)
    lam_cand = (prefix - 2.0 * alpha * (m - j_range)) / j_range
    valid = z_sorted > lam_cand - 2.0 * alpha
    j = int(np.nonzero(valid)[0][-1]) + 1
    lam = float(lam_cand[j - 1])
    w = np.maximum(0.0, 1.0 + (z - lam) / (2.0 * alpha))
    return w, lam


def _kl_weights(z, m, alpha):
    # lambda has the closed form alpha * (logsumexp(z/alpha) - log M), which
    # makes the weights a max-shifted softmax of z/alpha (always positive).
    t = z / alpha
    tmax = t.max()
    e = np.exp(t - tmax)
    s = e.sum()
    lam = alpha * (tmax + np.log(s) - np.log(m))
    return (m / s) * e, lam


def _bisect_weights(z, m, alpha, divergence):
    # Generic fallback: bisection on lambda for sum(w(lambda)) = M.
    # w is nonincreasing in lambda; [min z, max z] brackets the root because
    # phi'(1) = 0 puts every weight at >= 1 for lambda = min z and at <= 1
    # for lambda = max z.
    cut = divergence.phi_prime_at_zero

    def weights(lam):
        u = (z - lam) / alpha
        with np.errstate(over="ignore"):
            w = np.asarray(divergence.phi_prime_inv(u), dtype=np.float64)
        if np.isfinite(cut):
            w = np.where(u > cut, w, 0.0)
        return w

    lo, hi = float(z.min()), float(z.max())
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if weights(mid).sum() >= m:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return weights(lam), lam


def _weight_solver(z, m, divergence):
    if divergence.name == "chi2":
        z_sorted = np.sort(z)[::-1]
        prefix = np.cumsum(z_sorted)
        return lambda alpha: _chi2_weights(z, z_sorted, prefix, m, alpha)
    if divergence.name == "kl":
        return lambda alpha: _kl_weights(z, m, alpha)
    return lambda alpha: _bisect_weights(z, m, alpha, divergence)


def solve_inner(z, rho: float, divergence: PhiDivergence = CHI2, eps: float = 1e-7) -> InnerSolution:
    """Solve the worst-case reweighting problem for loss values ``z``.

    Returns weights summing to 1 with divergence within ``eps`` of ``rho``
    whenever the constraint is active.  Rejects empty or non-finite z and
    nonpositive rho.
    """
    z = np.asarray(z, dtype=np.float64).ravel()
    m = z.size
    if m == 0:
        raise ValueError("empty loss vector")
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite loss values")
    if rho <= 0:
        raise ValueError(f"need rho > 0, got {rho}")

    # Vertex candidate: uniform on the (near-)argmax set.
    zmax = float(z.max())
    mask = z >= zmax - ARGMAX_TIE_TOL
    m_prime = int(mask.sum())
    d_vertex = float(
        (m_prime * divergence.phi(m / m_prime) + (m - m_prime) * divergence.phi_at_zero) / m
    )
    if d_vertex <= rho:
        p = mask / m_prime
        return InnerSolution(
            p=p,
            alpha=0.0,
            lam=zmax,
            objective=float(p @ z),
            case_taken=CASE_ALPHA_ZERO,
            bisection_iters=0,
        )

    weights_at = _weight_solver(z, m, divergence)
    evals = 0

    def divergence_at(alpha):
        nonlocal evals
        evals += 1
        w, lam = weights_at(alpha)
        return float(np.mean(divergence.phi(w))), w, lam

    # Divergence of P(alpha) decreases from the (infeasible) vertex value
    # toward 0, so grow the bracket until it straddles rho, then bisect.
    lo = 1e-12
    d_lo, w, lam = divergence_at(lo)
    while d_lo <= rho and lo > _ALPHA_FLOOR:
        lo *= 1e-3
        d_lo, w, lam = divergence_at(lo)
    if d_lo <= rho:
        raise InnerSolverError(
            f"divergence {d_lo:.3g} <= rho {rho:.3g} at alpha={lo:.3g} although the "
            "vertex solution is infeasible; cannot bracket"
        )
    hi = max(1.0, 2.0 * lo)
    d_hi, w, lam = divergence_at(hi)
    while d_hi > rho:
        lo, d_lo = hi, d_hi
        hi *= 2.0
        if hi > _ALPHA_CEIL:
            raise InnerSolverError(
                f"alpha bracket expansion failed: divergence {d_hi:.6g} still above "
                f"rho {rho:.6g} at alpha in [{lo:.3g}, {hi:.3g}]"
            )
        d_hi, w, lam = divergence_at(hi)

    alpha = hi
    d_mid = d_hi
    for _ in range(_MAX_BISECT_ITERS):
        if abs(d_mid - rho) <= eps:
            break
        alpha = 0.5 * (lo + hi)
        d_mid, w, lam = divergence_at(alpha)
        if d_mid > rho:
            lo = alpha
        else:
            hi = alpha
    else:
        raise InnerSolverError(
            f"alpha bisection did not reach |divergence - rho| <= {eps:g} within "
            f"{_MAX_BISECT_ITERS} iterations; bracket [{lo:.6g}, {hi:.6g}], "
            f"residual {d_mid - rho:.3g}"
        )

    p = w / m
    return InnerSolution(
        p=p,
        alpha=float(alpha),
        lam=float(lam),
        objective=float(p @ z),
        case_taken=CASE_BISECTION,
        bisection_iters=evals,
    )


def robust_loss_full(
    theta: np.ndarray,
    data: Dataset,
    rho: float,
    divergence: PhiDivergence = CHI2,
    eps: float = 1e-7,
    loss=LOGISTIC,
    check_rho: bool = True,
) -> InnerSolution:
    """Worst-case loss over the full training set at parameters ``theta``.

    With ``check_rho`` (default) the radius must stay below ``rho_bar``,
    where the optimal weights are interior and unique.  The optimizers pass
    ``check_rho=False``: benchmark radii like 0.1 exceed ``rho_bar`` for all
    but tiny N, the optimum may then zero out some samples, and the weighted
    gradient is a valid subgradient.
    """
    if check_rho and data.n >= 2:
        bound = rho_bar(divergence, data.n)
        if rho >= bound:
            raise ValueError(
                f"rho={rho} >= rho_bar={bound:.6g} for N={data.n}: vertex solutions "
                "possible; pass check_rho=False to solve anyway"
            )
    z = loss.losses(theta, data)
    return solve_inner(z, rho, divergence, eps)
