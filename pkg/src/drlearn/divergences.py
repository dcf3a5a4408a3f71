"""Divergence descriptors for the ambiguity ball around the uniform weights.

A divergence between a candidate pmf ``P`` and the uniform base pmf on ``n``
points is measured as ``mean(phi(n * p_i))`` for a convex ``phi`` with
``phi(1) = 0``.  Two kinds are shipped: the modified chi-squared
``phi(s) = (s - 1)^2`` and Kullback-Leibler ``phi(s) = s log s - s + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import xlogy


@dataclass(frozen=True)
class PhiDivergence:
    """Scalar functions needed by the worst-case weight solver.

    ``phi_prime_at_zero`` is the one-sided derivative at 0; ``-inf`` marks
    divergences whose weights can never be clamped to zero (KL), so the
    solver branches on the sentinel rather than comparing magnitudes.
    """

    name: str
    phi: Callable
    phi_prime: Callable
    phi_prime_inv: Callable
    phi_at_zero: float
    phi_prime_at_zero: float


def _chi2_phi(s):
    s = np.asarray(s, dtype=np.float64)
    return (s - 1.0) ** 2


def _kl_phi(s):
    s = np.asarray(s, dtype=np.float64)
    # xlogy(0, 0) = 0, so phi(0) comes out as the limit value 1
    return xlogy(s, s) - s + 1.0


CHI2 = PhiDivergence(
    name="chi2",
    phi=_chi2_phi,
    phi_prime=lambda s: 2.0 * (np.asarray(s, dtype=np.float64) - 1.0),
    phi_prime_inv=lambda y: 1.0 + 0.5 * np.asarray(y, dtype=np.float64),
    phi_at_zero=1.0,
    phi_prime_at_zero=-2.0,
)

KL = PhiDivergence(
    name="kl",
    phi=_kl_phi,
    phi_prime=np.log,
    phi_prime_inv=np.exp,
    phi_at_zero=1.0,
    phi_prime_at_zero=-math.inf,
)

_BY_NAME = {"chi2": CHI2, "kl": KL}


def divergence_by_name(name: str) -> PhiDivergence:
    try:
        return _BY_NAME[name.lower()]
    except KeyError:
        raise ValueError(f"unknown divergence {name!r}; available: {sorted(_BY_NAME)}") from None


def rho_bar(divergence: PhiDivergence, n: int) -> float:
    """Strict upper bound on the radius below which every feasible pmf keeps
    all n weights positive.

    It is the divergence of the cheapest pmf that zeroes out one point:
    uniform 1/(n-1) on the rest.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return float(
        (1.0 - 1.0 / n) * divergence.phi(n / (n - 1.0)) + divergence.phi_at_zero / n
    )


def rho_inflated(rho: float, m: int, n: int, c: float = 1.0, delta: float = 0.01) -> float:
    """Radius target for a size-m subproblem: rho + c * (1/m - 1/n)^((1-delta)/2).

    The inflation keeps the restriction of the full-data optimal weights
    feasible with high probability; it vanishes exactly at m = n.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if c <= 0:
        raise ValueError(f"need c > 0, got {c}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"need 0 < delta < 1, got {delta}")
    if rho <= 0:
        raise ValueError(f"need rho > 0, got {rho}")
    if m == n:
        return float(rho)
    return float(rho + c * (1.0 / m - 1.0 / n) ** ((1.0 - delta) / 2.0))
