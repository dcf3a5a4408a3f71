"""Logistic loss for binary linear classification.

The loss object is the pluggable model interface: anything exposing
``losses``, ``grad``, ``weighted_grad`` and ``misclassification`` with the
same meaning can be swapped in (the optimizers never look inside).
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.special import expit

from .data import Dataset


def _margins(theta: np.ndarray, features) -> np.ndarray:
    return np.asarray(features @ theta).ravel()


class LogisticLoss:
    """log(1 + exp(-y * theta @ x)), stateless and reentrant."""

    def loss(self, theta: np.ndarray, x, y: float) -> float:
        """Single-sample loss; x may be a sparse row or a dense vector.

        Computed as logaddexp(0, -m) for margin m = y * theta @ x, which is
        the stable branch log1p(exp(-|m|)) + max(0, -m): no overflow for
        m = -50, no spurious underflow to 0 for m = +50.
        """
        m = y * float(_margins(theta, x)[0] if sparse.issparse(x) else x @ theta)
        return float(np.logaddexp(0.0, -m))

    def losses(self, theta: np.ndarray, data: Dataset, idx=None) -> np.ndarray:
        """Vector of per-sample losses over ``idx`` (all rows when None)."""
        if idx is None:
            m = data.labels * _margins(theta, data.features)
        else:
            idx = np.asarray(idx)
            m = data.labels[idx] * _margins(theta, data.features[idx])
        return np.logaddexp(0.0, -m)

    def grad(self, theta: np.ndarray, x, y: float) -> np.ndarray:
        """Dense gradient -y * sigmoid(-m) * x for one sample."""
        if sparse.issparse(x):
            xd = np.asarray(x.todense()).ravel()
        else:
            xd = np.asarray(x, dtype=np.float64).ravel()
        m = y * float(xd @ theta)
        return -y * expit(-m) * xd

    def weighted_grad(self, theta: np.ndarray, data: Dataset, idx, p: np.ndarray) -> np.ndarray:
        """Convex combination sum_m p_m * grad(theta, x_m, y_m), dense."""
        idx = np.asarray(idx)
        p = np.asarray(p, dtype=np.float64)
        if idx.shape[0] != p.shape[0]:
            raise ValueError(f"{idx.shape[0]} indices but {p.shape[0]} weights")
        x = data.features[idx]
        y = data.labels[idx]
        m = y * _margins(theta, x)
        coef = p * (-y) * expit(-m)
        return np.asarray(x.T @ coef).ravel()

    def misclassification(self, theta: np.ndarray, data: Dataset) -> float:
        """Fraction of rows with sign(theta @ x) != y.

        A zero margin counts as misclassified (deterministic, pessimistic).
        """
        m = data.labels * _margins(theta, data.features)
        return float(np.mean(m <= 0.0))


LOGISTIC = LogisticLoss()
