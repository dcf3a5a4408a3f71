"""scikit-learn estimator facade over the worst-case training algorithms."""

from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import Dataset
from .optim import RUNNERS, OptimizerConfig, StepSchedule
from .sampling import R_STAR


class RobustLogisticClassifier(BaseEstimator, ClassifierMixin):
    """Binary linear classifier trained on the worst-case logistic loss.

    The training objective reweights samples adversarially within a
    phi-divergence ball of radius ``rho`` around uniform weights, which
    regularizes without a penalty term to tune.  ``solver`` picks the
    training algorithm: "gssg" (unbiased multi-level stochastic gradient,
    the default), "pssg" (growing minibatch), "fsg" (deterministic full
    gradient) or "sgd" (fixed minibatch, biased).

    Follows the scikit-learn estimator API, so it works with `clone`,
    pipelines and model selection utilities.
    """

    def __init__(
        self,
        solver: str = "gssg",
        rho: float = 0.1,
        divergence: str = "chi2",
        max_iters: int = 500,
        step_a: float = 5000.0,
        step_b: float = 5000.0,
        gamma: float = 0.1,
        r: float = R_STAR,
        c: float = 1.0,
        delta: float = 0.01,
        eps: float = 1e-7,
        batch_m: int = 10,
        nu: float = 1.001,
        m0: int = 10,
        eval_every: int = 100,
        random_state: int = 0,
    ):
        self.solver = solver
        self.rho = rho
        self.divergence = divergence
        self.max_iters = max_iters
        self.step_a = step_a
        self.step_b = step_b
        self.gamma = gamma
        self.r = r
        self.c = c
        self.delta = delta
        self.eps = eps
        self.batch_m = batch_m
        self.nu = nu
        self.m0 = m0
        self.eval_every = eval_every
        self.random_state = random_state

    def _config(self) -> OptimizerConfig:
        if self.solver not in RUNNERS:
            raise ValueError(f"unknown solver {self.solver!r}; expected one of {sorted(RUNNERS)}")
        if self.solver in ("gssg", "sgd"):
            step = StepSchedule.diminishing(self.step_a, self.step_b)
        else:
            step = StepSchedule.constant(self.gamma)
        return OptimizerConfig(
            method=self.solver,
            rho=self.rho,
            divergence=self.divergence,
            eps=self.eps,
            c=self.c,
            delta=self.delta,
            r=self.r,
            step=step,
            batch_m=self.batch_m,
            nu=self.nu,
            m0=self.m0,
            max_iters=self.max_iters,
            seed=self.random_state,
            eval_every=self.eval_every,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, accept_sparse="csr")
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValueError(f"binary classifier needs exactly 2 classes, got {self.classes_}")
        labels = np.where(y == self.classes_[1], 1.0, -1.0)
        data = Dataset(sparse.csr_matrix(X), labels)
        config = self._config()
        # trace metrics are evaluated on the training data itself
        self.coef_, self.trace_ = RUNNERS[self.solver](config, data, data)
        self.n_features_in_ = data.d
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, accept_sparse="csr")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.asarray(X @ self.coef_).ravel()

    def predict(self, X):
        # zero margin falls to the first class, matching the pessimistic
        # tie-breaking used by the misclassification metric
        return self.classes_[(self.decision_function(X) > 0).astype(int)]
