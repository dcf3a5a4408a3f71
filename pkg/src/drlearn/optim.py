"""The four training algorithms sharing one iteration-trace contract.

* gssg  -- stochastic descent with the unbiased multi-level gradient draw
           and a diminishing step.
* pssg  -- geometrically growing minibatch, constant step; once the batch
           reaches N it coincides with fsg.
* fsg   -- deterministic descent with the exact full worst-case gradient.
* sgd   -- fixed minibatch with a diminishing step; its gradient is biased,
           which is the point of carrying it as a baseline.

All methods iterate theta <- theta - gamma_t * g_t, start from theta_0
uniform on [-1, 1]^d derived from the run seed, and record the same trace
rows.  Wall clock is accumulated around the gradient computation and the
update only; evaluation passes are excluded.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .data import Dataset
from .divergences import divergence_by_name
from .estimators import giles_grad, subsampled_grad
from .losses import LOGISTIC
from .rng import RngState
from .sampling import R_STAR, build_level_distribution, sample_without_replacement

METHODS = ("gssg", "pssg", "fsg", "sgd")


@dataclass(frozen=True)
class StepSchedule:
    """Step size gamma_t: diminishing a/(b+t) or a constant."""

    kind: str
    a: float = 5000.0
    b: float = 5000.0
    gamma: float = 0.1

    def __post_init__(self):
        if self.kind not in ("diminishing", "constant"):
            raise ValueError(f"unknown step schedule kind {self.kind!r}")
        if self.kind == "diminishing" and (self.a < 0 or self.b <= 0):
            raise ValueError(f"diminishing schedule needs a >= 0 and b > 0, got a={self.a}, b={self.b}")
        if self.kind == "constant" and not (0 <= self.gamma < math.inf):
            raise ValueError(f"constant schedule needs finite gamma >= 0, got {self.gamma}")

    @classmethod
    def diminishing(cls, a: float = 5000.0, b: float = 5000.0) -> "StepSchedule":
        return cls(kind="diminishing", a=a, b=b)

    @classmethod
    def constant(cls, gamma: float = 0.1) -> "StepSchedule":
        return cls(kind="constant", gamma=gamma)

    def at(self, t: int) -> float:
        if self.kind == "diminishing":
            return self.a / (self.b + t)
        return self.gamma


class TraceRecord(NamedTuple):
    iteration: int
    cumulative_samples: int
    wall_clock_s: float
    train_robust_loss_estimate: float
    test_misclassification: float


TRACE_COLUMNS = tuple(TraceRecord._fields)
WALL_CLOCK_COLUMN = "wall_clock_s"


@dataclass
class RunTrace:
    """Per-iteration metrics of one optimizer run."""

    records: list = field(default_factory=list)

    def append(self, *args) -> None:
        self.records.append(TraceRecord(*args))

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for rec in self.records:
                writer.writerow(
                    [repr(float(v)) if isinstance(v, float) else int(v) for v in rec]
                )

    @staticmethod
    def read_csv(path) -> "RunTrace":
        trace = RunTrace()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != TRACE_COLUMNS:
                raise ValueError(f"unexpected trace header in {path}: {header}")
            for row in reader:
                trace.append(int(row[0]), int(row[1]), float(row[2]), float(row[3]), float(row[4]))
        return trace


@dataclass
class OptimizerConfig:
    """Settings for one training run; method-specific fields are validated
    when the corresponding runner is invoked."""

    method: str
    rho: float = 0.1
    divergence: str = "chi2"
    eps: float = 1e-7
    c: float = 1.0
    delta: float = 0.01
    r: float = R_STAR
    step: StepSchedule | None = None
    batch_m: int = 10
    nu: float = 1.001
    m0: int = 10
    max_iters: int = 1000
    seed: int = 0
    eval_every: int = 10
    eval_full_loss: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.step is None:
            if self.method in ("gssg", "sgd"):
                self.step = StepSchedule.diminishing()
            else:
                self.step = StepSchedule.constant()
        if self.rho <= 0:
            raise ValueError(f"need rho > 0, got {self.rho}")
        if self.max_iters < 1:
            raise ValueError(f"need max_iters >= 1, got {self.max_iters}")
        if self.eval_every < 1:
            raise ValueError(f"need eval_every >= 1, got {self.eval_every}")

    def validate_for(self, method: str) -> None:
        if self.method != method:
            raise ValueError(f"config is for method {self.method!r}, runner expects {method!r}")
        if method in ("gssg", "sgd") and self.step.kind != "diminishing":
            raise ValueError(f"{method} requires a diminishing step schedule")
        if method in ("pssg", "fsg") and self.step.kind != "constant":
            raise ValueError(f"{method} requires a constant step schedule")
        if method == "gssg" and not 0.25 < self.r < 0.5:
            raise ValueError(f"gssg requires r in (1/4, 1/2), got {self.r}")
        if method == "pssg" and (self.nu <= 1.0 or self.m0 < 1):
            raise ValueError(f"pssg requires nu > 1 and m0 >= 1, got nu={self.nu}, m0={self.m0}")
        if method == "sgd" and self.batch_m < 1:
            raise ValueError(f"sgd requires batch_m >= 1, got {self.batch_m}")


def _descend(config, data_train, data_test, grad_fn, loss):
    div = divergence_by_name(config.divergence)
    rng_theta, rng_sample = RngState(config.seed).split(2)
    theta = rng_theta.gen.uniform(-1.0, 1.0, size=data_train.d)
    trace = RunTrace()
    cumulative = 0
    wall = 0.0
    for t in range(config.max_iters):
        tic = time.perf_counter()
        est = grad_fn(t, theta, rng_sample)
        theta = theta - config.step.at(t) * est.g
        wall += time.perf_counter() - tic
        if not np.all(np.isfinite(theta)):
            raise RuntimeError(
                f"{config.method}: non-finite iterate at iteration {t + 1} "
                f"(step {config.step.at(t):.3g}, |g| {np.linalg.norm(est.g):.3g})"
            )
        cumulative += est.samples_used
        if (t + 1) % config.eval_every == 0 or t + 1 == config.max_iters:
            if config.eval_full_loss:
                loss_est = _train_robust_loss(theta, data_train, config, div, loss)
            else:
                loss_est = est.loss_estimate
            trace.append(
                t + 1,
                cumulative,
                wall,
                float(loss_est),
                loss.misclassification(theta, data_test),
            )
    return theta, trace


def _train_robust_loss(theta, data_train, config, div, loss):
    from .inner import robust_loss_full

    return robust_loss_full(
        theta, data_train, config.rho, div, config.eps, loss, check_rho=False
    ).objective


def run_gssg(config: OptimizerConfig, data_train: Dataset, data_test: Dataset, loss=LOGISTIC):
    config.validate_for("gssg")
    div = divergence_by_name(config.divergence)
    dist = build_level_distribution(data_train.n, config.r)

    def grad_fn(t, theta, rng):
        return giles_grad(
            theta, data_train, dist, config.rho, config.c, config.delta, div, config.eps, rng, loss
        )

    return _descend(config, data_train, data_test, grad_fn, loss)


def pssg_batch_size(t: int, m0: int, nu: float, n: int) -> int:
    """Deterministic growth min(N, ceil(m0 * nu^t)) at iteration t (0-based)."""
    return min(n, int(math.ceil(m0 * nu**t)))


def run_pssg(config: OptimizerConfig, data_train: Dataset, data_test: Dataset, loss=LOGISTIC):
    config.validate_for("pssg")
    div = divergence_by_name(config.divergence)
    n = data_train.n

    def grad_fn(t, theta, rng):
        m = pssg_batch_size(t, config.m0, config.nu, n)
        idx = np.arange(n) if m == n else sample_without_replacement(n, m, rng)
        return subsampled_grad(
            theta, data_train, idx, config.rho, config.c, config.delta, div, config.eps, loss
        )

    return _descend(config, data_train, data_test, grad_fn, loss)


def run_fsg(config: OptimizerConfig, data_train: Dataset, data_test: Dataset, loss=LOGISTIC):
    config.validate_for("fsg")
    div = divergence_by_name(config.divergence)
    full_idx = np.arange(data_train.n)

    def grad_fn(t, theta, rng):
        return subsampled_grad(
            theta, data_train, full_idx, config.rho, config.c, config.delta, div, config.eps, loss
        )

    return _descend(config, data_train, data_test, grad_fn, loss)


def run_sgd(config: OptimizerConfig, data_train: Dataset, data_test: Dataset, loss=LOGISTIC):
    config.validate_for("sgd")
    div = divergence_by_name(config.divergence)
    n = data_train.n
    m = min(config.batch_m, n)

    def grad_fn(t, theta, rng):
        idx = np.arange(n) if m == n else sample_without_replacement(n, m, rng)
        return subsampled_grad(
            theta, data_train, idx, config.rho, config.c, config.delta, div, config.eps, loss
        )

    return _descend(config, data_train, data_test, grad_fn, loss)


RUNNERS = {"gssg": run_gssg, "pssg": run_pssg, "fsg": run_fsg, "sgd": run_sgd}
