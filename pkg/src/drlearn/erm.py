"""Ridge-regularized empirical risk minimization tuned by k-fold CV.

The baseline the worst-case training is benchmarked against: fixed-batch
SGD on mean loss + lambda * ||theta||^2, with the penalty weight chosen by
walking a multiplicative ladder of candidates from a large start value and
backtracking once the mean validation misclassification stops improving.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .losses import LOGISTIC
from .optim import StepSchedule
from .rng import RngState
from .sampling import sample_without_replacement


@dataclass
class CvConfig:
    k: int = 10
    lambda_start: float = 1e6
    lambda_factor: float = 0.1
    patience: int = 3
    sgd_batch: int = 10
    step: StepSchedule | None = None
    max_iters: int = 1000
    seed: int = 0
    repeat_partitions: bool = False
    max_ladder: int = 60  # hard cap on candidates tried (start * factor^59 is ~1e-53)

    def __post_init__(self):
        if self.step is None:
            self.step = StepSchedule.diminishing()
        if self.k < 2:
            raise ValueError(f"need k >= 2 folds, got {self.k}")
        if self.lambda_start <= 0:
            raise ValueError(f"need lambda_start > 0, got {self.lambda_start}")
        if not 0.0 < self.lambda_factor < 1.0:
            raise ValueError(f"need 0 < lambda_factor < 1, got {self.lambda_factor}")
        if self.patience < 1:
            raise ValueError(f"need patience >= 1, got {self.patience}")


def erm_objective(theta: np.ndarray, data: Dataset, lam: float, loss=LOGISTIC) -> float:
    return float(np.mean(loss.losses(theta, data)) + lam * theta @ theta)


def erm_gradient(theta: np.ndarray, data: Dataset, idx, lam: float, loss=LOGISTIC) -> np.ndarray:
    """Minibatch gradient of the regularized objective: batch mean + 2 lam theta."""
    idx = np.asarray(idx)
    p = np.full(idx.size, 1.0 / idx.size)
    return loss.weighted_grad(theta, data, idx, p) + 2.0 * lam * theta


def erm_sgd(
    theta0: np.ndarray,
    data: Dataset,
    lam: float,
    batch: int,
    step: StepSchedule,
    iters: int,
    rng: RngState,
    loss=LOGISTIC,
) -> np.ndarray:
    """Minibatch SGD on the ridge-regularized empirical loss.

    The nominal step is damped to gamma / (1 + 2 gamma lam), which makes the
    ridge part of the update an exact implicit step: stable for any lambda
    (the tuning ladder starts at 1e6) without touching the gradient formula.
    """
    if lam < 0:
        raise ValueError(f"need lambda >= 0, got {lam}")
    n = data.n
    batch = min(batch, n)
    theta = np.array(theta0, dtype=np.float64)
    for t in range(iters):
        idx = np.arange(n) if batch == n else sample_without_replacement(n, batch, rng)
        g = erm_gradient(theta, data, idx, lam, loss)
        gamma = step.at(t)
        theta = theta - (gamma / (1.0 + 2.0 * gamma * lam)) * g
        if not np.all(np.isfinite(theta)):
            raise RuntimeError(f"erm_sgd: non-finite iterate at iteration {t + 1} (lambda={lam:g})")
    return theta


def backtrack_search(score_fn, candidates, patience: int):
    """Walk candidates in order, stop after `patience` consecutive non-improvements.

    Improvement means strictly smaller score than the best so far.  Returns
    (best_candidate, [(candidate, score), ...]) over everything evaluated.
    """
    best = None
    best_score = np.inf
    streak = 0
    history = []
    for cand in candidates:
        score = score_fn(cand)
        history.append((cand, score))
        if score < best_score:
            best, best_score = cand, score
            streak = 0
        else:
            streak += 1
            if streak >= patience:
                break
    return best, history


def _fold_partition(n: int, k: int, rng: RngState):
    """Disjoint cover of range(n) by k folds with sizes differing by <= 1."""
    return np.array_split(rng.gen.permutation(n), k)


@dataclass
class CvReport:
    """Per-(lambda, fold) validation results plus time accounting."""

    rows: list = field(default_factory=list)  # (lambda, fold, val_misclassification, train_seconds)
    lambda_means: list = field(default_factory=list)  # (lambda, mean val misclassification)
    best_lambda: float = np.nan
    total_train_seconds: float = 0.0
    total_sample_grads: int = 0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "fold", "val_misclassification", "train_seconds"])
            for lam, fold, mis, sec in self.rows:
                writer.writerow([repr(float(lam)), fold, repr(float(mis)), repr(float(sec))])


def kfold_cv(data: Dataset, config: CvConfig, loss=LOGISTIC):
    """Tune lambda by k-fold CV with backtracking, then retrain on all data.

    Returns (best_lambda, theta, report).  One ladder rung costs k trainings
    (k^2 with repeat_partitions), so the total work is roughly
    k x (number of lambdas tried) runs of erm_sgd plus the final retrain.
    """
    if data.n < config.k:
        raise ValueError(f"need at least k={config.k} rows, got {data.n}")
    report = CvReport()
    rng = RngState(config.seed)
    n_passes = config.k if config.repeat_partitions else 1
    partitions = [_fold_partition(data.n, config.k, rng) for _ in range(n_passes)]

    def evaluate(lam):
        scores = []
        for folds in partitions:
            for i, holdout in enumerate(folds):
                train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
                train = data.subset(train_idx)
                val = data.subset(holdout)
                run_rng = rng.split(1)[0]
                theta0 = run_rng.gen.uniform(-1.0, 1.0, size=data.d)
                t0 = time.perf_counter()
                theta = erm_sgd(
                    theta0, train, lam, config.sgd_batch, config.step, config.max_iters, run_rng, loss
                )
                sec = time.perf_counter() - t0
                mis = loss.misclassification(theta, val)
                report.rows.append((lam, i, mis, sec))
                report.total_train_seconds += sec
                report.total_sample_grads += config.max_iters * min(config.sgd_batch, train.n)
                scores.append(mis)
        mean = float(np.mean(scores))
        report.lambda_means.append((lam, mean))
        return mean

    ladder = (config.lambda_start * config.lambda_factor**j for j in range(config.max_ladder))
    best_lambda, _ = backtrack_search(evaluate, ladder, config.patience)

    final_rng = rng.split(1)[0]
    theta0 = final_rng.gen.uniform(-1.0, 1.0, size=data.d)
    t0 = time.perf_counter()
    theta = erm_sgd(theta0, data, best_lambda, config.sgd_batch, config.step, config.max_iters, final_rng, loss)
    report.total_train_seconds += time.perf_counter() - t0
    report.total_sample_grads += config.max_iters * min(config.sgd_batch, data.n)
    report.best_lambda = best_lambda
    return best_lambda, theta, report
