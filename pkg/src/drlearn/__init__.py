"""Distributionally robust training of binary linear classifiers.

Training minimizes the worst-case expected logistic loss over probability
reweightings of the sample within a phi-divergence ball, using an unbiased
multi-level Monte Carlo gradient estimator, with full-gradient, growing- and
fixed-minibatch baselines plus a cross-validated ridge ERM reference.
"""

from .data import Dataset, SyntheticSpec, make_synthetic, split_train_test
from .divergences import CHI2, KL, PhiDivergence, divergence_by_name, rho_bar, rho_inflated
from .erm import CvConfig, backtrack_search, erm_gradient, erm_objective, erm_sgd, kfold_cv
from .estimator import RobustLogisticClassifier
from .estimators import GradientEstimate, full_gradient, giles_grad, subsampled_grad
from .experiment import (
    ExperimentConfig,
    MethodSpec,
    emit_plot_data,
    load_experiment_config,
    load_experiment_dataset,
    run_experiment,
)
from .inner import InnerSolution, InnerSolverError, robust_loss_full, solve_inner
from .io import load_csv, load_libsvm, write_libsvm
from .losses import LOGISTIC, LogisticLoss
from .optim import (
    OptimizerConfig,
    RunTrace,
    StepSchedule,
    pssg_batch_size,
    run_fsg,
    run_gssg,
    run_pssg,
    run_sgd,
)
from .oracles import exact_giles_expectation, exhaustive_bias, inner_max_grid
from .rng import RngState
from .sampling import (
    R_STAR,
    LevelDistribution,
    SampledLevels,
    build_level_distribution,
    sample_subsets,
    sample_tau,
    sample_tau_many,
    sample_without_replacement,
)

__version__ = "0.1.0"

__all__ = [
    "CHI2",
    "CvConfig",
    "Dataset",
    "ExperimentConfig",
    "GradientEstimate",
    "InnerSolution",
    "InnerSolverError",
    "KL",
    "LOGISTIC",
    "LevelDistribution",
    "LogisticLoss",
    "MethodSpec",
    "OptimizerConfig",
    "PhiDivergence",
    "R_STAR",
    "RngState",
    "RobustLogisticClassifier",
    "RunTrace",
    "SampledLevels",
    "StepSchedule",
    "SyntheticSpec",
    "backtrack_search",
    "build_level_distribution",
    "divergence_by_name",
    "emit_plot_data",
    "erm_gradient",
    "erm_objective",
    "erm_sgd",
    "exact_giles_expectation",
    "exhaustive_bias",
    "full_gradient",
    "giles_grad",
    "inner_max_grid",
    "kfold_cv",
    "load_csv",
    "load_experiment_config",
    "load_experiment_dataset",
    "load_libsvm",
    "make_synthetic",
    "pssg_batch_size",
    "rho_bar",
    "rho_inflated",
    "robust_loss_full",
    "run_experiment",
    "run_fsg",
    "run_gssg",
    "run_pssg",
    "run_sgd",
    "sample_subsets",
    "sample_tau",
    "sample_tau_many",
    "sample_without_replacement",
    "solve_inner",
    "split_train_test",
    "subsampled_grad",
    "write_libsvm",
]
