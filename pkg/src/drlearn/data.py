"""Dataset container, train/test splitting and synthetic data generation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .rng import RngState


@dataclass
class Dataset:
    """Sparse feature matrix (N x d, CSR) with +/-1 labels.

    Immutable by convention once constructed; safe to share read-only.
    """

    features: sparse.csr_matrix
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.features = sparse.csr_matrix(self.features, dtype=np.float64)
        self.features.sort_indices()
        self.labels = np.asarray(self.labels, dtype=np.float64).ravel()
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise ValueError(f"dataset must have n >= 1 rows and d >= 1 columns, got {n} x {d}")
        if self.labels.shape[0] != n:
            raise ValueError(f"{self.labels.shape[0]} labels for {n} rows")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            bad = sorted(set(self.labels) - {-1.0, 1.0})
            raise ValueError(f"labels must be exactly -1 or +1, found {bad}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        """New dataset from a row selection (copying the slice)."""
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx], name=self.name)


def split_train_test(data: Dataset, test_fraction: float, rng: RngState) -> tuple[Dataset, Dataset]:
    """Random disjoint row partition; returns ``(train, test)``.

    The test part gets ``round(test_fraction * N)`` rows.  Splits that would
    leave either part empty are rejected.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if data.n < 2:
        raise ValueError("need at least 2 rows to split")
    n_test = int(round(test_fraction * data.n))
    if n_test == 0 or n_test == data.n:
        raise ValueError(
            f"degenerate split: test_fraction={test_fraction} with N={data.n} "
            f"gives test size {n_test}"
        )
    perm = rng.gen.permutation(data.n)
    return data.subset(perm[n_test:]), data.subset(perm[:n_test])


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for the two-Gaussian benchmark generator."""

    n: int
    d: int
    class_sep: float = 2.0
    outlier_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got n={self.n}, d={self.d}")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError(f"outlier_fraction must be in [0, 1), got {self.outlier_fraction}")


def make_synthetic(spec: SyntheticSpec) -> Dataset:
    """Two unit-covariance Gaussian clusters centred at +/- class_sep * e1.

    A fraction of rows can be relocated to a far cluster (5x the separation,
    deep inside the territory of their original class) with flipped labels.
    Those rows are expensive to fit, so worst-case-weighted and
    average-weighted training land on visibly different solutions.
    """
    gen = RngState(spec.seed).gen
    y = gen.choice((-1.0, 1.0), size=spec.n)
    x = gen.standard_normal((spec.n, spec.d))
    x[:, 0] += y * spec.class_sep
    n_out = int(np.floor(spec.outlier_fraction * spec.n))
    if n_out > 0:
        rows = gen.choice(spec.n, size=n_out, replace=False)
        x[rows, 0] += y[rows] * 4.0 * spec.class_sep
        y[rows] = -y[rows]
    return Dataset(sparse.csr_matrix(x), y, name=f"synthetic(n={spec.n},d={spec.d},seed={spec.seed})")
