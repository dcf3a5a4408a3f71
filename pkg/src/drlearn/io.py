"""Dataset ingestion: sparse LIBSVM text and dense CSV, both gzip-transparent.

Labels in {0, 1} are mapped to {-1, +1}; anything else non-binary is an
error listing the distinct values found.
"""

from __future__ import annotations

import csv
import gzip
import math

import numpy as np
from scipy import sparse

from .data import Dataset


def _open_text(path):
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"\x1f\x8b":
        return gzip.open(path, "rt")
    return open(path, "r")


def _map_labels(raw: list[float], where: str) -> np.ndarray:
    values = set(raw)
    if values <= {-1.0, 1.0}:
        return np.asarray(raw)
    if values <= {0.0, 1.0}:
        return np.asarray([-1.0 if v == 0.0 else 1.0 for v in raw])
    raise ValueError(f"{where}: labels must be binary (-1/+1 or 0/1), found {sorted(values)}")


def load_libsvm(path, n_features: int | None = None) -> Dataset:
    """Parse `<label> <index>:<value> ...` lines with 1-based ascending indices.

    d is max index + 1 after the 0-based shift, unless ``n_features``
    overrides it (it must cover the data).
    """
    labels: list[float] = []
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    max_col = -1
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad label {tokens[0]!r}") from None
            row = len(labels) - 1
            prev = 0
            for tok in tokens[1:]:
                idx_s, _, val_s = tok.partition(":")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad feature token {tok!r}") from None
                if idx < 1:
                    raise ValueError(f"{path}:{lineno}: feature index {idx} < 1")
                if idx <= prev:
                    raise ValueError(f"{path}:{lineno}: feature indices must be strictly increasing")
                prev = idx
                if not math.isfinite(val):
                    raise ValueError(f"{path}:{lineno}: non-finite value {val_s!r}")
                if val != 0.0:
                    rows.append(row)
                    cols.append(idx - 1)
                    vals.append(val)
                    max_col = max(max_col, idx - 1)
    if not labels:
        raise ValueError(f"{path}: no rows")
    d = max_col + 1 if n_features is None else int(n_features)
    if d < max_col + 1:
        raise ValueError(f"{path}: n_features={n_features} smaller than max index {max_col + 1}")
    if d < 1:
        d = 1
    y = _map_labels(labels, str(path))
    x = sparse.csr_matrix(
        (np.asarray(vals), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(len(labels), d),
    )
    return Dataset(x, y, name=str(path))


def write_libsvm(data: Dataset, path) -> None:
    """Inverse of load_libsvm; values are written with shortest round-trip repr."""
    opener = gzip.open if str(path).endswith(".gz") else open
    csr = data.features
    with opener(path, "wt") as fh:
        for i in range(data.n):
            start, end = csr.indptr[i], csr.indptr[i + 1]
            pairs = " ".join(
                f"{j + 1}:{float(v)!r}" for j, v in zip(csr.indices[start:end], csr.data[start:end])
            )
            fh.write(f"{int(data.labels[i]):+d} {pairs}".rstrip() + "\n")


def _looks_numeric(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv(path, label_column: int = -1) -> Dataset:
    """Dense CSV with one label column; a non-numeric first row is a header.

    Exact zeros are dropped from sparse storage; NaN cells are rejected with
    their row and column.
    """
    with _open_text(path) as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: no rows")
    if not all(_looks_numeric(c) for c in rows[0]):
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: no rows after header")
    width = len(rows[0])
    if width < 2:
        raise ValueError(f"{path}: need at least one feature column plus the label column")
    col = label_column if label_column >= 0 else width + label_column
    if not 0 <= col < width:
        raise ValueError(f"{path}: label_column {label_column} out of range for {width} columns")
    labels: list[float] = []
    features = np.empty((len(rows), width - 1))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        vals = []
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}: row {i + 1}, column {j + 1}: bad value {cell!r}") from None
            if math.isnan(v):
                raise ValueError(f"{path}: row {i + 1}, column {j + 1}: NaN")
            vals.append(v)
        labels.append(vals.pop(col))
        features[i] = vals
    y = _map_labels(labels, str(path))
    x = sparse.csr_matrix(features)
    x.eliminate_zeros()
    return Dataset(x, y, name=str(path))
