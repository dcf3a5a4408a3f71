import gzip

import numpy as np
import pytest
from scipy import sparse

from drlearn import (
    Dataset,
    RngState,
    SyntheticSpec,
    load_csv,
    load_libsvm,
    make_synthetic,
    split_train_test,
    write_libsvm,
)


def test_dataset_validation():
    x = sparse.csr_matrix(np.eye(3))
    Dataset(x, [1.0, -1.0, 1.0])
    with pytest.raises(ValueError):
        Dataset(x, [1.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        Dataset(x, [1.0, -1.0])
    with pytest.raises(ValueError):
        Dataset(sparse.csr_matrix((0, 3)), [])


def test_split_sizes():
    data = make_synthetic(SyntheticSpec(n=100, d=2, seed=0))
    train, test = split_train_test(data, 0.25, RngState(1))
    assert test.n == 25 and train.n == 75


def test_split_smallest_legal():
    data = make_synthetic(SyntheticSpec(n=2, d=2, seed=0))
    train, test = split_train_test(data, 0.5, RngState(1))
    assert train.n == test.n == 1


def test_split_deterministic_and_disjoint():
    data = make_synthetic(SyntheticSpec(n=10, d=2, seed=0))
    t1, s1 = split_train_test(data, 0.25, RngState(7))
    t2, s2 = split_train_test(data, 0.25, RngState(7))
    np.testing.assert_array_equal(t1.features.toarray(), t2.features.toarray())
    np.testing.assert_array_equal(s1.labels, s2.labels)
    # disjoint cover: every original row appears exactly once across parts
    rows = np.vstack([t1.features.toarray(), s1.features.toarray()])
    orig = data.features.toarray()
    matched = sorted(tuple(r) for r in rows)
    assert matched == sorted(tuple(r) for r in orig)


def test_split_degenerate_rejected():
    data = make_synthetic(SyntheticSpec(n=3, d=2, seed=0))
    with pytest.raises(ValueError):
        split_train_test(data, 0.1, RngState(0))  # rounds to zero test rows
    with pytest.raises(ValueError):
        split_train_test(data, 0.99, RngState(0))
    with pytest.raises(ValueError):
        split_train_test(data, 1.5, RngState(0))


def test_synthetic_balanced_labels():
    data = make_synthetic(SyntheticSpec(n=4000, d=3, class_sep=1.0, seed=4))
    n_pos = int(np.sum(data.labels == 1.0))
    # binomial 3 sigma band around n/2
    assert abs(n_pos - 2000) < 3 * np.sqrt(4000 * 0.25)


def test_synthetic_deterministic():
    a = make_synthetic(SyntheticSpec(n=50, d=4, seed=5, outlier_fraction=0.1))
    b = make_synthetic(SyntheticSpec(n=50, d=4, seed=5, outlier_fraction=0.1))
    np.testing.assert_array_equal(a.features.toarray(), b.features.toarray())
    np.testing.assert_array_equal(a.labels, b.labels)


def test_synthetic_separable_when_wide():
    data = make_synthetic(SyntheticSpec(n=500, d=5, class_sep=10.0, seed=6))
    margins = data.labels * data.features.toarray()[:, 0]
    assert np.all(margins > 0)


def test_synthetic_outliers_create_loss_spread():
    spec = SyntheticSpec(n=200, d=3, class_sep=2.0, outlier_fraction=0.1, seed=7)
    data = make_synthetic(spec)
    # outliers sit far out on the first axis with labels opposing their side
    first = data.features.toarray()[:, 0]
    far = np.abs(first) > 3 * spec.class_sep
    assert 10 <= int(far.sum()) <= 30
    assert np.all(np.sign(first[far]) != data.labels[far])


def test_libsvm_parse_basic(tmp_path):
    path = tmp_path / "toy.libsvm"
    path.write_text("+1 3:0.5 7:1.0\n-1 1:2.0\n")
    data = load_libsvm(path)
    assert data.n == 2 and data.d == 7
    dense = data.features.toarray()
    assert dense[0, 2] == 0.5 and dense[0, 6] == 1.0
    assert dense[1, 0] == 2.0
    np.testing.assert_array_equal(data.labels, [1.0, -1.0])


def test_libsvm_zero_one_labels_mapped(tmp_path):
    path = tmp_path / "zo.libsvm"
    path.write_text("1 1:1.0\n0 1:2.0\n")
    data = load_libsvm(path)
    np.testing.assert_array_equal(data.labels, [1.0, -1.0])


def test_libsvm_errors(tmp_path):
    empty = tmp_path / "empty.libsvm"
    empty.write_text("")
    with pytest.raises(ValueError, match="no rows"):
        load_libsvm(empty)

    bad_label = tmp_path / "lbl.libsvm"
    bad_label.write_text("+1 1:1.0\nspam 1:1.0\n")
    with pytest.raises(ValueError, match=":2"):
        load_libsvm(bad_label)

    ternary = tmp_path / "ternary.libsvm"
    ternary.write_text("1 1:1.0\n2 1:1.0\n3 1:1.0\n")
    with pytest.raises(ValueError, match=r"\[1\.0, 2\.0, 3\.0\]"):
        load_libsvm(ternary)

    malformed = tmp_path / "mal.libsvm"
    malformed.write_text("+1 1:1.0\n-1 7:oops\n")
    with pytest.raises(ValueError, match=":2"):
        load_libsvm(malformed)

    decreasing = tmp_path / "dec.libsvm"
    decreasing.write_text("+1 5:1.0 2:1.0\n")
    with pytest.raises(ValueError, match="increasing"):
        load_libsvm(decreasing)


def test_libsvm_n_features_override(tmp_path):
    path = tmp_path / "wide.libsvm"
    path.write_text("+1 2:1.0\n-1 1:1.0\n")
    assert load_libsvm(path).d == 2
    assert load_libsvm(path, n_features=10).d == 10
    with pytest.raises(ValueError):
        load_libsvm(path, n_features=1)


def test_libsvm_round_trip(tmp_path):
    data = make_synthetic(SyntheticSpec(n=20, d=6, seed=8))
    path = tmp_path / "rt.libsvm"
    write_libsvm(data, path)
    back = load_libsvm(path, n_features=6)
    np.testing.assert_array_equal(back.labels, data.labels)
    np.testing.assert_array_equal(back.features.toarray(), data.features.toarray())


def test_libsvm_gzip_round_trip(tmp_path):
    data = make_synthetic(SyntheticSpec(n=10, d=4, seed=9))
    path = tmp_path / "rt.libsvm.gz"
    write_libsvm(data, path)
    with gzip.open(path, "rt") as fh:
        assert fh.readline().startswith(("+1", "-1"))
    back = load_libsvm(path, n_features=4)
    np.testing.assert_array_equal(back.features.toarray(), data.features.toarray())


def test_csv_basic(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text("1.5,0.0,1\n-2.0,3.0,-1\n")
    data = load_csv(path)
    assert data.n == 2 and data.d == 2
    np.testing.assert_array_equal(data.labels, [1.0, -1.0])
    dense = data.features.toarray()
    np.testing.assert_array_equal(dense, [[1.5, 0.0], [-2.0, 3.0]])
    assert data.features.nnz == 3  # exact zero dropped


def test_csv_header_autodetected(tmp_path):
    path = tmp_path / "hdr.csv"
    path.write_text("f1,f2,label\n1.0,2.0,1\n3.0,4.0,0\n")
    data = load_csv(path)
    assert data.n == 2
    np.testing.assert_array_equal(data.labels, [1.0, -1.0])


def test_csv_label_column_position(tmp_path):
    path = tmp_path / "first.csv"
    path.write_text("1,10.0,20.0\n-1,30.0,40.0\n")
    data = load_csv(path, label_column=0)
    np.testing.assert_array_equal(data.labels, [1.0, -1.0])
    np.testing.assert_array_equal(data.features.toarray(), [[10.0, 20.0], [30.0, 40.0]])


def test_csv_nan_rejected(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1.0,nan,1\n")
    with pytest.raises(ValueError, match="row 1, column 2"):
        load_csv(path)


def test_csv_ragged_row_rejected(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1.0,2.0,1\n3.0,-1\n")
    with pytest.raises(ValueError, match="row 2"):
        load_csv(path)
