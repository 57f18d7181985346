import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creditbench.config import REFERENCE_SCHEMAS
from creditbench.data import (
    ColumnSchema,
    TabularDataset,
    load_csv,
    save_csv,
    stratified_split,
    stratified_subset,
)
from creditbench.simdata import simulate_dataset


TOY_SCHEMA = [
    ColumnSchema("x", "numeric"),
    ColumnSchema("grade", "categorical"),
    ColumnSchema("status", "target", good_label="good", default_label="bad"),
]


def write_toy(tmp_path, rows):
    path = tmp_path / "toy.csv"
    path.write_text("x,grade,status\n" + "\n".join(rows) + "\n")
    return path


def test_load_csv_missing_cell(tmp_path):
    path = write_toy(tmp_path, ["1.5,A,good", "NA,B,bad", "2.5,A,good"])
    data = load_csv(path, TOY_SCHEMA)
    assert data.n_rows == 3
    assert data.n_missing() == 1
    assert data.missing_mask("x").tolist() == [False, True, False]
    assert data.target.tolist() == [0, 1, 0]


def test_load_csv_third_target_label(tmp_path):
    path = write_toy(tmp_path, ["1.5,A,good", "2.0,B,maybe"])
    with pytest.raises(ValueError, match="'maybe'"):
        load_csv(path, TOY_SCHEMA)


def test_load_csv_unparseable_row_reports_line(tmp_path):
    path = write_toy(tmp_path, ["1.5,A,good", "zzz,B,bad"])
    with pytest.raises(ValueError, match="row 3"):
        load_csv(path, TOY_SCHEMA)


def test_load_csv_unknown_column(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text("x,mystery,status\n1.0,A,good\n")
    with pytest.raises(ValueError, match="mystery"):
        load_csv(path, TOY_SCHEMA)


def test_load_csv_ragged_row(tmp_path):
    path = write_toy(tmp_path, ["1.5,A,good", "2.5,B"])
    with pytest.raises(ValueError, match="row 3"):
        load_csv(path, TOY_SCHEMA)


def test_simulated_gc_shape(tmp_path):
    gc = simulate_dataset("GC", 20240801)
    path = tmp_path / "gc.csv"
    save_csv(gc, path)
    loaded = load_csv(path, REFERENCE_SCHEMAS["german_credit"])
    assert loaded.n_rows == 1000
    assert len(loaded.predictor_names) == 20
    assert loaded.default_rate() == pytest.approx(0.30)


def test_save_load_roundtrip_value_identical(tmp_path):
    path = write_toy(tmp_path, ["1.5,A,good", "NA,B,bad", "2.25,,good"])
    data = load_csv(path, TOY_SCHEMA)
    assert data.missing_mask("grade").tolist() == [False, False, True]
    out = tmp_path / "copy.csv"
    save_csv(data, out)
    again = load_csv(out, TOY_SCHEMA)
    assert again.target.tolist() == data.target.tolist()
    for name in data.predictor_names:
        a, b = data.columns[name], again.columns[name]
        if a.dtype == object:
            assert a.tolist() == b.tolist()
        else:
            assert np.array_equal(a, b, equal_nan=True)


def test_schema_validation():
    with pytest.raises(ValueError, match="target"):
        TabularDataset(
            schema=(ColumnSchema("x", "numeric"),),
            columns={"x": np.array([1.0])},
            target=np.array([0], dtype=np.int8),
        )
    from creditbench.data import validate_schema

    with pytest.raises(ValueError, match="unique"):
        validate_schema([ColumnSchema("x", "numeric"), ColumnSchema("x", "numeric"),
                         ColumnSchema("t", "target", good_label="g", default_label="b")])


# ---------------------------------------------------------------------------
# stratified subsetting


def test_subset_tc_counts():
    tc = simulate_dataset("TC", 3)
    sub = stratified_subset(tc, 0.10, seed=5)
    assert sub.n_rows == 3001
    assert abs(sub.default_rate() - tc.default_rate()) <= 0.01


def test_subset_gmsc_counts():
    gm = simulate_dataset("GMSC", 4)
    sub = stratified_subset(gm, 0.05, seed=5)
    assert sub.n_rows == 7501
    assert abs(sub.default_rate() - gm.default_rate()) <= 0.01


def test_subset_fraction_one_is_identity():
    gc = simulate_dataset("GC", 1)
    sub = stratified_subset(gc, 1.0, seed=9)
    assert sub.n_rows == gc.n_rows
    assert np.array_equal(sub.target, gc.target)


def test_subset_determinism():
    gc = simulate_dataset("GC", 1)
    a = stratified_subset(gc, 0.2, seed=3)
    b = stratified_subset(gc, 0.2, seed=3)
    assert np.array_equal(a.columns["duration"], b.columns["duration"])


# ---------------------------------------------------------------------------
# stratified splitting


def test_split_gc_counts():
    gc = simulate_dataset("GC", 20240801)
    split = stratified_split(gc, 0.75, seed=42)
    train = gc.take(split.train)
    assert train.class_counts() == (525, 225)


def test_split_gmsc_subset_counts():
    gm = simulate_dataset("GMSC", 4)
    sub = stratified_subset(gm, 0.05, seed=5)
    train = sub.take(stratified_split(sub, 0.75, seed=1).train)
    assert train.class_counts() == (5250, 377)


def test_split_toy_balanced():
    data = TabularDataset(
        schema=(ColumnSchema("x", "numeric"),
                ColumnSchema("t", "target", good_label="g", default_label="b")),
        columns={"x": np.array([1.0, 2.0, 3.0, 4.0])},
        target=np.array([0, 0, 1, 1], dtype=np.int8),
    )
    split = stratified_split(data, 0.5, seed=0)
    train = data.take(split.train)
    assert train.class_counts() == (1, 1)


def test_split_partition_and_determinism():
    gc = simulate_dataset("GC", 2)
    s1 = stratified_split(gc, 0.75, seed=7)
    s2 = stratified_split(gc, 0.75, seed=7)
    assert np.array_equal(s1.train, s2.train) and np.array_equal(s1.test, s2.test)
    combined = np.sort(np.concatenate([s1.train, s1.test]))
    assert np.array_equal(combined, np.arange(gc.n_rows))


def test_split_small_class_rejected():
    data = TabularDataset(
        schema=(ColumnSchema("x", "numeric"),
                ColumnSchema("t", "target", good_label="g", default_label="b")),
        columns={"x": np.arange(5.0)},
        target=np.array([0, 0, 0, 0, 1], dtype=np.int8),
    )
    with pytest.raises(ValueError, match="at least 2"):
        stratified_split(data, 0.5, seed=0)


@given(
    n_good=st.integers(2, 400),
    n_bad=st.integers(2, 400),
    fraction=st.floats(0.1, 0.9),
    seed=st.integers(0, 2**31 - 1),
)
@settings(max_examples=60, deadline=None)
def test_split_class_rate_property(n_good, n_bad, fraction, seed):
    n = n_good + n_bad
    data = TabularDataset(
        schema=(ColumnSchema("x", "numeric"),
                ColumnSchema("t", "target", good_label="g", default_label="b")),
        columns={"x": np.arange(float(n))},
        target=np.array([0] * n_good + [1] * n_bad, dtype=np.int8),
    )
    split = stratified_split(data, fraction, seed=seed)
    assert np.array_equal(
        np.sort(np.concatenate([split.train, split.test])), np.arange(n)
    )
    train = data.take(split.train)
    t = train.n_rows
    for label, full in ((0, n_good / n), (1, n_bad / n)):
        rate = float(np.mean(train.target == label))
        assert abs(rate - full) <= 1.0 / t + 1e-12
