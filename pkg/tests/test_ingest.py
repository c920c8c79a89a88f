import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthaudit.errors import (BadK, EmptyFile, NoNumericColumns, ParseError, RaggedRow,
                               UnknownColumn)
from synthaudit.ingest import (SplitSpec, apply_scaler, dedupe, fit_robust_scaler, read_csv,
                               read_schema_hint, stratified_kfold, stratified_kfold_indices,
                               stratified_split, write_csv, write_schema_hint)
from synthaudit.table import Kind, Role, Table


def _write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_read_csv_infers_kinds(tmp_path):
    t = read_csv(_write(tmp_path, "a,b\n1,x\n2,y\n"))
    assert t.n_rows == 2
    assert t.column_schema("a").kind is Kind.NUMERIC
    assert t.column_schema("b").kind is Kind.CATEGORICAL


def test_read_csv_overflow_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        read_csv(_write(tmp_path, "a\n1\n1e309\n"))


def test_read_csv_mixed_column_is_categorical(tmp_path):
    t = read_csv(_write(tmp_path, "a\n1\n2\nthree\n"))
    assert t.column_schema("a").kind is Kind.CATEGORICAL
    assert t.dictionary("a") == ("1", "2", "three")


def test_read_csv_errors(tmp_path):
    with pytest.raises(EmptyFile):
        read_csv(_write(tmp_path, ""))
    with pytest.raises(RaggedRow):
        read_csv(_write(tmp_path, "a,b\n1,2\n3\n"))
    with pytest.raises(ParseError):
        read_csv(_write(tmp_path, "a,b\n1,\n"))
    with pytest.raises(UnknownColumn):
        read_csv(_write(tmp_path, "a\n1\n"), label="nope")


def test_read_csv_label_and_quoting(tmp_path):
    t = read_csv(_write(tmp_path, 'x,"lab"\n1,"a,b"\n2,c\n'), label="lab")
    assert t.label_name == "lab"
    assert t.decoded("lab") == ["a,b", "c"]


def test_schema_hint_roundtrip(tmp_path, small_table):
    p = tmp_path / "schema.txt"
    write_schema_hint(small_table.schema, p)
    assert tuple(read_schema_hint(p)) == small_table.schema


def test_schema_hint_forces_kind(tmp_path):
    hint = tmp_path / "h.txt"
    hint.write_text("code,categorical,feature\ny,categorical,label\n")
    t = read_csv(_write(tmp_path, "code,y\n1,a\n2,b\n"), read_schema_hint(hint))
    assert t.column_schema("code").kind is Kind.CATEGORICAL
    assert t.column_schema("y").role is Role.LABEL


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e12, 1e12, allow_nan=False),
                          st.sampled_from(["tcp", "udp", "a b", "x,y", 'q"t']),
                          st.sampled_from(["A", "B"])), min_size=1, max_size=20))
def test_csv_roundtrip(tmp_path_factory, rows):
    t = Table.from_columns({"v": [r[0] for r in rows], "proto": [r[1] for r in rows],
                            "y": [r[2] for r in rows]}, label="y",
                           kinds={"v": Kind.NUMERIC})
    p = tmp_path_factory.mktemp("rt") / "t.csv"
    write_csv(t, p)
    back = read_csv(p, list(t.schema))
    assert back.schema == t.schema
    assert back.dictionaries == t.dictionaries
    assert np.array_equal(back.codes, t.codes)
    np.testing.assert_allclose(back.numeric, t.numeric, rtol=1e-12, atol=0)


def test_dedupe_examples():
    t = Table.from_columns({"a": [1.0, 1.0, 2.0], "b": ["x", "x", "y"]})
    d = dedupe(t)
    assert d.column("a").tolist() == [1.0, 2.0]
    distinct = Table.from_columns({"a": [3.0, 1.0, 2.0]})
    assert dedupe(distinct).equals(distinct)
    four = Table.from_columns({"a": [5.0] * 4, "b": ["z"] * 4})
    assert dedupe(four).n_rows == 1


def test_dedupe_keeps_order_and_is_idempotent():
    t = Table.from_columns({"a": [3.0, 1.0, 3.0, 2.0, 1.0]})
    d = dedupe(t)
    assert d.column("a").tolist() == [3.0, 1.0, 2.0]
    assert dedupe(d).equals(d)


@pytest.mark.parametrize("col,median,iqr", [
    ([1, 2, 3, 4, 5], 3.0, 2.0),
    ([5, 5, 5], 5.0, 0.0),
    ([1, 2], 1.5, 0.5),
])
def test_robust_scaler_type7(col, median, iqr):
    p = fit_robust_scaler(Table.from_columns({"c": [float(v) for v in col]}))
    assert p.median[0] == median
    assert p.iqr[0] == iqr
    assert bool(p.constant[0]) == (iqr == 0.0)


def test_robust_scaler_matches_numpy_type7(rng):
    x = rng.normal(size=37)
    p = fit_robust_scaler(Table.from_columns({"c": x}))
    q1, q3 = np.percentile(x, [25, 75])
    assert p.iqr[0] == pytest.approx(q3 - q1, abs=1e-12)


def test_scaler_needs_numeric():
    with pytest.raises(NoNumericColumns):
        fit_robust_scaler(Table.from_columns({"c": ["a", "b"]}))


def test_apply_scaler_examples():
    p = fit_robust_scaler(Table.from_columns({"c": [1.0, 2.0, 3.0, 4.0, 5.0]}))
    out = apply_scaler(Table.from_columns({"c": [3.0, 5.0]}), p)
    assert out.column("c").tolist() == [0.0, 1.0]
    pc = fit_robust_scaler(Table.from_columns({"c": [5.0, 5.0, 5.0]}))
    assert apply_scaler(Table.from_columns({"c": [5.0]}), pc).column("c").tolist() == [0.0]


def test_scaled_train_has_zero_median(rng):
    t = Table.from_arrays(rng.lognormal(size=(101, 3)), ["a", "b", "c"])
    out = apply_scaler(t, fit_robust_scaler(t))
    assert np.all(np.abs(np.median(out.numeric, axis=0)) < 1e-9)


def test_stratified_split_example():
    labels = ["a"] * 80 + ["b"] * 20
    t = Table.from_arrays(np.arange(100.0)[:, None], ["x"], labels)
    train, test = stratified_split(t, SplitSpec("label"))
    assert test.n_rows == 20 and train.n_rows == 80
    assert test.decoded("label").count("a") == 16
    assert test.decoded("label").count("b") == 4
    assert sorted(train.column("x").tolist() + test.column("x").tolist()) == list(range(100))


def test_stratified_split_singleton_class_goes_to_train():
    t = Table.from_arrays(np.arange(11.0)[:, None], ["x"], ["a"] * 10 + ["b"])
    train, test = stratified_split(t, SplitSpec("label"))
    assert "b" in train.decoded("label") and "b" not in test.decoded("label")


def test_stratified_split_determinism_and_unknown():
    t = Table.from_arrays(np.arange(50.0)[:, None], ["x"], ["a", "b"] * 25)
    a = stratified_split(t, SplitSpec("label", seed=3))
    b = stratified_split(t, SplitSpec("label", seed=3))
    assert a[1].equals(b[1])
    with pytest.raises(UnknownColumn):
        stratified_split(t, SplitSpec("nope"))


def test_stratified_split_rounds_half_to_even():
    # 5 * 0.5 = 2.5 -> 2 ; 7 * 0.5 = 3.5 -> 4
    t = Table.from_arrays(np.arange(12.0)[:, None], ["x"], ["a"] * 5 + ["b"] * 7)
    _, test = stratified_split(t, SplitSpec("label", test_fraction=0.5))
    assert test.decoded("label").count("a") == 2
    assert test.decoded("label").count("b") == 4


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=20, max_size=200), st.integers(0, 1000))
def test_stratified_split_per_class_proportion(codes, seed):
    t = Table.from_arrays(np.zeros((len(codes), 1)), ["x"], [str(c) for c in codes])
    _, test = stratified_split(t, SplitSpec("label", seed=seed))
    for c in set(codes):
        n_c = codes.count(c)
        if n_c >= 5:
            got = test.decoded("label").count(str(c)) / n_c
            assert abs(got - 0.2) <= 1.0 / n_c


def test_kfold_even_division():
    strata = np.array([0, 1] * 5)
    folds = stratified_kfold_indices(strata, 5, 0)
    for _, val in folds:
        assert sorted(strata[val].tolist()) == [0, 1]


def test_kfold_small_class_round_robin():
    strata = np.array([0] * 30 + [1] * 3)
    folds = stratified_kfold_indices(strata, 10, 0)
    assert sum(1 for _, val in folds if np.any(strata[val] == 1)) == 3


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=10, max_size=120), st.integers(2, 10),
       st.integers(0, 99))
def test_kfold_partitions(codes, k, seed):
    strata = np.array(codes)
    folds = stratified_kfold_indices(strata, k, seed)
    allv = np.concatenate([v for _, v in folds])
    assert sorted(allv.tolist()) == list(range(len(codes)))
    for tr, va in folds:
        assert set(tr.tolist()).isdisjoint(va.tolist())
        assert len(tr) + len(va) == len(codes)
    for c in set(codes):
        sizes = [int(np.sum(strata[v] == c)) for _, v in folds]
        assert max(sizes) - min(sizes) <= 1


def test_kfold_bad_k():
    t = Table.from_arrays(np.zeros((5, 1)), ["x"], ["a"] * 5)
    with pytest.raises(BadK):
        stratified_kfold(t, 1)
    with pytest.raises(BadK):
        stratified_kfold(t, 6)
