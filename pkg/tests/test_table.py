import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthaudit.errors import NoLabelColumn, SchemaMismatch, UnknownColumn
from synthaudit.table import (ColumnSchema, Kind, LabelDistribution, Role, Table, column_view,
                              label_distribution, vertical_concat)


def test_column_view_numeric(small_table):
    assert column_view(small_table, "dur").tolist() == [1.0, 2.0, 3.0]


def test_column_view_unknown(small_table):
    with pytest.raises(UnknownColumn):
        column_view(small_table, "nonexistent")


def test_column_view_codes_pass_through():
    t = Table.from_columns({"label": ["BENIGN", "DDoS", "BENIGN"]}, label="label")
    assert t.dictionary("label") == ("BENIGN", "DDoS")
    assert column_view(t, "label").tolist() == [0, 1, 0]


def test_table_is_read_only(small_table):
    with pytest.raises(ValueError):
        small_table.numeric[0, 0] = 5.0


def test_duplicate_names_rejected():
    schema = [ColumnSchema("a", Kind.NUMERIC), ColumnSchema("a", Kind.NUMERIC)]
    with pytest.raises(SchemaMismatch):
        Table(schema, np.zeros((1, 2)), np.zeros((1, 0)), {})


def test_two_labels_rejected():
    schema = [ColumnSchema("a", Kind.CATEGORICAL, Role.LABEL),
              ColumnSchema("b", Kind.CATEGORICAL, Role.LABEL)]
    with pytest.raises(SchemaMismatch):
        Table(schema, np.zeros((1, 0)), np.zeros((1, 2)), {"a": ("x",), "b": ("y",)})


def test_invalid_code_rejected():
    schema = [ColumnSchema("a", Kind.CATEGORICAL)]
    with pytest.raises(SchemaMismatch):
        Table(schema, np.zeros((2, 0)), np.array([[0], [3]]), {"a": ("x", "y")})


def test_non_finite_rejected():
    schema = [ColumnSchema("a", Kind.NUMERIC)]
    with pytest.raises(ValueError):
        Table(schema, np.array([[np.nan]]), np.zeros((1, 0)), {})


@pytest.mark.parametrize("labels,expected", [
    (["A", "A", "B", "B"], {"A": 0.5, "B": 0.5}),
    (["A", "A", "A", "B"], {"A": 0.75, "B": 0.25}),
])
def test_label_distribution(labels, expected):
    t = Table.from_columns({"y": labels}, label="y")
    assert label_distribution(t).as_dict() == expected


def test_label_distribution_keeps_zero_count_category():
    t = Table.from_arrays(np.zeros((3, 1)), ["x"], ["A", "A", "A"], categories=["A", "B"])
    assert label_distribution(t).as_dict() == {"A": 1.0, "B": 0.0}


def test_label_distribution_needs_label():
    t = Table.from_columns({"x": [1.0, 2.0]})
    with pytest.raises(NoLabelColumn):
        label_distribution(t)


def test_label_distribution_validates_sum():
    with pytest.raises(ValueError):
        LabelDistribution(("A", "B"), np.array([0.5, 0.6]))


def test_vertical_concat_counts():
    a = Table.from_columns({"x": [1.0, 2.0], "y": ["p", "q"]}, label="y")
    b = Table.from_columns({"x": [3.0, 4.0, 5.0], "y": ["q", "r", "p"]}, label="y")
    c = vertical_concat(a, b)
    assert c.n_rows == 5
    assert c.column("x").tolist() == [1.0, 2.0, 3.0, 4.0, 5.0]
    assert c.decoded("y") == ["p", "q", "q", "r", "p"]


def test_vertical_concat_kind_mismatch():
    a = Table.from_columns({"proto": [1.0, 2.0]})
    b = Table.from_columns({"proto": ["tcp", "udp"]})
    with pytest.raises(SchemaMismatch) as exc:
        vertical_concat(a, b)
    assert exc.value.column == "proto"


def test_vertical_concat_with_empty(small_table):
    empty = small_table.take(np.array([], dtype=np.int64))
    assert vertical_concat(small_table, empty).equals(small_table)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from("ABC"), min_size=1, max_size=30),
       st.lists(st.sampled_from("ABCD"), min_size=1, max_size=30))
def test_concat_distribution_is_weighted_mean(la, lb):
    a = Table.from_columns({"y": la}, label="y")
    b = Table.from_columns({"y": lb}, label="y")
    c = label_distribution(vertical_concat(a, b)).as_dict()
    da, db = label_distribution(a).as_dict(), label_distribution(b).as_dict()
    for k, v in c.items():
        want = (da.get(k, 0.0) * len(la) + db.get(k, 0.0) * len(lb)) / (len(la) + len(lb))
        assert v == pytest.approx(want, abs=1e-12)
    assert sum(c.values()) == pytest.approx(1.0, abs=1e-9)
