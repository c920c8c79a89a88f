import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthaudit.errors import EmptyColumn, NoSharedColumns, TooFewNumericColumns
from synthaudit.quality import (boundary_adherence, correlation_similarity, diagnostic_report,
                                gate, ks_complement, quality_report, table_structure,
                                tv_complement)
from synthaudit.table import Kind, Table

from conftest import gaussian_table


def test_ks_examples():
    assert ks_complement([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0
    assert ks_complement([0.0] * 5, [1.0] * 5) == 0.0
    assert ks_complement([0, 0, 1, 1], [0, 0, 0, 1]) == 0.75


def test_ks_empty():
    with pytest.raises(EmptyColumn):
        ks_complement([], [1.0])


def test_ks_matches_scipy(rng):
    from scipy.stats import ks_2samp
    for _ in range(20):
        a = rng.normal(size=rng.integers(5, 60))
        b = rng.normal(0.3, 1.2, size=rng.integers(5, 60))
        assert ks_complement(a, b) == pytest.approx(1 - ks_2samp(a, b).statistic, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=30),
       st.lists(st.integers(-5, 5), min_size=1, max_size=30))
def test_ks_symmetric_and_bounded(a, b):
    v = ks_complement(a, b)
    assert v == ks_complement(b, a)
    assert 0.0 <= v <= 1.0


def test_tv_examples():
    assert tv_complement([0, 1, 0, 1], [1, 0, 1, 0]) == 1.0
    assert tv_complement([0, 0], [1, 1], 2) == 0.0
    assert tv_complement([0, 0, 0, 1], [0, 1, 0, 1], 2) == 0.75


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=30),
       st.lists(st.integers(0, 3), min_size=1, max_size=30))
def test_tv_symmetric(a, b):
    assert tv_complement(a, b, 4) == pytest.approx(tv_complement(b, a, 4), abs=1e-15)


def _corr_table(x, y):
    return Table.from_columns({"x": x, "y": y})


def test_correlation_examples(rng):
    x = rng.normal(size=200)
    r = _corr_table(x, 2 * x + 1)
    s = _corr_table(x, -x)
    assert correlation_similarity(r, r).pairs == {"x|y": 1.0}
    assert correlation_similarity(r, s).average == pytest.approx(0.0, abs=1e-12)


def test_correlation_formula(rng):
    # build columns with exact sample correlations 0.6 and 0.2
    def with_rho(rho):
        a = rng.normal(size=500)
        b = rng.normal(size=500)
        a = (a - a.mean()) / a.std()
        b = b - a * (a @ b) / (a @ a)
        b = (b - b.mean()) / b.std()
        return _corr_table(a, rho * a + np.sqrt(1 - rho ** 2) * b)
    res = correlation_similarity(with_rho(0.6), with_rho(0.2))
    assert res.average == pytest.approx(0.8, abs=1e-12)


def test_correlation_skips_constant_and_needs_two():
    r = Table.from_columns({"a": [1.0, 2.0, 3.0], "b": [1.0, 1.0, 1.0], "c": [3.0, 1.0, 2.0]})
    res = correlation_similarity(r, r)
    assert "a|b" in res.skipped and "a|c" in res.pairs
    with pytest.raises(TooFewNumericColumns):
        correlation_similarity(Table.from_columns({"a": [1.0, 2.0]}),
                               Table.from_columns({"a": [1.0, 2.0]}))


def test_table_structure_examples():
    cols = {f"c{i}": [float(i)] for i in range(10)}
    real = Table.from_columns(cols)
    assert table_structure(real, real) == 1.0
    missing = Table.from_columns({k: v for k, v in cols.items() if k != "c9"})
    assert table_structure(real, missing) == 0.9
    kinds = {"c3": Kind.CATEGORICAL}
    changed = Table.from_columns(cols, kinds=kinds)
    assert table_structure(real, changed) == 0.9


def test_boundary_examples():
    real = Table.from_columns({"v": [0.0, 1.0]})
    synth = Table.from_columns({"v": [0.5, 0.5, 2.0, -1.0]})
    assert boundary_adherence(real, synth) == 0.5
    assert boundary_adherence(real, real) == 1.0
    r2 = Table.from_columns({"v": [0.0, 1.0], "c": ["a", "b"]})
    s2 = Table.from_columns({"v": [0.0, 1.0], "c": ["z", "z"]})
    assert boundary_adherence(r2, s2) == 0.5


def test_boundary_no_shared():
    with pytest.raises(NoSharedColumns):
        boundary_adherence(Table.from_columns({"a": [1.0]}), Table.from_columns({"b": [1.0]}))


def test_gate_examples():
    assert gate(0.9891, 1.0000).passed
    fail = gate(0.5707, 0.8124)
    assert not fail.passed and len(fail.reasons) == 2
    assert gate(0.65, 0.95).passed
    assert not gate(0.6499999, 0.95).passed


def test_copy_scores_one():
    t = gaussian_table(300, 4, seed=2)
    q = quality_report(t, t)
    d = diagnostic_report(t, t)
    assert q.overall == 1.0 and d.overall == 1.0
    assert q.overall == (q.shapes_average + q.correlation_average) / 2
    assert d.overall == (d.table_structure + d.boundary_adherence) / 2


def test_scores_invariant_to_row_shuffle(rng):
    real = gaussian_table(200, 3, seed=3)
    synth = gaussian_table(150, 3, seed=4, shift=0.5)
    perm = rng.permutation(synth.n_rows)
    shuffled = synth.take(perm)
    a, b = quality_report(real, synth), quality_report(real, shuffled)
    assert a.column_shapes == b.column_shapes
    assert a.correlation_average == pytest.approx(b.correlation_average, abs=1e-12)
    assert diagnostic_report(real, synth).to_dict() == diagnostic_report(real, shuffled).to_dict()


def test_scores_bounded(rng):
    real = gaussian_table(200, 3, seed=5)
    synth = gaussian_table(200, 3, seed=6, shift=3.0)
    q = quality_report(real, synth)
    assert all(0.0 <= v <= 1.0 for v in q.column_shapes.values())
    assert 0.0 <= q.overall <= 1.0
