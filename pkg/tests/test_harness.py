import numpy as np
import pytest

from synthaudit.errors import DegenerateInput, SchemaMismatch, TooFewReferenceRows
from synthaudit.generators import fit_gmm_sampler, sample
from synthaudit.harness import (distinguishability, nndr, nndr_ratios, privacy_decision,
                                privacy_report, utility_suite)
from synthaudit.learners import LOGISTIC, ClassifierSpec
from synthaudit.table import Kind, Table

from conftest import gaussian_table
from oracles import brute_nndr

SMALL_FOREST = ClassifierSpec("forest", {"n_trees": 20})


def _line(values):
    return Table.from_columns({"v": [float(v) for v in values]})


def test_nndr_hand_examples():
    ref = _line([0.0, 10.0])
    assert nndr(_line([1.0]), ref) == pytest.approx(1 / 9, abs=1e-15)
    assert nndr(_line([5.0]), ref) == 1.0
    assert nndr(_line([0.0, 10.0, 0.0]), ref) == 0.0


def test_nndr_too_few_rows():
    with pytest.raises(TooFewReferenceRows):
        nndr(_line([1.0]), _line([0.0]))


@pytest.mark.parametrize("seed", range(3))
def test_nndr_matches_brute_force(seed):
    r = np.random.default_rng(seed)
    n = 60
    ref = Table.from_columns({"a": r.normal(size=n), "b": r.exponential(size=n),
                              "c": r.choice(["x", "y", "z"], size=n).tolist(),
                              "label": r.choice(["A", "B"], size=n).tolist()}, label="label")
    syn = Table.from_columns({"a": r.normal(size=40), "b": r.exponential(size=40),
                              "c": r.choice(["x", "y", "w"], size=40).tolist(),
                              "label": r.choice(["A", "B"], size=40).tolist()}, label="label")
    assert nndr(syn, ref) == brute_nndr(syn, ref)
    assert nndr(ref, ref) == brute_nndr(ref, ref, leave_one_out=True)


def test_nndr_bounded(rng):
    ref = Table.from_arrays(rng.uniform(size=(100, 3)), ["a", "b", "c"])
    syn = Table.from_arrays(rng.uniform(size=(50, 3)), ["a", "b", "c"])
    r = nndr_ratios(syn, ref)
    assert np.all((r >= 0) & (r <= 1))


def test_nndr_requires_features():
    with pytest.raises(SchemaMismatch):
        nndr(Table.from_columns({"w": [1.0]}), _line([0.0, 1.0]))


def test_privacy_leakage_flagged(rng):
    train = Table.from_arrays(rng.normal(size=(200, 3)), ["a", "b", "c"])
    test = Table.from_arrays(rng.normal(size=(200, 3)), ["a", "b", "c"])
    res = privacy_report(train.take(np.arange(100)), train, test)
    assert res.train_nndr == 0.0 and res.test_nndr > 0.04
    assert res.overfit_flag


def test_privacy_independent_unflagged(rng):
    cols = ["a", "b", "c"]
    train, test, syn = (Table.from_arrays(rng.normal(size=(500, 3)), cols) for _ in range(3))
    res = privacy_report(syn, train, test)
    assert not res.overfit_flag
    assert 0.0 <= res.train_nndr <= 1.0 and 0.0 <= res.test_nndr <= 1.0


def test_privacy_decision_profiles():
    assert not privacy_decision(0.9634, 0.9731).overfit_flag
    assert privacy_decision(0.0, 0.5).overfit_flag
    assert not privacy_decision(0.50, 0.54).overfit_flag


def test_distinguishability_copy_is_chance():
    t = gaussian_table(300, 4, seed=1)
    for seed in range(3):
        res = distinguishability(t, t.take(np.arange(t.n_rows)), SMALL_FOREST, seed=seed)
        assert 0.45 <= res.roc_auc <= 0.55


def test_distinguishability_separable():
    t = gaussian_table(300, 4, seed=1)
    shifted = Table.from_arrays(t.numeric + 100.0, t.feature_names(Kind.NUMERIC),
                                t.decoded("label"))
    res = distinguishability(t, shifted, SMALL_FOREST, seed=0)
    assert res.roc_auc >= 0.99 and res.f1 >= 0.99


def test_distinguishability_balances_and_is_deterministic():
    real = gaussian_table(300, 3, seed=2)
    synth = gaussian_table(120, 3, seed=3, shift=0.3)
    a = distinguishability(real, synth, LOGISTIC, seed=5)
    b = distinguishability(real, synth, LOGISTIC, seed=5)
    assert a == b
    assert a.n_real == a.n_synth == 120


def test_distinguishability_empty_synth():
    t = gaussian_table(50, 2, seed=1)
    with pytest.raises(DegenerateInput):
        distinguishability(t, t.take(np.arange(0)))


def test_utility_copy_matches_train_side():
    train = gaussian_table(300, 3, seed=4, shift=1.5)
    test = gaussian_table(100, 3, seed=5, shift=1.5)
    trtr, trts, tstr = utility_suite(train, test, train, SMALL_FOREST)
    assert (trtr.protocol, trts.protocol, tstr.protocol) == ("TRTR", "TRTS", "TSTR")
    assert trts.test_precision == trtr.train_precision
    assert trts.test_recall == trtr.train_recall


def test_utility_shuffled_labels_near_chance(rng):
    train = gaussian_table(600, 3, seed=6, shift=3.0)
    test = gaussian_table(400, 3, seed=7, shift=3.0)
    labels = np.array(train.decoded("label"))[rng.permutation(train.n_rows)]
    shuffled = Table.from_arrays(train.numeric, train.feature_names(Kind.NUMERIC), labels,
                                 categories=["A", "B"])
    tstr = utility_suite(train, test, shuffled, SMALL_FOREST)[2]
    assert abs(tstr.test_recall - 0.5) <= 0.1


def test_utility_gmm_tstr_close_to_trtr():
    train = gaussian_table(1000, 3, seed=8, shift=6.0)
    test = gaussian_table(500, 3, seed=9, shift=6.0)
    synth = sample(fit_gmm_sampler(train, seed=1), 1000, seed=2)
    trtr, _, tstr = utility_suite(train, test, synth, SMALL_FOREST)
    assert abs(tstr.test_recall - trtr.test_recall) <= 0.05


def test_utility_reports_missing_classes():
    train = gaussian_table(200, 2, seed=1, classes=("A", "B", "C"))
    test = gaussian_table(100, 2, seed=2, classes=("A", "B", "C"))
    only_ab = train.take(np.flatnonzero(np.array(train.decoded("label")) != "C"))
    tstr = utility_suite(train, test, only_ab, SMALL_FOREST)[2]
    assert tstr.missing_classes == ["C"]
