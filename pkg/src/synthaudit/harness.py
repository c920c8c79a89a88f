"""Evaluation protocols: real-vs-synthetic distinguishability, TRTR/TRTS/TSTR utility
and nearest-neighbour distance ratio privacy scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seed, make_rng
from .errors import DegenerateInput, SchemaMismatch, TooFewReferenceRows
from .ingest import RobustScalerParams, fit_robust_scaler, stratified_split_indices
from .learners import FOREST, ClassifierSpec, evaluate
from .learners.encoding import remap_codes
from .table import ColumnSchema, Kind, Role, Table, check_same_schema, unify_dictionaries

PRIVACY_BAND = 0.04
REAL, SYNTHETIC = "real", "synthetic"


# --------------------------------------------------------------------------
# distinguishability

@dataclass
class DistinguishabilityResult:
    classifier: str
    f1: float
    roc_auc: float | None
    n_real: int
    n_synth: int
    seed: int
    grouped_duplicates: int = 0

    def to_dict(self):
        return {"classifier": self.classifier, "f1_synthetic": self.f1,
                "roc_auc": self.roc_auc, "n_real": self.n_real, "n_synth": self.n_synth,
                "seed": self.seed, "grouped_duplicate_rows": self.grouped_duplicates}


def _feature_schema_check(real: Table, synth: Table):
    a = [c for c in real.schema if c.role is Role.FEATURE]
    b = [c for c in synth.schema if c.role is Role.FEATURE]
    if [(c.name, c.kind) for c in a] != [(c.name, c.kind) for c in b]:
        names_b = {c.name: c.kind for c in b}
        for c in a:
            if names_b.get(c.name) is not c.kind:
                raise SchemaMismatch(c.name, "feature differs between real and synthetic")
        extra = next(c.name for c in b if c.name not in {x.name for x in a})
        raise SchemaMismatch(extra, "feature present only in the synthetic table")


def _row_groups(t: Table):
    """Integer id per row; identical feature rows share an id."""
    rec = np.hstack([t.numeric + 0.0, t.codes.astype(float)])
    if rec.shape[1] == 0:
        return np.zeros(t.n_rows, dtype=np.int64)
    rec = np.ascontiguousarray(rec)
    void = rec.view(np.dtype((np.void, rec.dtype.itemsize * rec.shape[1]))).ravel()
    _, inv = np.unique(void, return_inverse=True)
    return inv.ravel()


def _grouped_split(groups, strata, test_fraction, seed):
    """Stratified split that never separates rows sharing a group id.

    Falls back to a plain stratified split when every group is a singleton.
    """
    if np.unique(groups).size == groups.size:
        return stratified_split_indices(strata, test_fraction, seed)
    rng = make_rng(seed, "grouped-split")
    uniq = rng.permutation(np.unique(groups))
    sizes = np.bincount(groups)
    target = round(groups.size * test_fraction)
    chosen, total = [], 0
    for g in uniq:
        if total >= target:
            break
        chosen.append(g)
        total += sizes[g]
    in_test = np.isin(groups, np.array(chosen, dtype=np.int64))
    return np.flatnonzero(~in_test), np.flatnonzero(in_test)


def distinguishability(real: Table, synth: Table, classifier_spec: ClassifierSpec = FOREST,
                       seed: int = 0, test_fraction: float = 0.2) -> DistinguishabilityResult:
    """Train a real-vs-synthetic classifier and score it on a held-out 20%.

    Labels are dropped; real rows become class ``real`` (code 1) and
    synthetic rows class ``synthetic`` (code 0). The larger side is subsampled to the smaller one.
    Rows with identical features are kept on the same side of the split so a
    copied record cannot leak its twin's label into training.
    """
    real, synth = real.without_label(), synth.without_label()
    if synth.n_rows == 0 or real.n_rows == 0:
        raise DegenerateInput("distinguishability needs rows on both sides")
    _feature_schema_check(real, synth)
    rng = make_rng(seed, "distinguish-balance")
    n = min(real.n_rows, synth.n_rows)
    if real.n_rows > n:
        real = real.take(np.sort(rng.choice(real.n_rows, n, replace=False)))
    if synth.n_rows > n:
        synth = synth.take(np.sort(rng.choice(synth.n_rows, n, replace=False)))
    real, synth = unify_dictionaries(real, synth)
    schema = list(real.schema) + [ColumnSchema("__source__", Kind.CATEGORICAL, Role.LABEL)]
    # synthetic rows are class 0, real rows class 1
    dicts = {**real.dictionaries, "__source__": (SYNTHETIC, REAL)}
    source = np.concatenate([np.ones(n, dtype=np.int64), np.zeros(n, dtype=np.int64)])
    both = Table(schema, np.vstack([real.numeric, synth.numeric]),
                 np.hstack([np.vstack([real.codes, synth.codes]), source[:, None]]), dicts)
    groups = _row_groups(both.without_label())
    split_seed = derive_seed(seed, "distinguish-split")
    tr, te = _grouped_split(groups, source, test_fraction, split_seed)
    model = classifier_spec.build(derive_seed(seed, "distinguish-model")).fit(both.take(tr))
    m = evaluate(model, both.take(te))
    syn = m.per_class.get(SYNTHETIC, {})
    shared = int(groups.size - np.unique(groups).size)
    return DistinguishabilityResult(classifier_spec.kind, syn.get("f1", 0.0),
                                    syn.get("roc_auc"), n, n, seed, shared)


# --------------------------------------------------------------------------
# utility

@dataclass
class UtilityResult:
    protocol: str
    train_precision: float
    train_recall: float
    test_precision: float
    test_recall: float
    missing_classes: list = field(default_factory=list)

    def to_dict(self):
        return {"protocol": self.protocol,
                "train_precision": self.train_precision, "train_recall": self.train_recall,
                "test_precision": self.test_precision, "test_recall": self.test_recall,
                "missing_classes": self.missing_classes}


def _missing(train: Table, test: Table):
    seen = set(train.decoded(train.require_label()))
    return sorted(set(test.decoded(test.require_label())) - seen)


def utility_suite(real_train: Table, real_test: Table, synth: Table,
                  classifier_spec: ClassifierSpec = FOREST, seed: int = 0):
    """TRTR, TRTS and TSTR macro precision/recall, in that order.

    The model trained on ``real_train`` is shared by TRTR and TRTS.
    """
    check_same_schema(real_train, real_test)
    check_same_schema(real_train, synth)
    model_seed = derive_seed(seed, "utility-model")
    real_model = classifier_spec.build(model_seed).fit(real_train)
    synth_model = classifier_spec.build(model_seed).fit(synth)
    on_real_train = evaluate(real_model, real_train)
    on_synth_train = evaluate(synth_model, synth)
    trtr = evaluate(real_model, real_test)
    trts = evaluate(real_model, synth)
    tstr = evaluate(synth_model, real_test)
    return [
        UtilityResult("TRTR", on_real_train.precision, on_real_train.recall,
                      trtr.precision, trtr.recall, _missing(real_train, real_test)),
        UtilityResult("TRTS", on_real_train.precision, on_real_train.recall,
                      trts.precision, trts.recall, _missing(real_train, synth)),
        UtilityResult("TSTR", on_synth_train.precision, on_synth_train.recall,
                      tstr.precision, tstr.recall, _missing(synth, real_test)),
    ]


# --------------------------------------------------------------------------
# NNDR

def _nndr_space(t: Table, scaler: RobustScalerParams, numeric, categorical, dictionaries):
    x = np.column_stack([t.column(c) for c in numeric]) if numeric else np.empty((t.n_rows, 0))
    if numeric:
        x = scaler.transform(x)
    codes = np.column_stack([remap_codes(t, c, dictionaries[c]) for c in categorical]) \
        if categorical else np.empty((t.n_rows, 0), dtype=np.int64)
    return x, codes


def _two_nearest(sx, sc, rx, rc, skip_self=False, chunk=256):
    """Distances from every synthetic row to its nearest and second-nearest reference row.

    Squared distances accumulate feature by feature in a fixed order: numeric
    differences squared, then one unit per categorical mismatch. With
    ``skip_self`` row i is never its own neighbour (both inputs are one table).
    """
    n = sx.shape[0]
    d1 = np.empty(n)
    d2 = np.empty(n)
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        acc = np.zeros((e - s, rx.shape[0]))
        for j in range(rx.shape[1]):
            diff = sx[s:e, j][:, None] - rx[:, j][None, :]
            acc += diff * diff
        for j in range(rc.shape[1]):
            acc += (sc[s:e, j][:, None] != rc[:, j][None, :])
        if skip_self:
            acc[np.arange(e - s), np.arange(s, e)] = np.inf
        two = np.partition(acc, 1, axis=1)[:, :2]
        d1[s:e] = np.sqrt(two[:, 0])
        d2[s:e] = np.sqrt(two[:, 1])
    return d1, d2


def nndr_ratios(synth: Table, reference: Table, scaler: RobustScalerParams | None = None,
                leave_one_out: bool | None = None):
    """Per synthetic row: nearest over second-nearest reference distance (0/0 := 0).

    ``leave_one_out`` excludes each row's own index; by default it is on only
    when ``synth`` and ``reference`` are the same object.
    """
    if leave_one_out is None:
        leave_one_out = synth is reference
    if reference.n_rows < 2 + bool(leave_one_out):
        raise TooFewReferenceRows("NNDR needs at least two reference rows")
    ref = reference.without_label()
    syn = synth.without_label()
    numeric = ref.feature_names(Kind.NUMERIC)
    categorical = ref.feature_names(Kind.CATEGORICAL)
    for c in numeric + categorical:
        if c not in syn or syn.column_schema(c).kind is not ref.column_schema(c).kind:
            raise SchemaMismatch(c, "NNDR feature missing from synthetic table")
    if numeric and scaler is None:
        scaler = fit_robust_scaler(ref, numeric)
    if numeric:
        scaler = RobustScalerParams(tuple(numeric),
                                    np.array([scaler.median[scaler.columns.index(c)]
                                              for c in numeric]),
                                    np.array([scaler.iqr[scaler.columns.index(c)]
                                              for c in numeric]))
    dicts = {c: ref.dictionary(c) for c in categorical}
    rx, rc = _nndr_space(ref, scaler, numeric, categorical, dicts)
    sx, sc = _nndr_space(syn, scaler, numeric, categorical, dicts)
    # unseen synthetic categories get a code that matches nothing
    sc = np.where(sc < 0, -2, sc)
    d1, d2 = _two_nearest(sx, sc, rx, rc, skip_self=leave_one_out)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(d2 > 0, d1 / np.where(d2 > 0, d2, 1.0), 0.0)
    return ratio


def nndr(synth: Table, reference: Table, scaler: RobustScalerParams | None = None,
         leave_one_out: bool | None = None) -> float:
    """Mean nearest-neighbour distance ratio of synthetic rows against ``reference``.

    Features are robust-scaled (by ``scaler``, or one fitted on ``reference``)
    and the label column is ignored. Near 0 signals copied records. Passing
    the same table twice scores each row against the others.
    """
    r = nndr_ratios(synth, reference, scaler, leave_one_out)
    return math.fsum(r.tolist()) / r.size if r.size else 0.0


@dataclass
class PrivacyResult:
    train_nndr: float
    test_nndr: float
    overfit_flag: bool
    band: float = PRIVACY_BAND

    def to_dict(self):
        return {"train_nndr": self.train_nndr, "test_nndr": self.test_nndr,
                "difference": abs(self.train_nndr - self.test_nndr),
                "overfit_flag": self.overfit_flag, "band": self.band,
                "notes": ["NNDR is the mean ratio over synthetic rows",
                          "label column excluded from distances"]}


def privacy_decision(train_score, test_score, band=PRIVACY_BAND) -> PrivacyResult:
    # a gap equal to the band (up to rounding) is not flagged
    gap = abs(train_score - test_score)
    return PrivacyResult(train_score, test_score, gap > band + 1e-12, band)


def privacy_report(synth: Table, real_train: Table, real_test: Table,
                   band: float = PRIVACY_BAND) -> PrivacyResult:
    """NNDR against train and test, both in the train-fitted robust-scaled space."""
    numeric = real_train.without_label().feature_names(Kind.NUMERIC)
    scaler = fit_robust_scaler(real_train, numeric) if numeric else None
    return privacy_decision(nndr(synth, real_train, scaler), nndr(synth, real_test, scaler),
                            band)
