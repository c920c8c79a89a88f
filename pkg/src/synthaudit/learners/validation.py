"""Classifier specs, held-out evaluation and stratified k-fold cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..ingest import stratified_kfold
from ..table import Table
from .encoding import remap_codes
from .forest import ForestModel, ForestParams
from .logistic import LogisticModel, LogisticParams
from .metrics import MetricsBundle, classification_metrics

STABILITY_BAND = 0.04
METRICS = ("precision", "recall", "f1", "roc_auc")


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "forest"
    params: dict = field(default_factory=dict)

    def build(self, seed=0):
        if self.kind == "forest":
            return ForestModel(ForestParams(**{**self.params, "seed": seed}))
        if self.kind == "logistic":
            return LogisticModel(LogisticParams(**self.params))
        raise ValueError(f"unknown classifier kind {self.kind!r}")

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}


FOREST = ClassifierSpec("forest")
LOGISTIC = ClassifierSpec("logistic")


def evaluate(model, test: Table) -> MetricsBundle:
    """Macro precision/recall/F1/one-vs-rest ROC-AUC of ``model`` on ``test``.

    Test classes the model never saw are appended to the class list; they
    count as misclassified rows but carry no probability column of their own.
    """
    classes = list(model.classes)
    test_cats = test.dictionary(test.require_label())
    extra = [c for c in test_cats if c not in set(classes)]
    all_classes = classes + extra
    y_true = remap_codes(test, test.require_label(), all_classes)
    proba = model.predict_proba(test)
    y_pred = np.argmax(proba, axis=1) if test.n_rows else np.empty(0, dtype=np.int64)
    bundle = classification_metrics(y_true, y_pred, proba, all_classes)
    unseen = [c for c in extra if c in set(test.decoded(test.require_label()))]
    if unseen:
        bundle.excluded_classes = sorted(set(bundle.excluded_classes) | set(unseen))
        # classes absent from training cannot be predicted; drop them from the averages
        keep = {k: v for k, v in bundle.per_class.items() if k not in set(unseen)}
        if keep:
            bundle.precision = float(np.mean([v["precision"] for v in keep.values()]))
            bundle.recall = float(np.mean([v["recall"] for v in keep.values()]))
            bundle.f1 = float(np.mean([v["f1"] for v in keep.values()]))
            aucs = [v["roc_auc"] for v in keep.values() if v["roc_auc"] is not None]
            bundle.roc_auc = float(np.mean(aucs)) if aucs else None
    return bundle


def stability_flags(fold_values: dict, band: float = STABILITY_BAND) -> dict:
    """Per metric: stable iff max - min over folds <= band."""
    out = {}
    for metric, vals in fold_values.items():
        vals = [v for v in vals if v is not None]
        if not vals:
            out[metric] = {"range": None, "stable": None}
            continue
        rng = float(max(vals) - min(vals))
        # tolerate the rounding in differences like 1.0 - 0.96
        out[metric] = {"range": rng, "stable": rng <= band + 1e-12}
    return out


@dataclass
class CrossValidationResult:
    folds: list
    stability: dict
    band: float

    def to_dict(self):
        return {"folds": [f.as_dict() for f in self.folds], "stability": self.stability,
                "band": self.band}


def cross_validate(t: Table, model_spec: ClassifierSpec = FOREST, k: int = 10,
                   stability_band: float = STABILITY_BAND, seed: int = 0):
    folds = []
    for i, (tr, va) in enumerate(stratified_kfold(t, k, seed)):
        model = model_spec.build(seed + i).fit(t.take(tr))
        folds.append(evaluate(model, t.take(va)))
    values = {m: [f.value(m) for f in folds] for m in METRICS}
    return CrossValidationResult(folds, stability_flags(values, stability_band), stability_band)


def with_params(spec: ClassifierSpec, **params) -> ClassifierSpec:
    return replace(spec, params={**spec.params, **params})
