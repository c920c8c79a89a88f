"""Macro-averaged classification metrics and rank-statistic ROC-AUC."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def midranks(values) -> np.ndarray:
    """1-based ranks with ties sharing the mean of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    sv = v[order]
    ranks = np.empty(v.size)
    # boundaries of runs of equal values
    edges = np.flatnonzero(np.diff(sv) != 0) + 1
    starts = np.concatenate([[0], edges])
    ends = np.concatenate([edges, [v.size]])
    ranks[order] = np.repeat(0.5 * (starts + 1 + ends), ends - starts)
    return ranks


def roc_auc_binary(scores, positive) -> float | None:
    """Mann-Whitney AUC; None when either class is absent."""
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    r = midranks(scores)
    u = r[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass
class MetricsBundle:
    precision: float
    recall: float
    f1: float
    roc_auc: float | None
    accuracy: float
    per_class: dict = field(default_factory=dict)
    excluded_classes: list = field(default_factory=list)
    n_rows: int = 0

    def as_dict(self):
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "roc_auc": self.roc_auc, "accuracy": self.accuracy,
                "per_class": self.per_class, "excluded_classes": self.excluded_classes,
                "n_rows": self.n_rows}

    def value(self, metric):
        return getattr(self, metric)


def classification_metrics(y_true, y_pred, proba, classes) -> MetricsBundle:
    """Macro metrics over the classes that occur in ``y_true``.

    ``y_true`` and ``y_pred`` hold indices into ``classes``; ``proba`` has one
    column per class. Classes never seen in ``y_true`` are listed in
    ``excluded_classes`` and kept out of every macro average.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    proba = np.asarray(proba, dtype=float)
    present = sorted(set(y_true.tolist()))
    excluded = [classes[c] for c in range(len(classes)) if c not in set(present)]
    per_class = {}
    prec, rec, f1s, aucs = [], [], [], []
    for c in present:
        tp = int(np.sum((y_pred == c) & (y_true == c)))
        n_pred = int(np.sum(y_pred == c))
        n_true = int(np.sum(y_true == c))
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_true
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        auc = roc_auc_binary(proba[:, c], y_true == c) if c < proba.shape[1] else None
        per_class[classes[c]] = {"precision": p, "recall": r, "f1": f, "roc_auc": auc,
                                 "support": n_true}
        prec.append(p)
        rec.append(r)
        f1s.append(f)
        if auc is not None:
            aucs.append(auc)
    mean = (lambda xs: float(np.mean(xs)) if xs else 0.0)
    return MetricsBundle(
        precision=mean(prec), recall=mean(rec), f1=mean(f1s),
        roc_auc=float(np.mean(aucs)) if aucs else None,
        accuracy=float(np.mean(y_true == y_pred)) if y_true.size else 0.0,
        per_class=per_class, excluded_classes=excluded, n_rows=int(y_true.size))
