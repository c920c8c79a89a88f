"""Pieces shared by the generators: class bookkeeping, categorical resampling,
numeric scaling and assembly of output tables."""

from __future__ import annotations

import numpy as np

from ..errors import CategoryMismatch, ShapeMismatch, Unsupported
from ..ingest import RobustScalerParams, fit_robust_scaler
from ..table import ColumnSchema, Kind, Role, Table

MATCH_REAL = "match_real"
UNIFORM = "uniform"


def normalize_proportions(proportions) -> str:
    key = str(proportions).lower().replace("_", "").replace("-", "")
    if key == "matchreal":
        return MATCH_REAL
    if key == "uniform":
        return UNIFORM
    raise Unsupported(f"unknown proportions mode {proportions!r}")


def largest_remainder(n: int, weights) -> np.ndarray:
    """Integer counts summing to ``n`` proportional to ``weights``.

    Floors first, then hands the leftover units to the largest fractional
    parts (ties go to the earlier class).
    """
    w = np.asarray(weights, dtype=float)
    quota = n * w / w.sum()
    counts = np.floor(quota).astype(np.int64)
    left = int(n - counts.sum())
    if left > 0:
        order = np.argsort(-(quota - counts), kind="stable")
        counts[order[:left]] += 1
    return counts


class TableTemplate:
    """What a generator needs to know about its training table.

    Rows are grouped by label class (a single pseudo-class when the table is
    unlabeled). Numeric features live in robust-scaled space inside the
    generators; categorical features are resampled from per-class empirical
    frequencies.
    """

    def __init__(self, schema, dictionaries, class_counts, cat_freq, scaler):
        self.schema = tuple(schema)
        self.dictionaries = {k: tuple(v) for k, v in dictionaries.items()}
        self.class_counts = np.asarray(class_counts, dtype=np.int64)
        self.cat_freq = cat_freq  # cat_freq[class_index][column] -> probabilities
        self.scaler = scaler

    @classmethod
    def from_table(cls, train: Table) -> "TableTemplate":
        label = train.label_name
        if label is None:
            cls_idx = np.zeros(train.n_rows, dtype=np.int64)
            n_classes = 1
        else:
            cls_idx = np.asarray(train.column(label), dtype=np.int64)
            n_classes = len(train.dictionary(label))
        counts = np.bincount(cls_idx, minlength=n_classes)
        cats = train.feature_names(Kind.CATEGORICAL)
        overall = {c: _freq(train.column(c), len(train.dictionary(c))) for c in cats}
        cat_freq = []
        for k in range(n_classes):
            rows = cls_idx == k
            cat_freq.append({c: _freq(train.column(c)[rows], len(train.dictionary(c)))
                             if rows.any() else overall[c] for c in cats})
        numeric = train.feature_names(Kind.NUMERIC)
        scaler = fit_robust_scaler(train, numeric) if numeric and train.n_rows else None
        return cls(train.schema, train.dictionaries, counts, cat_freq, scaler)

    @property
    def label(self):
        return next((c.name for c in self.schema if c.role is Role.LABEL), None)

    @property
    def classes(self):
        return self.dictionaries[self.label] if self.label else ("",)

    @property
    def n_classes(self):
        return self.class_counts.size

    @property
    def numeric(self):
        return [c.name for c in self.schema if c.kind is Kind.NUMERIC]

    @property
    def categorical_features(self):
        return [c.name for c in self.schema
                if c.kind is Kind.CATEGORICAL and c.role is Role.FEATURE]

    @property
    def proportions(self):
        return self.class_counts / self.class_counts.sum()

    def scale(self, t: Table) -> np.ndarray:
        if not self.numeric:
            return np.empty((t.n_rows, 0))
        return self.scaler.transform(np.column_stack([t.column(c) for c in self.numeric]))

    def class_indices(self, t: Table) -> np.ndarray:
        if self.label is None:
            return np.zeros(t.n_rows, dtype=np.int64)
        return np.asarray(t.column(self.label), dtype=np.int64)

    def class_counts_for(self, n: int, proportions=MATCH_REAL) -> np.ndarray:
        mode = normalize_proportions(proportions)
        present = (self.class_counts > 0).astype(float)
        weights = self.class_counts if mode == MATCH_REAL else present
        return largest_remainder(n, weights)

    def labels_to_indices(self, labels, n: int) -> np.ndarray:
        labels = [str(v) for v in labels]
        if len(labels) != n:
            raise ShapeMismatch(f"{len(labels)} labels for {n} rows")
        lookup = {c: i for i, c in enumerate(self.classes)}
        bad = [v for v in labels if v not in lookup]
        if bad:
            raise CategoryMismatch(f"unknown class {bad[0]!r}")
        return np.array([lookup[v] for v in labels], dtype=np.int64)

    def assemble(self, scaled: np.ndarray, cls_idx: np.ndarray, rng) -> Table:
        """Build an output table from scaled numeric features and class indices."""
        n = cls_idx.size
        numeric = self.scaler.inverse(scaled) if self.numeric else np.empty((n, 0))
        cat_cols = [c for c in self.schema if c.kind is Kind.CATEGORICAL]
        codes = np.zeros((n, len(cat_cols)), dtype=np.int64)
        for j, col in enumerate(cat_cols):
            if col.role is Role.LABEL:
                codes[:, j] = cls_idx
                continue
            for k in np.unique(cls_idx):
                rows = np.flatnonzero(cls_idx == k)
                p = self.cat_freq[k][col.name]
                codes[rows, j] = rng.choice(p.size, size=rows.size, p=p)
        return Table(self.schema, numeric, codes, self.dictionaries)

    def to_dict(self):
        return {
            "schema": [c.to_dict() for c in self.schema],
            "dictionaries": {k: list(v) for k, v in self.dictionaries.items()},
            "class_counts": self.class_counts.tolist(),
            "categorical_frequencies": [{c: p.tolist() for c, p in f.items()}
                                        for f in self.cat_freq],
            "scaler": self.scaler.to_dict() if self.scaler is not None else None,
        }

    @classmethod
    def from_dict(cls, d):
        schema = [ColumnSchema(c["name"], Kind(c["kind"]), Role(c["role"]))
                  for c in d["schema"]]
        cat_freq = [{c: np.asarray(p, dtype=float) for c, p in f.items()}
                    for f in d["categorical_frequencies"]]
        scaler = RobustScalerParams.from_dict(d["scaler"]) if d["scaler"] else None
        return cls(schema, d["dictionaries"], d["class_counts"], cat_freq, scaler)


def _freq(codes, k):
    k = max(k, 1)
    c = np.bincount(np.asarray(codes, dtype=np.int64), minlength=k).astype(float)
    return c / c.sum() if c.sum() else np.full(k, 1.0 / k)
