"""Feature/label encoding shared by the classifiers."""

from __future__ import annotations

import numpy as np

from ..errors import SchemaMismatch
from ..table import Kind, Table


class FeatureEncoder:
    """Remembers the training table's feature columns and dictionaries.

    Tables passed to :meth:`transform` are matched by column name and
    categorical values by their string form, so they need not share code
    assignments with the training table. Unseen categories map to code -1.
    """

    def __init__(self, train: Table):
        self.numeric = train.feature_names(Kind.NUMERIC)
        self.categorical = train.feature_names(Kind.CATEGORICAL)
        self.dictionaries = {n: train.dictionary(n) for n in self.categorical}
        self.label = train.require_label()
        self.classes = train.dictionary(self.label)

    def _check(self, t: Table):
        for name in self.numeric:
            if name not in t or t.column_schema(name).kind is not Kind.NUMERIC:
                raise SchemaMismatch(name, "numeric feature missing")
        for name in self.categorical:
            if name not in t or t.column_schema(name).kind is not Kind.CATEGORICAL:
                raise SchemaMismatch(name, "categorical feature missing")

    def numeric_matrix(self, t: Table) -> np.ndarray:
        self._check(t)
        if not self.numeric:
            return np.empty((t.n_rows, 0))
        return np.column_stack([t.column(n) for n in self.numeric])

    def code_matrix(self, t: Table) -> np.ndarray:
        self._check(t)
        out = np.empty((t.n_rows, len(self.categorical)), dtype=np.int64)
        for j, name in enumerate(self.categorical):
            out[:, j] = remap_codes(t, name, self.dictionaries[name])
        return out

    def mixed_matrix(self, t: Table):
        """Numeric columns followed by categorical codes (as floats), plus a kind mask."""
        x = np.hstack([self.numeric_matrix(t), self.code_matrix(t).astype(float)])
        is_cat = np.array([False] * len(self.numeric) + [True] * len(self.categorical))
        return x, is_cat

    def onehot_matrix(self, t: Table) -> np.ndarray:
        blocks = [self.numeric_matrix(t)]
        codes = self.code_matrix(t)
        for j, name in enumerate(self.categorical):
            k = len(self.dictionaries[name])
            oh = np.zeros((t.n_rows, k))
            ok = codes[:, j] >= 0
            oh[np.flatnonzero(ok), codes[ok, j]] = 1.0
            blocks.append(oh)
        return np.hstack(blocks)

    def label_indices(self, t: Table, classes=None) -> np.ndarray:
        """Label codes of ``t`` re-expressed against ``classes`` (-1 when unknown)."""
        return remap_codes(t, t.require_label(), classes or self.classes)


def remap_codes(t: Table, name: str, dictionary) -> np.ndarray:
    src = t.dictionary(name)
    if tuple(src) == tuple(dictionary):
        return np.asarray(t.column(name), dtype=np.int64)
    lookup = {c: i for i, c in enumerate(dictionary)}
    table = np.array([lookup.get(c, -1) for c in src], dtype=np.int64)
    col = t.column(name)
    return table[col] if col.size else np.empty(0, dtype=np.int64)
