"""Random forest of Gini CART trees.

Trees are grown breadth-first: all open nodes of one depth are split in a
single vectorized pass over per-(node, bin, class) histograms, so Python
overhead scales with tree depth rather than node count.

Numeric columns with at most 256 distinct training values are split at the
midpoint between consecutive distinct values present in the node. Wider
columns are pre-binned into at most 65 quantile bins whose 64 edges are the
only thresholds considered. Categorical columns split one category against
the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._rng import make_rng
from ..table import Table
from .encoding import FeatureEncoder

EXACT_LIMIT = 256
QUANTILE_CANDIDATES = 64


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 50
    max_depth: int = 16
    min_leaf: int = 1
    features_per_split: int | None = None  # default floor(sqrt(p))
    bootstrap: bool = True
    seed: int = 0


class _Binner:
    """Maps each column of the training design to small integer bins."""

    def __init__(self, x, is_cat, n_categories):
        self.is_cat = is_cat
        self.values = []  # exact columns: sorted distinct values
        self.edges = []   # quantile columns: split thresholds
        self.n_bins = np.empty(x.shape[1], dtype=np.int64)
        for j in range(x.shape[1]):
            if is_cat[j]:
                self.values.append(None)
                self.edges.append(None)
                self.n_bins[j] = max(n_categories[j], 1)
                continue
            u = np.unique(x[:, j])
            if u.size <= EXACT_LIMIT:
                self.values.append(u)
                self.edges.append(None)
                self.n_bins[j] = u.size
            else:
                qs = np.quantile(x[:, j], np.arange(1, QUANTILE_CANDIDATES + 1)
                                 / (QUANTILE_CANDIDATES + 1))
                lo = np.searchsorted(u, qs, side="right") - 1
                lo = np.unique(np.clip(lo, 0, u.size - 2))
                edges = 0.5 * (u[lo] + u[lo + 1])
                self.values.append(None)
                self.edges.append(edges)
                self.n_bins[j] = edges.size + 1

    def transform(self, x):
        out = np.empty(x.shape, dtype=np.int64)
        for j in range(x.shape[1]):
            if self.is_cat[j]:
                out[:, j] = x[:, j].astype(np.int64)
            elif self.values[j] is not None:
                out[:, j] = np.searchsorted(self.values[j], x[:, j])
            else:
                out[:, j] = np.searchsorted(self.edges[j], x[:, j], side="left")
        return out


@dataclass
class Tree:
    """Flat array form of one fitted tree; ``feature == -1`` marks a leaf."""
    feature: np.ndarray
    is_cat: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # class counts per node (leaves used for prediction)
    depth: int

    @property
    def n_nodes(self):
        return self.feature.size

    def leaves(self):
        return np.flatnonzero(self.feature < 0)

    def apply(self, x):
        node = np.zeros(x.shape[0], dtype=np.int64)
        for _ in range(self.depth):
            f = self.feature[node]
            inner = np.flatnonzero(f >= 0)
            if inner.size == 0:
                break
            nd = node[inner]
            v = x[inner, f[inner]]
            go_left = np.where(self.is_cat[nd], v == self.threshold[nd], v <= self.threshold[nd])
            node[inner] = np.where(go_left, self.left[nd], self.right[nd])
        return node

    def predict_proba(self, x):
        leaf = self.apply(x)
        c = self.counts[leaf]
        return c / c.sum(axis=1, keepdims=True)


def _grow_tree(xb, y, n_classes, binner, params, m, rng):
    n, p = xb.shape
    min_leaf = max(params.min_leaf, 1)
    cap = 2 * n + 1  # a binary tree over n rows has fewer than 2n nodes
    feature = np.full(cap, -1, dtype=np.int64)
    is_cat = np.zeros(cap, dtype=bool)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    counts = np.zeros((cap, n_classes))
    n_nodes = 1

    rows = np.arange(n)
    node_ids = np.array([0])
    loc = np.zeros(n, dtype=np.int64)  # position of each live row's node in node_ids
    depth = 0
    while node_ids.size:
        a = node_ids.size
        yr = y[rows]
        cnt = np.bincount(loc * n_classes + yr, minlength=a * n_classes) \
            .reshape(a, n_classes).astype(float)
        counts[node_ids] = cnt
        tot = cnt.sum(axis=1)
        parent_score = np.einsum("ac,ac->a", cnt, cnt) / tot
        splittable = (tot >= 2 * min_leaf) & (np.count_nonzero(cnt, axis=1) > 1)
        if depth >= params.max_depth or not splittable.any():
            break
        feats = np.argsort(rng.random((a, p)), axis=1)[:, :m]
        best_gain = np.zeros(a)
        best_feat = np.full(a, -1)
        best_bin = np.zeros(a, dtype=np.int64)
        best_next = np.zeros(a, dtype=np.int64)
        ar = np.arange(a)
        for j in range(m):
            f = feats[:, j]
            nb = int(binner.n_bins[f].max())
            b = xb[rows, f[loc]]
            # class-major histogram: hist[c, node, bin]
            hist = np.bincount((yr * a + loc) * nb + b, minlength=n_classes * a * nb) \
                .reshape(n_classes, a, nb).astype(float)
            cat = binner.is_cat[f]
            left_c = hist.copy()
            num = ~cat
            if num.any():
                left_c[:, num, :] = np.cumsum(hist[:, num, :], axis=2)
            n_bin = hist.sum(axis=0)
            n_left = left_c.sum(axis=0)
            n_right = tot[:, None] - n_left
            right_c = cnt.T[:, :, None] - left_c
            valid = (n_bin > 0) & (n_left >= min_leaf) & (n_right >= min_leaf)
            with np.errstate(invalid="ignore", divide="ignore"):
                score = ((left_c * left_c).sum(axis=0) / n_left
                         + (right_c * right_c).sum(axis=0) / n_right)
            score[~valid] = -np.inf
            bb = np.argmax(score, axis=1)
            gain = score[ar, bb] - parent_score
            better = splittable & (gain > best_gain + 1e-12)
            if better.any():
                cum = np.cumsum(n_bin, axis=1)
                nxt = np.sum(cum <= cum[ar, bb][:, None], axis=1)
                best_gain = np.where(better, gain, best_gain)
                best_feat = np.where(better, f, best_feat)
                best_bin = np.where(better, bb, best_bin)
                best_next = np.where(better, nxt, best_next)
        split = np.flatnonzero(best_feat >= 0)
        if split.size == 0:
            break
        nid = node_ids[split]
        f = best_feat[split]
        bb = best_bin[split]
        feature[nid] = f
        is_cat[nid] = binner.is_cat[f]
        thr = np.empty(split.size)
        for k in range(split.size):
            fk = f[k]
            if binner.is_cat[fk]:
                thr[k] = bb[k]
            elif binner.values[fk] is not None:
                u = binner.values[fk]
                thr[k] = 0.5 * (u[bb[k]] + u[best_next[split[k]]])
            else:
                thr[k] = binner.edges[fk][bb[k]]
        threshold[nid] = thr
        child_left = np.full(a, -1)
        child_right = np.full(a, -1)
        child_left[split] = n_nodes + 2 * np.arange(split.size)
        child_right[split] = child_left[split] + 1
        left[nid] = child_left[split]
        right[nid] = child_right[split]
        n_nodes += 2 * split.size

        keep = child_left[loc] >= 0
        rows, loc = rows[keep], loc[keep]
        f = best_feat[loc]
        b = xb[rows, f]
        go_left = np.where(binner.is_cat[f], b == best_bin[loc], b <= best_bin[loc])
        new_ids = np.where(go_left, child_left[loc], child_right[loc])
        node_ids, loc = np.unique(new_ids, return_inverse=True)
        loc = loc.ravel()
        depth += 1
    k = n_nodes
    return Tree(feature[:k].copy(), is_cat[:k].copy(), threshold[:k].copy(), left[:k].copy(),
                right[:k].copy(), counts[:k].copy(), depth + 1)


class ForestModel:
    kind = "forest"

    def __init__(self, params: ForestParams = ForestParams()):
        self.params = params
        self.trees = []

    @property
    def n_trees(self):
        return self.params.n_trees

    @property
    def max_depth(self):
        return self.params.max_depth

    @property
    def min_leaf(self):
        return self.params.min_leaf

    @property
    def bootstrap(self):
        return self.params.bootstrap

    @property
    def seed(self):
        return self.params.seed

    def fit(self, train: Table) -> "ForestModel":
        self.encoder = FeatureEncoder(train)
        self.classes = self.encoder.classes
        x, self._is_cat = self.encoder.mixed_matrix(train)
        y = self.encoder.label_indices(train)
        n, p = x.shape
        n_cats = [0] * len(self.encoder.numeric) + [len(self.encoder.dictionaries[c])
                                                    for c in self.encoder.categorical]
        self.features_per_split = self.params.features_per_split or max(int(np.sqrt(p)), 1)
        m = min(self.features_per_split, p)
        self.trees = []
        if p == 0 or n == 0:
            counts = np.bincount(y, minlength=len(self.classes)).astype(float)
            self.trees = [Tree(np.array([-1]), np.array([False]), np.array([0.0]),
                               np.array([-1]), np.array([-1]), counts[None, :], 1)]
            return self
        binner = _Binner(x, self._is_cat, n_cats)
        xb = binner.transform(x)
        for t in range(self.params.n_trees):
            rng = make_rng(self.params.seed, "tree", t)
            idx = rng.integers(0, n, size=n) if self.params.bootstrap else np.arange(n)
            self.trees.append(_grow_tree(xb[idx], y[idx], len(self.classes),
                                         binner, self.params, m, rng))
        return self

    def predict_proba(self, t: Table) -> np.ndarray:
        x, _ = self.encoder.mixed_matrix(t)
        out = np.zeros((t.n_rows, len(self.classes)))
        for tree in self.trees:
            out += tree.predict_proba(x)
        return out / len(self.trees)

    def predict(self, t: Table) -> np.ndarray:
        return np.argmax(self.predict_proba(t), axis=1)

    def summary(self):
        return {"kind": self.kind, "n_trees": self.params.n_trees,
                "max_depth": self.params.max_depth, "min_leaf": self.params.min_leaf,
                "features_per_split": self.features_per_split,
                "bootstrap": self.params.bootstrap, "seed": self.params.seed}


def train_forest(train: Table, hp: ForestParams = ForestParams()) -> ForestModel:
    return ForestModel(hp).fit(train)
