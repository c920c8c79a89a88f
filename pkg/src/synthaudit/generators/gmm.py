"""Per-class Gaussian mixture sampler fitted by expectation-maximization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._rng import make_rng
from ..errors import NoLabelColumn
from ..table import Table
from .base import MATCH_REAL, TableTemplate

MAX_ITER = 200
TOL = 1e-6
RIDGE_FLOOR = 1e-9
LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class ClassMixture:
    weights: np.ndarray      # (K,)
    means: np.ndarray        # (K, d)
    covariances: np.ndarray  # (K, d, d)
    ridge: float
    n_iter: int = 0
    log_likelihood: float = 0.0  # mean per row at the last E-step
    converged: bool = False

    @property
    def n_components(self):
        return self.weights.size

    def cholesky(self):
        return np.linalg.cholesky(self.covariances)

    def to_dict(self):
        return {"weights": self.weights.tolist(), "means": self.means.tolist(),
                "covariances": self.covariances.tolist(), "ridge": self.ridge,
                "n_iter": self.n_iter, "log_likelihood": self.log_likelihood,
                "converged": self.converged}

    @classmethod
    def from_dict(cls, d):
        w = np.asarray(d["weights"], dtype=float)
        means = np.asarray(d["means"], dtype=float).reshape(w.size, -1)
        dim = means.shape[1]
        covs = np.asarray(d["covariances"], dtype=float).reshape(w.size, dim, dim)
        return cls(w, means, covs, float(d["ridge"]), int(d["n_iter"]),
                   float(d["log_likelihood"]), bool(d["converged"]))


def _log_gauss(x, means, chols):
    """log N(x | mean_k, L_k L_k^T) for every row and component, shape (n, K)."""
    n, d = x.shape
    out = np.empty((n, means.shape[0]))
    for k in range(means.shape[0]):
        z = np.linalg.solve(chols[k], (x - means[k]).T)
        logdet = 2.0 * np.log(np.diag(chols[k])).sum()
        out[:, k] = -0.5 * (d * LOG_2PI + logdet + np.einsum("ij,ij->j", z, z))
    return out


def _logsumexp(a):
    m = a.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=1, keepdims=True))).ravel()


def _seed_means(x, k, rng):
    """k-means++ style seeding: each new centre drawn with probability ~ squared
    distance to the nearest centre chosen so far."""
    n = x.shape[0]
    idx = [int(rng.integers(n))]
    d2 = np.sum((x - x[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        nxt = int(rng.choice(n, p=d2 / total)) if total > 0 else int(rng.integers(n))
        idx.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    return x[idx].copy()


def fit_mixture(x, k, ridge_scale, rng, max_iter=MAX_ITER, tol=TOL) -> ClassMixture:
    """EM for a full-covariance mixture on the rows of ``x``.

    The ridge ``ridge_scale * trace(S) / d`` (S the sample covariance) is added
    to every covariance at each M-step, so Cholesky always succeeds even on
    constant columns.
    """
    n, d = x.shape
    if n < k + 1:
        k = 1
    if d == 0:
        return ClassMixture(np.ones(1), np.zeros((1, 0)), np.zeros((1, 0, 0)), 0.0,
                            converged=True)
    mu = x.mean(axis=0)
    s = (x - mu).T @ (x - mu) / n
    ridge = max(ridge_scale * np.trace(s) / d, RIDGE_FLOOR)
    eye = np.eye(d)
    if k == 1:
        means = mu[None, :]
    else:
        means = _seed_means(x, k, rng)
    covs = np.repeat((s + ridge * eye)[None], k, axis=0)
    weights = np.full(k, 1.0 / k)
    prev = -np.inf
    it = 0
    converged = False
    ll = -np.inf
    for it in range(1, max_iter + 1):
        logp = _log_gauss(x, means, np.linalg.cholesky(covs)) + np.log(weights)
        lse = _logsumexp(logp)
        ll = float(lse.mean())
        if ll - prev < tol:
            converged = True
            break
        prev = ll
        resp = np.exp(logp - lse[:, None])
        nk = np.maximum(resp.sum(axis=0), 1e-10)
        weights = nk / nk.sum()
        means = (resp.T @ x) / nk[:, None]
        for j in range(k):
            diff = x - means[j]
            c = (resp[:, j, None] * diff).T @ diff / nk[j]
            covs[j] = 0.5 * (c + c.T) + ridge * eye
    return ClassMixture(weights / weights.sum(), means, covs, float(ridge), it, ll, converged)


class GmmClassSampler:
    """One Gaussian mixture per label class over robust-scaled numeric features."""

    kind = "gmm"

    def __init__(self, template: TableTemplate, mixtures, n_components, ridge_scale, seed):
        self.template = template
        self.mixtures = mixtures  # list aligned with classes; None for empty classes
        self.n_components = n_components
        self.ridge_scale = ridge_scale
        self.seed = seed

    @property
    def classes(self):
        return self.template.classes

    @property
    def proportions(self):
        return self.template.proportions

    def sample(self, n: int, proportions=MATCH_REAL, seed: int = 0) -> Table:
        return sample(self, n, proportions, seed)

    def to_dict(self):
        return {"template": self.template.to_dict(), "n_components": self.n_components,
                "ridge_scale": self.ridge_scale, "seed": self.seed,
                "mixtures": [m.to_dict() if m is not None else None for m in self.mixtures]}

    @classmethod
    def from_dict(cls, d):
        mix = [ClassMixture.from_dict(m) if m is not None else None for m in d["mixtures"]]
        return cls(TableTemplate.from_dict(d["template"]), mix, int(d["n_components"]),
                   float(d["ridge_scale"]), int(d["seed"]))


def fit_gmm_sampler(train: Table, K: int = 3, ridge: float = 1e-6,
                    seed: int = 0) -> GmmClassSampler:
    """Fit a K-component mixture per class (K=1 for classes with <= K rows)."""
    if train.label_name is None:
        raise NoLabelColumn("the mixture sampler needs a labeled table")
    tpl = TableTemplate.from_table(train)
    x = tpl.scale(train)
    cls_idx = tpl.class_indices(train)
    mixtures = []
    for k in range(tpl.n_classes):
        rows = cls_idx == k
        if not rows.any():
            mixtures.append(None)
            continue
        mixtures.append(fit_mixture(x[rows], K, ridge, make_rng(seed, "gmm", k)))
    return GmmClassSampler(tpl, mixtures, K, ridge, seed)


def sample(sampler: GmmClassSampler, n: int, proportions=MATCH_REAL, seed: int = 0) -> Table:
    """Draw ``n`` labeled rows with class counts set by largest-remainder rounding."""
    tpl = sampler.template
    counts = tpl.class_counts_for(n, proportions)
    rng = make_rng(seed, "gmm-sample")
    d = len(tpl.numeric)
    blocks, cls_idx = [], []
    for k, c in enumerate(counts):
        if c == 0:
            continue
        m = sampler.mixtures[k]
        comp = rng.choice(m.n_components, size=c, p=m.weights)
        z = rng.standard_normal((c, d))
        chol = m.cholesky() if d else np.zeros((m.n_components, 0, 0))
        blocks.append(m.means[comp] + np.einsum("nij,nj->ni", chol[comp], z))
        cls_idx.append(np.full(c, k, dtype=np.int64))
    x = np.vstack(blocks) if blocks else np.empty((0, d))
    y = np.concatenate(cls_idx) if cls_idx else np.empty(0, dtype=np.int64)
    order = rng.permutation(y.size)
    return tpl.assemble(x[order], y[order], rng)
