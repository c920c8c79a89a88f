"""Permutation two-sample tests: regularized Hotelling T^2, Frobenius covariance, RBF MMD.

Every test draws ``B`` relabelings of the pooled sample from one seeded
stream, evaluates the statistic for the observed labeling and all relabelings
through the same vectorized code path, and reports the one-sided p-value
``(1 + #{T*_b >= T_obs}) / (B + 1)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ._rng import make_rng
from .errors import DimensionMismatch

# chunk of permutations evaluated per vectorized pass
_CHUNK = 100


@dataclass(frozen=True)
class TestConfig:
    permutations: int = 500
    alpha: float = 0.05
    ridge_scale: float = 1e-3
    subsample: int | None = 2000
    seed: int = 0

    __test__ = False  # keep pytest from collecting this as a test class

    def __post_init__(self):
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.ridge_scale > 0:
            raise ValueError("ridge_scale must be positive")
        if self.subsample is not None and self.subsample < 2:
            raise ValueError("subsample cap must be >= 2")


@dataclass(frozen=True)
class PermutationResult:
    statistic_name: str
    observed: float
    permutations: int
    p_value: float
    null_mean: float
    null_sd: float
    seed: int
    alpha: float = 0.05
    n_x: int = 0
    n_y: int = 0
    flags: tuple = ()

    @property
    def reject(self) -> bool:
        return self.p_value < self.alpha

    def to_dict(self):
        d = asdict(self)
        d["flags"] = list(self.flags)
        d["reject_h0"] = self.reject
        return d


def _check(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} are incompatible")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise DimensionMismatch("each group needs at least two rows")
    return x, y


def _relabelings(n_x, n_total, cfg, stream):
    """Boolean membership masks: row 0 is the observed labeling, then B permutations."""
    rng = make_rng(cfg.seed, stream)
    masks = np.zeros((cfg.permutations + 1, n_total), dtype=bool)
    masks[0, :n_x] = True
    for b in range(1, cfg.permutations + 1):
        masks[b, rng.permutation(n_total)[:n_x]] = True
    return masks


def _result(name, stats, cfg, n_x, n_y, flags=(), observed=None):
    observed = float(stats[0]) if observed is None else float(observed)
    null = np.asarray(stats[1:], dtype=float)
    # relabelings equivalent to the observed one must count despite rounding
    tol = 1e-10 * max(abs(observed), float(np.max(np.abs(null))) if null.size else 0.0)
    exceed = int(np.count_nonzero(null >= observed - tol))
    return PermutationResult(
        statistic_name=name,
        observed=observed,
        permutations=cfg.permutations,
        p_value=(1 + exceed) / (cfg.permutations + 1),
        null_mean=float(null.mean()),
        null_sd=float(null.std(ddof=1)) if null.size > 1 else 0.0,
        seed=cfg.seed,
        alpha=cfg.alpha,
        n_x=n_x,
        n_y=n_y,
        flags=tuple(flags),
    )


# --------------------------------------------------------------------------
# Hotelling

def hotelling_statistic(x, y, ridge_scale=1e-3, lambda_floor=None):
    """Regularized two-sample Hotelling T^2 for one labeling, computed directly.

    ``lambda_floor`` defaults to ``1e-8 * trace(total covariance) / p`` so the
    ridge stays positive when both groups are internally constant.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.ndim == 1:
        x, y = x[:, None], y[:, None]
    n1, n2 = len(x), len(y)
    p = x.shape[1]
    d = x.mean(axis=0) - y.mean(axis=0)
    sx = np.cov(x, rowvar=False).reshape(p, p) * (n1 - 1)
    sy = np.cov(y, rowvar=False).reshape(p, p) * (n2 - 1)
    s = (sx + sy) / (n1 + n2 - 2)
    if lambda_floor is None:
        z = np.vstack([x, y])
        lambda_floor = 1e-8 * np.trace(np.cov(z, rowvar=False).reshape(p, p)) / p
    lam = max(ridge_scale * np.trace(s) / p, ridge_scale * lambda_floor)
    if lam <= 0:
        return 0.0
    return float(n1 * n2 / (n1 + n2) * d @ np.linalg.solve(s + lam * np.eye(p), d))


def hotelling_t2_regularized(x, y, cfg: TestConfig = TestConfig()) -> PermutationResult:
    """Ridge-regularized Hotelling T^2 with a permutation p-value.

    With ``T`` the (permutation-invariant) total scatter of the pooled sample
    and ``c = n1 n2 / N``, the within-group scatter of any labeling is
    ``T - c d d^T``. Rotating into T's eigenbasis reduces each relabeling to
    a diagonal-plus-rank-one solve evaluated by Sherman-Morrison.
    """
    x, y = _check(x, y)
    n1, n2 = len(x), len(y)
    n, p = n1 + n2, x.shape[1]
    flags = ["n1+n2<p: ridge carries the inverse"] if n < p else []
    z = np.vstack([x, y])
    z = z - z.mean(axis=0)
    total = z.T @ z
    trace_total = float(np.trace(total))
    if trace_total <= 0:
        flags.append("all points identical")
        return _result("hotelling_t2_regularized", np.zeros(cfg.permutations + 1), cfg,
                       n1, n2, flags)
    evals, evecs = np.linalg.eigh(total)
    evals = np.maximum(evals, 0.0)
    zr = z @ evecs
    c = n1 * n2 / n
    dof = n - 2
    # lambda floor: 1e-8 of the pooled-sample covariance trace
    floor = 1e-8 * trace_total / (n - 1)
    masks = _relabelings(n1, n, cfg, "hotelling")
    stats = np.empty(len(masks))
    for start in range(0, len(masks), _CHUNK):
        m = masks[start:start + _CHUNK].astype(float)
        mean_x = m @ zr / n1
        mean_y = (1.0 - m) @ zr / n2
        d = mean_x - mean_y  # rotated mean differences, one row per labeling
        dd = np.sum(d * d, axis=1)
        trace_s = np.maximum(trace_total - c * dd, 0.0) / dof
        lam = cfg.ridge_scale * np.maximum(trace_s, floor) / p
        diag = evals[None, :] / dof + lam[:, None]
        qf = np.sum(d * d / diag, axis=1)
        s2 = c / dof
        stats[start:start + _CHUNK] = c * (qf + s2 * qf * qf / (1.0 - s2 * qf))
    return _result("hotelling_t2_regularized", stats, cfg, n1, n2, flags)


# --------------------------------------------------------------------------
# Frobenius

def frobenius_statistic(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.ndim == 1:
        x, y = x[:, None], y[:, None]
    p = x.shape[1]
    sx = np.cov(x, rowvar=False).reshape(p, p)
    sy = np.cov(y, rowvar=False).reshape(p, p)
    return float(np.linalg.norm(sx - sy, "fro"))


def frobenius_covariance_test(x, y, cfg: TestConfig = TestConfig()) -> PermutationResult:
    """Permutation test on ``||S_x - S_y||_F`` with unbiased sample covariances."""
    x, y = _check(x, y)
    n1, n2 = len(x), len(y)
    n, p = n1 + n2, x.shape[1]
    z = np.vstack([x, y])
    z = z - z.mean(axis=0)
    # per-row outer products flattened, so group scatter is a mask-weighted sum
    outer = (z[:, :, None] * z[:, None, :]).reshape(n, p * p)
    total_outer = outer.sum(axis=0)
    masks = _relabelings(n1, n, cfg, "frobenius")
    stats = np.empty(len(masks))
    for start in range(0, len(masks), _CHUNK):
        m = masks[start:start + _CHUNK].astype(float)
        sum_x = m @ z
        sum_y = -sum_x  # z is centred
        outer_x = m @ outer
        outer_y = total_outer[None, :] - outer_x
        mx = sum_x / n1
        my = sum_y / n2
        cov_x = (outer_x - n1 * (mx[:, :, None] * mx[:, None, :]).reshape(-1, p * p)) / (n1 - 1)
        cov_y = (outer_y - n2 * (my[:, :, None] * my[:, None, :]).reshape(-1, p * p)) / (n2 - 1)
        stats[start:start + _CHUNK] = np.sqrt(np.sum((cov_x - cov_y) ** 2, axis=1))
    return _result("frobenius_covariance", stats, cfg, n1, n2,
                   observed=frobenius_statistic(x, y))


# --------------------------------------------------------------------------
# MMD

def _sq_dists(z):
    # exact row differences; the Gram expansion loses precision for close points
    n = len(z)
    out = np.zeros((n, n))
    for j in range(z.shape[1]):
        col = z[:, j]
        out += (col[:, None] - col[None, :]) ** 2
    return out


def median_bandwidth(z):
    """sigma^2 from the median heuristic: median pairwise squared distance / 2.

    Returns 0 when every pair of points coincides. When more than half of the
    pairs coincide but not all, the median over non-zero distances is used.
    """
    d2 = _sq_dists(z)
    iu = np.triu_indices(len(z), k=1)
    vals = d2[iu]
    med = float(np.median(vals)) if vals.size else 0.0
    if med == 0.0 and np.any(vals > 0):
        med = float(np.median(vals[vals > 0]))
    return med / 2.0, d2


def mmd2_unbiased(x, y, sigma2):
    """Unbiased MMD^2 with kernel ``exp(-||a-b||^2 / (2 sigma2))``, one labeling."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.ndim == 1:
        x, y = x[:, None], y[:, None]
    kxx = np.exp(-_sq_dists(x) / (2 * sigma2))
    kyy = np.exp(-_sq_dists(y) / (2 * sigma2))
    kxy = np.exp(-np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=2) / (2 * sigma2))
    n, m = len(x), len(y)
    return float((kxx.sum() - np.trace(kxx)) / (n * (n - 1))
                 + (kyy.sum() - np.trace(kyy)) / (m * (m - 1))
                 - 2 * kxy.mean())


def _subsample(a, cap, rng):
    if cap is None or len(a) <= cap:
        return a
    return a[np.sort(rng.choice(len(a), size=cap, replace=False))]


def mmd_test(x, y, cfg: TestConfig = TestConfig()) -> PermutationResult:
    """RBF-kernel MMD^2 permutation test with a median-heuristic bandwidth.

    The bandwidth is fixed once from the observed pooled sample and reused for
    every relabeling. Groups larger than ``cfg.subsample`` are first
    subsampled without replacement.
    """
    x, y = _check(x, y)
    flags = []
    if cfg.subsample is not None and (len(x) > cfg.subsample or len(y) > cfg.subsample):
        rng = make_rng(cfg.seed, "mmd-subsample")
        x = _subsample(x, cfg.subsample, rng)
        y = _subsample(y, cfg.subsample, rng)
        flags.append(f"subsampled to at most {cfg.subsample} rows per group")
    n1, n2 = len(x), len(y)
    n = n1 + n2
    z = np.vstack([x, y])
    sigma2, d2 = median_bandwidth(z)
    if sigma2 == 0.0:
        flags.append("zero bandwidth: all points identical")
        return _result("mmd_rbf", np.zeros(cfg.permutations + 1), cfg, n1, n2, flags)
    k = np.exp(-d2 / (2.0 * sigma2))
    del d2
    np.fill_diagonal(k, 0.0)
    masks = _relabelings(n1, n, cfg, "mmd")
    stats = np.empty(len(masks))
    for start in range(0, len(masks), _CHUNK):
        m = masks[start:start + _CHUNK].astype(float)  # (b, n)
        km = k @ m.T  # (n, b): row sums of k restricted to group x
        s_xx = np.einsum("bn,nb->b", m, km)
        s_x_all = km.sum(axis=0)
        s_yy = k.sum() - 2 * s_x_all + s_xx
        s_xy = s_x_all - s_xx
        stats[start:start + _CHUNK] = (s_xx / (n1 * (n1 - 1)) + s_yy / (n2 * (n2 - 1))
                                       - 2 * s_xy / (n1 * n2))
    flags.append(f"sigma^2={sigma2:.6g}")
    return _result("mmd_rbf", stats, cfg, n1, n2, flags)


TESTS = {
    "hotelling": hotelling_t2_regularized,
    "frobenius": frobenius_covariance_test,
    "mmd": mmd_test,
}
