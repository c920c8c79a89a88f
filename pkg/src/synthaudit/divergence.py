"""Divergences between label distributions, and f-divergence generator/conjugate pairs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CategoryMismatch, DomainError, Unsupported
from .table import LabelDistribution

WASSERSTEIN_ASSUMPTION = "categorical Wasserstein uses dictionary-index ground distance"


def _pair(p, q):
    if isinstance(p, LabelDistribution) or isinstance(q, LabelDistribution):
        if not (isinstance(p, LabelDistribution) and isinstance(q, LabelDistribution)):
            raise CategoryMismatch("mixing LabelDistribution and raw vectors")
        if p.categories != q.categories:
            raise CategoryMismatch(f"{p.categories} vs {q.categories}")
        return p.proportions, q.proportions
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise CategoryMismatch(f"length {p.size} vs {q.size}")
    return p, q


def align(p: LabelDistribution, q: LabelDistribution):
    """Express both distributions over the union of their categories (p's order first)."""
    cats = list(p.categories) + [c for c in q.categories if c not in set(p.categories)]
    pp = dict(zip(p.categories, p.proportions))
    qq = dict(zip(q.categories, q.proportions))
    return (LabelDistribution(cats, [pp.get(c, 0.0) for c in cats]),
            LabelDistribution(cats, [qq.get(c, 0.0) for c in cats]))


def _kl2(a, b):
    m = a > 0
    return float(np.sum(a[m] * np.log2(a[m] / b[m])))


def jensen_shannon(p, q) -> float:
    """Jensen-Shannon divergence in bits (so it lies in [0, 1])."""
    p, q = _pair(p, q)
    m = 0.5 * (p + q)
    return min(max(0.5 * _kl2(p, m) + 0.5 * _kl2(q, m), 0.0), 1.0)


def hellinger(p, q) -> float:
    p, q = _pair(p, q)
    h = np.sqrt(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2)) / np.sqrt(2.0)
    return float(min(h, 1.0))


def wasserstein1_categorical(p, q) -> float:
    """W1 between distributions on category indices 0..C-1 with unit spacing."""
    p, q = _pair(p, q)
    return float(np.sum(np.abs(np.cumsum(p) - np.cumsum(q))[:-1])) if p.size else 0.0


def divergence_report(p: LabelDistribution, q: LabelDistribution) -> dict:
    p, q = align(p, q)
    return {
        "categories": list(p.categories),
        "real": p.proportions.tolist(),
        "synthetic": q.proportions.tolist(),
        "jensen_shannon": jensen_shannon(p, q),
        "hellinger": hellinger(p, q),
        "wasserstein": wasserstein1_categorical(p, q),
        "notes": [WASSERSTEIN_ASSUMPTION, "Jensen-Shannon uses base-2 logarithms"],
    }


# --------------------------------------------------------------------------
# f-divergence pairs

@dataclass(frozen=True)
class FDivergencePair:
    """Generator ``f``, Fenchel conjugate ``f*`` and output activation ``g_f``.

    ``conjugate_sup`` is the open upper end of the conjugate's domain
    (``inf`` when unrestricted). The ``*_grad`` callables are derivatives used
    by the GAN trainer.
    """
    name: str
    f: Callable
    f_conjugate: Callable
    output_activation: Callable
    f_conjugate_grad: Callable
    output_activation_grad: Callable
    conjugate_sup: float = np.inf
    composite: Callable | None = None       # closed form of f*(g_f(v))
    composite_grad: Callable | None = None  # its derivative in v

    def conjugate_of_activation(self, v):
        """``f*(g_f(v))`` evaluated by direct composition."""
        return self.f_conjugate(self.output_activation(v))


def _kl_f(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0)
    if np.any(u < 0):
        raise DomainError("KL generator f(u) needs u >= 0")
    return out if out.ndim else float(out)


def _exp_tm1(t):
    out = np.exp(np.asarray(t, dtype=float) - 1.0)
    return out if out.ndim else float(out)


def _h2_f(u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("squared-Hellinger generator f(u) needs u >= 0")
    out = (np.sqrt(u) - 1.0) ** 2
    return out if out.ndim else float(out)


def _h2_conj(t):
    t = np.asarray(t, dtype=float)
    if np.any(t >= 1.0):
        raise DomainError("squared-Hellinger conjugate t/(1-t) needs t < 1")
    out = t / (1.0 - t)
    return out if out.ndim else float(out)


def _h2_conj_grad(t):
    t = np.asarray(t, dtype=float)
    return 1.0 / (1.0 - t) ** 2


def _identity(v):
    return v


def _ones(v):
    return np.ones_like(np.asarray(v, dtype=float))


def _one_minus_exp_neg(v):
    return 1.0 - np.exp(-np.asarray(v, dtype=float))


def _exp_neg(v):
    return np.exp(-np.asarray(v, dtype=float))


def _expm1(v):
    # (1 - e^-v) / e^-v, without the inf/inf of the composed form for v << 0
    return np.expm1(np.asarray(v, dtype=float))


def _exp(v):
    return np.exp(np.asarray(v, dtype=float))


KULLBACK_LEIBLER = FDivergencePair("KullbackLeibler", _kl_f, _exp_tm1, _identity,
                                   _exp_tm1, _ones, composite=_exp_tm1,
                                   composite_grad=_exp_tm1)
SQUARED_HELLINGER = FDivergencePair("SquaredHellinger", _h2_f, _h2_conj, _one_minus_exp_neg,
                                    _h2_conj_grad, _exp_neg, conjugate_sup=1.0,
                                    composite=_expm1, composite_grad=_exp)

_PAIRS = {
    "kl": KULLBACK_LEIBLER, "kullbackleibler": KULLBACK_LEIBLER,
    "kullback-leibler": KULLBACK_LEIBLER,
    "h2": SQUARED_HELLINGER, "squaredhellinger": SQUARED_HELLINGER,
    "squared-hellinger": SQUARED_HELLINGER,
}


def f_pair(name: str) -> FDivergencePair:
    try:
        return _PAIRS[name.lower().replace("_", "")]
    except KeyError:
        raise Unsupported(f"unsupported f-divergence {name!r}") from None
