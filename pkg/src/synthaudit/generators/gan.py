"""From-scratch MLP GAN trainer.

Objectives
----------
``vanilla``      D(x) = sigmoid(V(x)); D ascends mean ln D(x) + mean ln(1 - D(G(z))).
                 G descends -mean ln D(G(z)) (non-saturating) or, with
                 ``saturating=True``, mean ln(1 - D(G(z))).
``conditional``  vanilla with the one-hot label appended to the inputs of both nets.
``wgan``         critic ascends mean V(x) - mean V(G(z)), parameters clipped to
                 [-c, c] after every critic step; G descends -mean V(G(z)).
``wgan_gp``      as ``wgan`` without clipping, minus gp_weight * mean (||grad V(x_hat)|| - 1)^2
                 on uniform interpolates x_hat.
``fgan``         T = g_f(V); D ascends mean T(x) - mean f*(T(G(z))); G descends
                 -mean f*(T(G(z))).

All updates are plain stochastic gradient steps, ``theta <- theta +/- step_size * grad``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .._rng import make_rng
from ..divergence import FDivergencePair, f_pair
from ..errors import (MissingLabels, NoLabelColumn, NoNumericColumns, NonFiniteLoss,
                      ShapeMismatch, Unsupported)
from ..table import Table
from .base import MATCH_REAL, TableTemplate
from .nn import MLP

OBJECTIVES = ("vanilla", "conditional", "wgan", "wgan_gp", "fgan")
RISK_EPS = 1e-12
DOMAIN_MARGIN = 1e-9


@dataclass(frozen=True)
class GanSpec:
    objective: str = "vanilla"
    f_divergence: str = "kl"  # fgan only
    noise_dim: int = 16
    generator_layers: tuple = (64, 64)
    discriminator_layers: tuple = (64, 64)
    leaky_slope: float = 0.2
    epochs: int = 20
    batch_size: int = 128
    step_size: float = 0.01
    clip: float = 0.01
    gp_weight: float = 10.0
    critic_steps: int = 1
    saturating: bool = False
    init: str = "he"  # or "zeros"
    seed: int = 0

    def __post_init__(self):
        obj = self.objective.lower().replace("-", "_")
        if obj not in OBJECTIVES:
            raise Unsupported(f"unknown GAN objective {self.objective!r}")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "generator_layers", tuple(self.generator_layers))
        object.__setattr__(self, "discriminator_layers", tuple(self.discriminator_layers))
        if obj == "fgan":
            f_pair(self.f_divergence)

    @property
    def conditional(self):
        return self.objective == "conditional"

    @property
    def pair(self) -> FDivergencePair | None:
        return f_pair(self.f_divergence) if self.objective == "fgan" else None

    def to_dict(self):
        d = asdict(self)
        d["generator_layers"] = list(self.generator_layers)
        d["discriminator_layers"] = list(self.discriminator_layers)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class TrainTrace:
    header: dict
    step: list = field(default_factory=list)
    epoch: list = field(default_factory=list)
    d_loss: list = field(default_factory=list)
    g_loss: list = field(default_factory=list)
    domain_clamps: int = 0

    def record(self, epoch, d, g):
        self.step.append(len(self.step))
        self.epoch.append(epoch)
        self.d_loss.append(float(d))
        self.g_loss.append(float(g))

    def epoch_means(self):
        """(epoch, mean discriminator loss, mean generator loss) per epoch."""
        ep = np.asarray(self.epoch)
        out = []
        for e in np.unique(ep):
            rows = ep == e
            out.append((int(e), float(np.mean(np.asarray(self.d_loss)[rows])),
                        float(np.mean(np.asarray(self.g_loss)[rows]))))
        return out

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "epoch", "d_loss", "g_loss"])
        for row in zip(self.step, self.epoch, self.d_loss, self.g_loss):
            w.writerow([row[0], row[1], repr(row[2]), repr(row[3])])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return {"header": self.header, "domain_clamps": self.domain_clamps,
                "epoch_means": [list(r) for r in self.epoch_means()],
                "n_steps": len(self.step)}


def vanilla_gan_risk(d_real, d_fake) -> float:
    """Mean ln D(x) plus mean ln(1 - D(G(z))), natural log, inputs clamped to [eps, 1-eps]."""
    r = np.asarray(d_real, dtype=float).ravel()
    f = np.asarray(d_fake, dtype=float).ravel()
    if r.size == 0 or f.size == 0:
        raise ShapeMismatch("vanilla risk needs at least one real and one fake output")
    r = np.clip(r, RISK_EPS, 1 - RISK_EPS)
    f = np.clip(f, RISK_EPS, 1 - RISK_EPS)
    return float(np.mean(np.log(r)) + np.mean(np.log1p(-f)))


def _log_sigmoid(v):
    return -np.logaddexp(0.0, -v)


def _sigmoid(v):
    return np.exp(_log_sigmoid(v))


# --------------------------------------------------------------------------
# objective terms on raw discriminator outputs V

def _fgan_conj(pair, v):
    """f*(g_f(v)) and its derivative in v, clamping T below the conjugate's domain edge."""
    t = pair.output_activation(v)
    limit = pair.conjugate_sup - DOMAIN_MARGIN
    out = t > limit
    if pair.composite is not None:
        inside = np.where(out, 0.0, v)
        val = np.where(out, pair.f_conjugate(limit), pair.composite(inside))
        grad = np.where(out, 0.0, pair.composite_grad(inside))
    else:
        t = np.where(out, limit, t)
        val = pair.f_conjugate(t)
        grad = np.where(out, 0.0, pair.f_conjugate_grad(t) * pair.output_activation_grad(v))
    return val, grad, int(out.sum())


def d_terms(spec: GanSpec, v_real, v_fake):
    """Discriminator objective (to ascend) and its derivatives in V_real, V_fake."""
    nr, nf = v_real.shape[0], v_fake.shape[0]
    clamps = 0
    if spec.objective in ("vanilla", "conditional"):
        val = _log_sigmoid(v_real).mean() + _log_sigmoid(-v_fake).mean()
        gr = (1.0 - _sigmoid(v_real)) / nr
        gf = -_sigmoid(v_fake) / nf
    elif spec.objective in ("wgan", "wgan_gp"):
        val = v_real.mean() - v_fake.mean()
        gr = np.full_like(v_real, 1.0 / nr)
        gf = np.full_like(v_fake, -1.0 / nf)
    else:
        pair = spec.pair
        c_val, c_grad, clamps = _fgan_conj(pair, v_fake)
        val = np.mean(pair.output_activation(v_real)) - np.mean(c_val)
        gr = pair.output_activation_grad(v_real) / nr
        gf = -c_grad / nf
    return float(val), gr, gf, clamps


def g_terms(spec: GanSpec, v_fake):
    """Generator loss (to descend) and its derivative in V_fake."""
    nf = v_fake.shape[0]
    clamps = 0
    if spec.objective in ("vanilla", "conditional"):
        if spec.saturating:
            val = _log_sigmoid(-v_fake).mean()
            g = -_sigmoid(v_fake) / nf
        else:
            val = -_log_sigmoid(v_fake).mean()
            g = -(1.0 - _sigmoid(v_fake)) / nf
    elif spec.objective in ("wgan", "wgan_gp"):
        val = -v_fake.mean()
        g = np.full_like(v_fake, -1.0 / nf)
    else:
        c_val, c_grad, clamps = _fgan_conj(spec.pair, v_fake)
        val = -np.mean(c_val)
        g = -c_grad / nf
    return float(val), g, clamps


# --------------------------------------------------------------------------
# full objectives over network parameters

@dataclass
class Batch:
    """One step's fixed randomness: real rows, noise, conditions and interpolation weights."""
    x_real: np.ndarray
    z: np.ndarray
    cond_real: np.ndarray  # (n, C) one-hot or (n, 0)
    cond_fake: np.ndarray
    eps: np.ndarray | None = None  # (n, 1) interpolation weights for the gradient penalty


def _with_cond(x, cond):
    return np.hstack([x, cond]) if cond.shape[1] else x


def gradient_penalty(spec: GanSpec, disc: MLP, x_hat, cond):
    """gp_weight * mean (||d V / d x_hat|| - 1)^2 and its parameter gradients."""
    p = x_hat.shape[1]
    g_full, aux = disc.input_gradient(_with_cond(x_hat, cond))
    g = g_full[:, :p]
    norm = np.sqrt(np.sum(g * g, axis=1))
    n = x_hat.shape[0]
    val = spec.gp_weight * float(np.mean((norm - 1.0) ** 2))
    safe = np.where(norm > 0, norm, 1.0)
    coef = np.where(norm > 0, 2.0 * spec.gp_weight * (norm - 1.0) / (n * safe), 0.0)
    dg = np.zeros_like(g_full)
    dg[:, :p] = coef[:, None] * g
    return val, disc.penalty_backward(aux, dg)


def discriminator_objective(spec: GanSpec, disc: MLP, gen: MLP, batch: Batch):
    """Value the discriminator ascends and its gradients (ascent direction).

    Returns ``(value, grads, fake, clamps)``; ``fake`` is the generated batch.
    """
    fake = gen(_with_cond(batch.z, batch.cond_fake))
    v_r, cache_r = disc.forward(_with_cond(batch.x_real, batch.cond_real))
    v_f, cache_f = disc.forward(_with_cond(fake, batch.cond_fake))
    val, gr, gf, clamps = d_terms(spec, v_r, v_f)
    grads_r, _ = disc.backward(cache_r, gr)
    grads_f, _ = disc.backward(cache_f, gf)
    grads = [a + b for a, b in zip(grads_r, grads_f)]
    if spec.objective == "wgan_gp":
        eps = batch.eps
        x_hat = eps * batch.x_real + (1.0 - eps) * fake
        pen, pgrads = gradient_penalty(spec, disc, x_hat, batch.cond_real)
        val -= pen
        grads = [a - b for a, b in zip(grads, pgrads)]
    return val, grads, fake, clamps


def generator_objective(spec: GanSpec, disc: MLP, gen: MLP, batch: Batch):
    """Loss the generator descends and its gradients. Returns ``(value, grads, clamps)``."""
    p = gen.sizes[-1]
    fake, cache_g = gen.forward(_with_cond(batch.z, batch.cond_fake))
    v_f, cache_d = disc.forward(_with_cond(fake, batch.cond_fake))
    val, gv, clamps = g_terms(spec, v_f)
    _, dx = disc.backward(cache_d, gv)
    grads, _ = gen.backward(cache_g, dx[:, :p])
    return val, grads, clamps


# --------------------------------------------------------------------------
# training

class GanGenerator:
    """A trained generator network plus the bookkeeping needed to emit tables."""

    kind = "gan"

    def __init__(self, template: TableTemplate, spec: GanSpec, net: MLP):
        self.template = template
        self.spec = spec
        self.net = net

    @property
    def conditional(self):
        return self.spec.conditional

    def sample(self, n: int, labels=None, seed: int = 0) -> Table:
        return gan_sample(self, n, labels, seed)

    def to_dict(self):
        return {"template": self.template.to_dict(), "spec": self.spec.to_dict(),
                "network": self.net.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(TableTemplate.from_dict(d["template"]), GanSpec.from_dict(d["spec"]),
                   MLP.from_dict(d["network"]))


def _onehot(idx, c):
    out = np.zeros((idx.size, c))
    out[np.arange(idx.size), idx] = 1.0
    return out


def _finite(params):
    return all(np.all(np.isfinite(p)) for p in params)


def train_gan(train: Table, spec: GanSpec = GanSpec()):
    """Alternate discriminator ascent and generator descent; returns (generator, trace)."""
    tpl = TableTemplate.from_table(train)
    if not tpl.numeric:
        raise NoNumericColumns("the GAN generates numeric features; none found")
    if spec.conditional and tpl.label is None:
        raise NoLabelColumn("a conditional GAN needs a label column")
    x_all = tpl.scale(train)
    n, p = x_all.shape
    if n == 0:
        raise ShapeMismatch("cannot train on an empty table")
    n_cond = tpl.n_classes if spec.conditional else 0
    y_all = tpl.class_indices(train)
    cond_all = _onehot(y_all, n_cond) if n_cond else np.empty((n, 0))

    gen = MLP((spec.noise_dim + n_cond,) + spec.generator_layers + (p,), spec.leaky_slope,
              make_rng(spec.seed, "gan-init", "generator"), spec.init)
    disc = MLP((p + n_cond,) + spec.discriminator_layers + (1,), spec.leaky_slope,
               make_rng(spec.seed, "gan-init", "discriminator"), spec.init)
    if spec.objective == "wgan":
        disc.params = [np.clip(w, -spec.clip, spec.clip) for w in disc.params]
    if spec.objective == "fgan":
        # start at V = 0: the activation derivatives grow like exp(|V|), so a
        # random output layer can put the first SGD step far outside g_f's
        # well-conditioned region
        disc.params[-2] = np.zeros_like(disc.params[-2])
    rng = make_rng(spec.seed, "gan-train")
    header = {**spec.to_dict(), "n_rows": n, "n_numeric": p,
              "generator_sizes": list(gen.sizes), "discriminator_sizes": list(disc.sizes)}
    trace = TrainTrace(header)
    bs = min(spec.batch_size, n)
    steps = math.ceil(n / bs)
    eta = spec.step_size

    def draw(idx):
        m = idx.size
        cond_r = cond_all[idx]
        # fake conditions mirror the real batch's labels
        eps = rng.random((m, 1)) if spec.objective == "wgan_gp" else None
        return Batch(x_all[idx], rng.standard_normal((m, spec.noise_dim)), cond_r, cond_r, eps)

    def fail(msg):
        raise NonFiniteLoss(msg, trace)

    for epoch in range(spec.epochs):
        order = rng.permutation(n)
        for s in range(steps):
            idx = order[s * bs:(s + 1) * bs]
            for c in range(spec.critic_steps):
                b = draw(idx if c == 0 else rng.integers(0, n, size=idx.size))
                d_val, grads, _, clamps = discriminator_objective(spec, disc, gen, b)
                trace.domain_clamps += clamps
                if not math.isfinite(d_val) or not _finite(grads):
                    fail(f"discriminator objective not finite at step {len(trace.step)}")
                disc.params = [w + eta * g for w, g in zip(disc.params, grads)]
                if spec.objective == "wgan":
                    disc.params = [np.clip(w, -spec.clip, spec.clip) for w in disc.params]
            b = draw(rng.integers(0, n, size=idx.size))
            g_val, grads, clamps = generator_objective(spec, disc, gen, b)
            trace.domain_clamps += clamps
            if not math.isfinite(g_val) or not _finite(grads):
                fail(f"generator loss not finite at step {len(trace.step)}")
            gen.params = [w - eta * g for w, g in zip(gen.params, grads)]
            trace.record(epoch, d_val, g_val)
        if not (_finite(gen.params) and _finite(disc.params)):
            fail(f"parameters diverged in epoch {epoch}")
    model = GanGenerator(tpl, spec, gen)
    model.discriminator = disc
    return model, trace


def gan_sample(generator: GanGenerator, n: int, labels=None, seed: int = 0) -> Table:
    """Generate ``n`` rows.

    ``labels`` is a list of class names (one per row), ``"match_real"`` for
    training-set proportions, or None. Conditional generators require one of
    the first two; unconditional ones default to training proportions.
    """
    tpl = generator.template
    rng = make_rng(seed, "gan-sample")
    if labels is None:
        if generator.conditional:
            raise MissingLabels("a conditional generator needs labels or 'match_real'")
        labels = MATCH_REAL
    if isinstance(labels, str):
        counts = tpl.class_counts_for(n, labels)
        idx = rng.permutation(np.repeat(np.arange(tpl.n_classes), counts))
    else:
        idx = tpl.labels_to_indices(labels, n)
    z = rng.standard_normal((n, generator.spec.noise_dim))
    if generator.conditional:
        z = np.hstack([z, _onehot(idx, tpl.n_classes)])
    x = generator.net(z) if n else np.empty((0, len(tpl.numeric)))
    if not np.all(np.isfinite(x)):
        raise NonFiniteLoss("generator produced non-finite values")
    return tpl.assemble(x, idx, rng)
