"""Multinomial logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteLoss
from ..table import Table
from .encoding import FeatureEncoder

LN2 = np.log(2.0)


@dataclass(frozen=True)
class LogisticParams:
    learning_rate: float = 0.5
    epochs: int = 300
    l2: float = 1e-4


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def logistic_objective(w, b, x, y_onehot, l2):
    """Negated base-2 cross-entropy plus ``(l2 / 2) ||W||^2``, with its gradients.

    Returns ``(loss, grad_w, grad_b)``.
    """
    n = x.shape[0]
    q = softmax(x @ w + b)
    logq = np.log2(np.clip(q, 1e-300, None))
    loss = -np.sum(y_onehot * logq) / n + 0.5 * l2 * np.sum(w * w)
    g = (q - y_onehot) / (n * LN2)
    return float(loss), x.T @ g + l2 * w, g.sum(axis=0)


class LogisticModel:
    """Softmax regression on standardized features (categoricals one-hot)."""

    kind = "logistic"

    def __init__(self, params: LogisticParams = LogisticParams()):
        self.params = params
        self.weights = None
        self.biases = None
        self.loss_history = []

    @property
    def l2(self):
        return self.params.l2

    @property
    def learning_rate(self):
        return self.params.learning_rate

    @property
    def epochs(self):
        return self.params.epochs

    def _design(self, t: Table):
        return (self.encoder.onehot_matrix(t) - self._mu) / self._sd

    def fit(self, train: Table) -> "LogisticModel":
        self.encoder = FeatureEncoder(train)
        self.classes = self.encoder.classes
        raw = self.encoder.onehot_matrix(train)
        self._mu = raw.mean(axis=0) if raw.size else np.zeros(raw.shape[1])
        sd = raw.std(axis=0) if raw.size else np.ones(raw.shape[1])
        self._sd = np.where(sd > 0, sd, 1.0)
        x = (raw - self._mu) / self._sd
        c = len(self.classes)
        y = np.zeros((train.n_rows, c))
        y[np.arange(train.n_rows), self.encoder.label_indices(train)] = 1.0
        w = np.zeros((x.shape[1], c))
        b = np.zeros(c)
        self.loss_history = []
        for _ in range(self.params.epochs):
            loss, gw, gb = logistic_objective(w, b, x, y, self.params.l2)
            if not np.isfinite(loss):
                raise NonFiniteLoss("logistic loss diverged; lower the learning rate")
            self.loss_history.append(loss)
            w = w - self.params.learning_rate * gw
            b = b - self.params.learning_rate * gb
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NonFiniteLoss("logistic parameters diverged")
        self.weights, self.biases = w.T.copy(), b
        return self

    def predict_proba(self, t: Table) -> np.ndarray:
        return softmax(self._design(t) @ self.weights.T + self.biases)

    def predict(self, t: Table) -> np.ndarray:
        return np.argmax(self.predict_proba(t), axis=1)

    def summary(self):
        return {"kind": self.kind, "learning_rate": self.params.learning_rate,
                "epochs": self.params.epochs, "l2": self.params.l2}


def train_logistic(train: Table, hp: LogisticParams = LogisticParams()) -> LogisticModel:
    return LogisticModel(hp).fit(train)
