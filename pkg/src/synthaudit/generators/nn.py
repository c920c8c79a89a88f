"""Multilayer perceptron with leaky-rectifier hidden layers and hand-written backprop.

Layers compute ``a = h W + b``; every hidden layer applies a leaky rectifier
and the last layer is linear. Parameters are a flat list
``[W1, b1, W2, b2, ...]`` so optimizers and gradient checks can treat them
uniformly.
"""

from __future__ import annotations

import numpy as np


class MLP:
    def __init__(self, sizes, slope=0.2, rng=None, init="he"):
        self.sizes = tuple(int(s) for s in sizes)
        self.slope = float(slope)
        self.params = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if init == "zeros":
                w = np.zeros((fan_in, fan_out))
            else:
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            self.params += [w, np.zeros(fan_out)]

    @property
    def n_layers(self):
        return len(self.params) // 2

    def copy(self):
        out = MLP.__new__(MLP)
        out.sizes, out.slope = self.sizes, self.slope
        out.params = [p.copy() for p in self.params]
        return out

    def forward(self, x):
        """Output and a cache of layer inputs and pre-activations."""
        h = np.asarray(x, dtype=float)
        inputs, pre = [], []
        for k in range(self.n_layers):
            w, b = self.params[2 * k], self.params[2 * k + 1]
            inputs.append(h)
            a = h @ w + b
            pre.append(a)
            h = a if k == self.n_layers - 1 else np.where(a > 0, a, self.slope * a)
        return h, (inputs, pre)

    def __call__(self, x):
        return self.forward(x)[0]

    def _mask(self, a):
        return np.where(a > 0, 1.0, self.slope)

    def backward(self, cache, grad_out):
        """Parameter gradients and input gradient given dLoss/dOutput."""
        inputs, pre = cache
        grads = [None] * len(self.params)
        delta = np.asarray(grad_out, dtype=float)
        for k in reversed(range(self.n_layers)):
            if k != self.n_layers - 1:
                delta = delta * self._mask(pre[k])
            grads[2 * k] = inputs[k].T @ delta
            grads[2 * k + 1] = delta.sum(axis=0)
            delta = delta @ self.params[2 * k].T
        return grads, delta

    def input_gradient(self, x):
        """Per-row gradient of a scalar-output network with respect to its input.

        Returns the gradient and the per-layer output deltas needed by
        :meth:`penalty_backward`.
        """
        _, cache = self.forward(x)
        inputs, pre = cache
        deltas = [None] * self.n_layers
        delta = np.ones((inputs[0].shape[0], 1))
        for k in reversed(range(self.n_layers)):
            if k != self.n_layers - 1:
                delta = delta * self._mask(pre[k])
            deltas[k] = delta
            delta = delta @ self.params[2 * k].T
        return delta, (cache, deltas)

    def penalty_backward(self, aux, grad_g):
        """Parameter gradients of a loss that depends on the input gradient ``g``.

        For a piecewise-linear network the input gradient is a product of
        weight matrices and fixed rectifier masks, so dLoss/dW_k is the outer
        product of ``grad_g`` pushed forward through layers < k (masks in
        place of activations, no biases) with the output delta of layer k.
        Biases only enter through the masks and get zero gradient.
        """
        (inputs, pre), deltas = aux
        grads = [None] * len(self.params)
        t = np.asarray(grad_g, dtype=float)
        for k in range(self.n_layers):
            grads[2 * k] = t.T @ deltas[k]
            grads[2 * k + 1] = np.zeros_like(self.params[2 * k + 1])
            if k != self.n_layers - 1:
                t = (t @ self.params[2 * k]) * self._mask(pre[k])
        return grads

    def to_dict(self):
        return {"sizes": list(self.sizes), "slope": self.slope,
                "params": [p.tolist() for p in self.params]}

    @classmethod
    def from_dict(cls, d):
        out = cls.__new__(cls)
        out.sizes = tuple(d["sizes"])
        out.slope = float(d["slope"])
        out.params = [np.asarray(p, dtype=float) for p in d["params"]]
        return out
