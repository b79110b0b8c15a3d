"""Binary logistic regression trained by full-batch gradient descent.

No randomness anywhere: zero initialization and whole-dataset gradients make
refits on identical data bit-identical. The einsum reductions are deliberate,
they keep the arithmetic inside numpy's own loops instead of a threaded BLAS
whose summation order could vary between runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .common import as_xy_arrays

#: probability clamp that keeps log() finite in the loss
PROB_CLAMP = 1e-12


def logistic(z):
    """Numerically stable 1/(1+exp(-z)) for scalars or arrays.

    Split by sign so exp() only ever sees non-positive arguments; no overflow
    warnings for any finite input.
    """
    arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ez = np.exp(arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    if np.ndim(z) == 0:
        return float(out[0])
    return out.reshape(np.shape(z))


@dataclass(frozen=True)
class LogisticHyper:
    learning_rate: float = 0.1
    iterations: int = 5000
    l2: float = 0.0


@dataclass(eq=False)
class LogisticModel:
    """Trained weights; label 1 (invasive) is the positive class.

    Decision rule: probability >= 0.5 predicts 1, so the knife-edge case
    resolves to invasive.
    """

    weights: np.ndarray
    bias: float
    schema_hash: str = ""
    hyper: LogisticHyper = LogisticHyper()
    loss_history: list[float] = field(default_factory=list, repr=False)

    def predict_proba(self, vector) -> float:
        v = np.asarray(vector, dtype=float)
        if v.shape != self.weights.shape:
            raise ValueError(
                f"feature vector has length {v.size}, model expects {self.weights.size}"
            )
        return logistic(float(np.dot(self.weights, v)) + self.bias)

    def predict(self, vector) -> int:
        return 1 if self.predict_proba(vector) >= 0.5 else 0


def _forward(X: np.ndarray, w: np.ndarray, b: float) -> np.ndarray:
    return logistic(np.einsum("ij,j->i", X, w) + b)


def _loss(X, labels, w, b, l2) -> float:
    p = np.clip(_forward(X, w, b), PROB_CLAMP, 1.0 - PROB_CLAMP)
    data_term = -float(np.mean(labels * np.log(p) + (1.0 - labels) * np.log1p(-p)))
    return data_term + 0.5 * l2 * float(np.dot(w, w))


def _gradient(X, labels, w, b, l2) -> tuple[np.ndarray, float]:
    g = _forward(X, w, b) - labels
    grad_w = np.einsum("ij,i->j", X, g) / X.shape[0] + l2 * w
    return grad_w, float(g.mean())


def log_loss(weights, bias, x, y, l2: float = 0.0) -> float:
    """Mean cross-entropy plus (l2/2)*||w||^2, the quantity training descends."""
    X, labels = as_xy_arrays(x, y)
    w = np.asarray(weights, dtype=float)
    if w.shape != (X.shape[1],):
        raise ValueError(f"weights have length {w.size}, data has {X.shape[1]} features")
    return _loss(X, labels, w, bias, l2)


def loss_gradient(weights, bias, x, y, l2: float = 0.0) -> tuple[np.ndarray, float]:
    """Analytic gradient of log_loss in (weights, bias)."""
    X, labels = as_xy_arrays(x, y)
    w = np.asarray(weights, dtype=float)
    if w.shape != (X.shape[1],):
        raise ValueError(f"weights have length {w.size}, data has {X.shape[1]} features")
    return _gradient(X, labels, w, bias, l2)


def train_logistic(x, y, hyper: LogisticHyper = LogisticHyper()) -> LogisticModel:
    """Fit by full-batch gradient descent from zero-initialized parameters.

    Records the loss once per iteration (plus the final state) so callers can
    watch the descent; diverging to non-finite weights is an error, not a
    silently broken model.
    """
    X, labels = as_xy_arrays(x, y)
    if hyper.learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    if hyper.iterations < 0:
        raise ValueError("iterations must be non-negative")
    if hyper.l2 < 0:
        raise ValueError("l2 must be non-negative")

    w = np.zeros(X.shape[1])
    b = 0.0
    losses = []
    for _ in range(hyper.iterations):
        losses.append(_loss(X, labels, w, b, hyper.l2))
        grad_w, grad_b = _gradient(X, labels, w, b, hyper.l2)
        w = w - hyper.learning_rate * grad_w
        b = b - hyper.learning_rate * grad_b
    losses.append(_loss(X, labels, w, b, hyper.l2))

    if not np.all(np.isfinite(w)) or not np.isfinite(b):
        raise ArithmeticError("training diverged to non-finite weights; lower the learning rate")
    return LogisticModel(weights=w, bias=float(b), hyper=hyper, loss_history=losses)
