"""Linear max-margin classifier trained with seeded stochastic subgradient steps.

The 0/1 labels are mapped to -1/+1 internally. At step t one sample is drawn
from the deterministic generator, the learning rate is 1/(lambda*t), and the
weight shrink (1 - 1/t) applies every step while the hinge push applies only
on margin violations. The bias rides along unregularized. Same seed, same
model, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..rng import SplitMix64
from .common import as_xy_arrays


@dataclass(frozen=True)
class SvmHyper:
    lam: float = 0.01              # regularization strength, serialized as "lambda"
    iterations: int | None = None  # total single-sample steps; None means 10 per sample
    seed: int = 42


@dataclass(eq=False)
class SvmModel:
    """Trained linear separator; score >= 0 predicts 1 (invasive)."""

    weights: np.ndarray
    bias: float
    schema_hash: str = ""
    hyper: SvmHyper = SvmHyper()

    def decision(self, vector) -> float:
        v = np.asarray(vector, dtype=float)
        if v.shape != self.weights.shape:
            raise ValueError(
                f"feature vector has length {v.size}, model expects {self.weights.size}"
            )
        return float(np.dot(self.weights, v)) + self.bias

    def predict(self, vector) -> int:
        return 1 if self.decision(vector) >= 0.0 else 0


def hinge_objective(weights, bias, x, y, lam: float) -> float:
    """(lam/2)*||w||^2 plus the mean hinge loss, labels given as 0/1."""
    X, labels = as_xy_arrays(x, y)
    w = np.asarray(weights, dtype=float)
    if w.shape != (X.shape[1],):
        raise ValueError(f"weights have length {w.size}, data has {X.shape[1]} features")
    signs = 2.0 * labels - 1.0
    margins = signs * (np.einsum("ij,j->i", X, w) + bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * lam * float(np.dot(w, w)) + float(hinge.mean())


def train_linear_svm(x, y, hyper: SvmHyper = SvmHyper()) -> SvmModel:
    """Stochastic subgradient descent on the hinge objective from zero weights.

    The returned model records the resolved step count in its hyper so a
    persisted model is self-describing even when the default (10 steps per
    sample) was used.
    """
    X, labels = as_xy_arrays(x, y)
    n = X.shape[0]
    if hyper.lam <= 0:
        raise ValueError("lam must be positive")
    steps = hyper.iterations if hyper.iterations is not None else 10 * n
    if steps < 0:
        raise ValueError("iterations must be non-negative")

    signs = 2.0 * labels - 1.0
    rng = SplitMix64(hyper.seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    for t in range(1, steps + 1):
        i = rng.below(n)
        eta = 1.0 / (hyper.lam * t)
        margin = signs[i] * (float(np.dot(w, X[i])) + b)
        w *= 1.0 - 1.0 / t  # the (1 - eta*lam) shrink, applied every step
        if margin < 1.0:
            w += (eta * signs[i]) * X[i]
            b += eta * signs[i]

    if not np.all(np.isfinite(w)) or not np.isfinite(b):
        raise ArithmeticError("training diverged to non-finite weights")
    return SvmModel(weights=w, bias=float(b), hyper=replace(hyper, iterations=steps))
