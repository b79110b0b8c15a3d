"""Input validation shared by the trainers."""

from __future__ import annotations

import numpy as np


def as_xy_arrays(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate and convert samples to float arrays.

    x must be a non-empty list of equal-length numeric vectors, y a matching
    list of 0/1 labels. Returns (X[n,d], labels[n]) as float64.
    """
    try:
        X = np.asarray(list(x), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError("x must be a list of equal-length numeric feature vectors") from exc
    labels = np.asarray(list(y), dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("x must be a non-empty list of non-empty feature vectors")
    if labels.shape != (X.shape[0],):
        raise ValueError(f"got {X.shape[0]} samples but {labels.size} labels")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be 0 or 1")
    return X, labels
