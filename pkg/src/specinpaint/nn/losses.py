"""Classification loss for the codemap Transformers."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError, InvalidShapeError
from .autodiff import Tensor, _make, as_tensor


def smoothed_targets(targets: np.ndarray, smoothing_mass: float, n_classes: int) -> np.ndarray:
    """One-hot rows with ``smoothing_mass`` spread over the other classes."""
    dist = np.full((targets.size, n_classes), smoothing_mass / (n_classes - 1))
    dist[np.arange(targets.size), targets] = 1.0 - smoothing_mass
    return dist


def cross_entropy_label_smoothed(logits, targets, smoothing_mass: float, n_classes: int) -> Tensor:
    """Mean cross-entropy against label-smoothed targets.

    The target distribution puts ``1 - m`` on the true class and
    ``m/(K-1)`` on each of the others.
    """
    logits = as_tensor(logits)
    targets = np.asarray(targets).ravel()
    if not 0.0 <= smoothing_mass < 1.0:
        raise InvalidInputError(f"smoothing mass must be in [0, 1), got {smoothing_mass}")
    if logits.shape[-1] != n_classes:
        raise InvalidShapeError(f"logits have {logits.shape[-1]} classes, expected {n_classes}")
    flat = logits.data.reshape(-1, n_classes)
    if flat.shape[0] != targets.size:
        raise InvalidShapeError("number of logit rows and targets differ")
    if targets.size and (targets.min() < 0 or targets.max() >= n_classes):
        raise InvalidInputError(f"targets must lie in [0, {n_classes})")

    shifted = flat - flat.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    dist = smoothed_targets(targets, smoothing_mass, n_classes).astype(flat.dtype)
    loss = -(dist * logp).sum(axis=1).mean()

    def backward(g):
        soft = np.exp(logp)
        return ((g * (soft - dist) / flat.shape[0]).reshape(logits.shape),)

    return _make(np.asarray(loss, dtype=flat.dtype), (logits,), backward)


def nll(logits: np.ndarray, targets: np.ndarray) -> float:
    """Plain mean negative log-likelihood (metric only, no gradients)."""
    flat = np.asarray(logits, dtype=np.float64).reshape(-1, np.asarray(logits).shape[-1])
    targets = np.asarray(targets).ravel()
    shifted = flat - flat.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return float(-logp[np.arange(targets.size), targets].mean())
