"""Parameters, Adam updates and global gradient clipping."""

from __future__ import annotations

import numpy as np

from ..errors import NumericError
from .autodiff import Tensor


class Parameter:
    """A trainable tensor with its Adam moment accumulators."""

    def __init__(self, data):
        self.tensor = Tensor(data, requires_grad=True)
        self.m = np.zeros_like(self.tensor.data)
        self.v = np.zeros_like(self.tensor.data)
        self.step_count = 0

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def grad(self):
        return self.tensor.grad

    @property
    def shape(self):
        return self.tensor.data.shape


def zero_grads(params) -> None:
    for p in _values(params):
        p.tensor.grad = None


def _values(params):
    return params.values() if isinstance(params, dict) else params


def global_grad_norm(params) -> float:
    total = 0.0
    for p in _values(params):
        if p.grad is not None:
            total += float(np.sum(p.grad.astype(np.float64) ** 2))
    return float(np.sqrt(total))


def grad_clip(params, max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most ``max_norm``.

    Returns the pre-clip norm; raises NumericError on non-finite gradients
    so the training step can be aborted and reported.
    """
    norm = global_grad_norm(params)
    if not np.isfinite(norm):
        raise NumericError("non-finite gradient norm")
    if norm > max_norm:
        scale = max_norm / norm
        for p in _values(params):
            if p.grad is not None:
                p.tensor.grad = p.grad * scale
    return norm


def adam_step(params, lr: float, betas=(0.9, 0.999), eps: float = 1e-8) -> None:
    """One bias-corrected Adam update; parameters without grads are skipped."""
    b1, b2 = betas
    for p in _values(params):
        if p.grad is None:
            continue
        g = p.grad
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient in adam_step")
        p.step_count += 1
        p.m = b1 * p.m + (1.0 - b1) * g
        p.v = b2 * p.v + (1.0 - b2) * (g * g)
        m_hat = p.m / (1.0 - b1**p.step_count)
        v_hat = p.v / (1.0 - b2**p.step_count)
        p.tensor.data = p.tensor.data - lr * m_hat / (np.sqrt(v_hat) + eps)


def warmup_lr(base_lr: float, step: int, warmup_steps: int = 500) -> float:
    """Linear learning-rate warmup from zero over ``warmup_steps``."""
    if warmup_steps <= 0:
        return base_lr
    return base_lr * min(1.0, (step + 1) / warmup_steps)
