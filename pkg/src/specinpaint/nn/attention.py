"""Multi-head scaled dot-product attention with Boolean masks."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidConfigError, InvalidShapeError
from .autodiff import Tensor, as_tensor, masked_softmax, matmul, mul, reshape, swapaxes


def _split_heads(t: Tensor, n_heads: int) -> Tensor:
    """(..., L, D) -> (..., heads, L, D/heads)."""
    *lead, length, dim = t.shape
    t = reshape(t, (*lead, length, n_heads, dim // n_heads))
    return swapaxes(t, -3, -2)


def _merge_heads(t: Tensor) -> Tensor:
    """(..., heads, L, dh) -> (..., L, heads*dh)."""
    t = swapaxes(t, -3, -2)
    *lead, length, heads, dh = t.shape
    return reshape(t, (*lead, length, heads * dh))


def multi_head_attention(q, k, v, mask, n_heads: int) -> Tensor:
    """Attention over the last two axes of (..., L, D) operands.

    ``mask`` is a Boolean (len_q, len_k) grid (or broadcastable to the
    score shape); True marks an allowed connection.  Masked positions get
    exactly zero weight and fully-masked query rows yield zero output.
    """
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    dim = q.shape[-1]
    if dim % n_heads:
        raise InvalidConfigError(f"model dim {dim} not divisible by {n_heads} heads")
    if k.shape[-1] != dim or v.shape[-1] != dim:
        raise InvalidShapeError("q, k, v must share the model dimension")
    if k.shape[-2] != v.shape[-2]:
        raise InvalidShapeError("k and v must have the same length")

    qs, ks, vs = (_split_heads(t, n_heads) for t in (q, k, v))
    scores = mul(matmul(qs, swapaxes(ks, -1, -2)), 1.0 / np.sqrt(dim // n_heads))
    if mask is None:
        mask = np.ones((q.shape[-2], k.shape[-2]), dtype=bool)
    weights = masked_softmax(scores, np.asarray(mask, dtype=bool))
    return _merge_heads(matmul(weights, vs))
