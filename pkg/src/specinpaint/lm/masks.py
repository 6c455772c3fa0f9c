"""Attention mask construction for both Transformer levels."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError


def causal_mask(n: int) -> np.ndarray:
    """Position i may attend to positions j <= i."""
    return np.tril(np.ones((n, n), dtype=bool))


def anti_causal_mask(n: int) -> np.ndarray:
    """Position i may attend to positions j >= i."""
    return np.triu(np.ones((n, n), dtype=bool))


def build_masks(n: int, m: np.ndarray | None = None, patch_area: int | None = None):
    """(encoder_mask, decoder_mask, cross_mask) for a sequence of length n.

    Top model (``m`` given, length n): the encoder is anti-causal with
    inpainting-masked tokens hidden everywhere, including from their own
    row; otherwise the decoder could copy a to-be-inpainted token out of
    the encoder memory during teacher forcing.  Rows that end up with no
    visible position produce zero attention output downstream.
    Cross-attention is unrestricted.

    Bottom model (``m`` absent, ``patch_area`` given): the encoder reads
    the whole top sequence, and decoder position i cross-attends only to
    its parent top position i // patch_area (diagonal cross-attention).
    """
    decoder = causal_mask(n)
    if m is not None:
        m = np.asarray(m, dtype=bool)
        if m.shape != (n,):
            raise InvalidInputError(f"inpainting mask of length {m.shape} does not match sequence length {n}")
        encoder = anti_causal_mask(n) & ~m[None, :]
        cross = np.ones((n, n), dtype=bool)
        return encoder, decoder, cross
    if patch_area is None:
        raise InvalidInputError("bottom masks need the patch area")
    if n % patch_area:
        raise InvalidInputError(f"bottom sequence length {n} not divisible by patch area {patch_area}")
    n_top = n // patch_area
    encoder = np.ones((n_top, n_top), dtype=bool)
    cross = np.zeros((n, n_top), dtype=bool)
    cross[np.arange(n), np.arange(n) // patch_area] = True
    return encoder, decoder, cross
