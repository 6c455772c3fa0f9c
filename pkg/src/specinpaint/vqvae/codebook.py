"""Vector-quantization codebook with EMA re-estimation.

Codewords are not gradient-trained: assignments update exponential moving
averages of per-code counts and vector sums, and each codeword is the
smoothed ratio of the two.  EMA state is initialized self-consistently
(count 1, sum = codeword) so unused codes keep a stable ratio while both
sides decay.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, InvalidShapeError
from ..nn import Tensor, as_tensor, sub, tensor_mean

us_dtype = np.int64


@dataclass
class Codebook:
    codewords: np.ndarray  # (K, D)
    ema_counts: np.ndarray  # (K,)
    ema_sums: np.ndarray  # (K, D)
    decay: float = 0.99
    epsilon: float = 1e-5
    unused_steps: np.ndarray = field(default=None)  # consecutive steps without assignments

    def __post_init__(self):
        if self.codewords.ndim != 2 or self.codewords.shape[0] < 2:
            raise InvalidInputError("codebook needs a (K, D) matrix with K >= 2")
        if not 0.0 < self.decay < 1.0:
            raise InvalidInputError(f"decay must lie in (0, 1), got {self.decay}")
        if self.unused_steps is None:
            self.unused_steps = np.zeros(self.size, dtype=us_dtype)

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]


def init_codebook(n_codes: int, code_dim: int, encoder_output_std: float, rng: np.random.Generator,
                  decay: float = 0.99, epsilon: float = 1e-5) -> Codebook:
    """Draw codewords from Normal(0, std^2) matched to the encoder's
    initial output scale (0.001 by default at the call sites)."""
    words = rng.normal(0.0, encoder_output_std, (n_codes, code_dim))
    return Codebook(
        codewords=words,
        ema_counts=np.ones(n_codes),
        ema_sums=words.copy(),
        decay=decay,
        epsilon=epsilon,
    )


def nearest_codes(z: np.ndarray, codewords: np.ndarray) -> np.ndarray:
    """Index of the closest codeword per row; ties go to the lowest index."""
    d = z[:, None, :] - codewords[None, :, :]
    return np.square(d).sum(axis=2).argmin(axis=1)


def quantize(z, cb: Codebook):
    """Project rows of z onto the codebook.

    Returns (indices, straight-through z_q, codebook_loss, commit_loss).
    The straight-through output carries d(z_q)/d(z) = identity so decoder
    gradients reach the encoder unchanged.
    """
    z = as_tensor(z)
    if z.ndim != 2 or z.shape[1] != cb.dim:
        raise InvalidShapeError(f"expected (N, {cb.dim}) vectors, got {z.shape}")
    indices = nearest_codes(z.data, cb.codewords)
    z_q = cb.codewords[indices].astype(z.data.dtype)

    diff = z.data - z_q
    residual = sub(z, Tensor(z_q))
    commit = tensor_mean(residual * residual)
    codebook_loss = Tensor(np.asarray(np.mean(diff * diff), dtype=z.data.dtype))
    z_q_st = z + Tensor(z_q - z.data)
    return indices, z_q_st, codebook_loss, commit


def ema_update(cb: Codebook, z: np.ndarray, indices: np.ndarray) -> Codebook:
    """One EMA step: decay counts/sums toward this batch's assignments and
    refresh codewords as smoothed-count ratios."""
    z = np.asarray(z, dtype=np.float64)
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= cb.size):
        raise InvalidInputError("code index out of range")
    batch_counts = np.bincount(indices, minlength=cb.size).astype(np.float64)
    batch_sums = np.zeros_like(cb.ema_sums)
    np.add.at(batch_sums, indices, z)

    cb.ema_counts = cb.decay * cb.ema_counts + (1.0 - cb.decay) * batch_counts
    cb.ema_sums = cb.decay * cb.ema_sums + (1.0 - cb.decay) * batch_sums

    total = cb.ema_counts.sum()
    smoothed = (cb.ema_counts + cb.epsilon) / (total + cb.size * cb.epsilon) * total
    cb.codewords = cb.ema_sums / smoothed[:, None]

    cb.unused_steps = np.where(batch_counts > 0, 0, cb.unused_steps + 1)
    return cb


def reseed_dead_codes(cb: Codebook, z: np.ndarray, rng: np.random.Generator, max_unused: int) -> int:
    """Re-seed codes unused for ``max_unused`` consecutive steps with random
    encoder outputs; returns how many were reset."""
    dead = np.flatnonzero(cb.unused_steps >= max_unused)
    if dead.size == 0 or z.shape[0] == 0:
        return 0
    picks = rng.integers(0, z.shape[0], dead.size)
    cb.codewords[dead] = z[picks]
    cb.ema_sums[dead] = z[picks]
    cb.ema_counts[dead] = 1.0
    cb.unused_steps[dead] = 0
    return int(dead.size)


def perplexity(indices: np.ndarray, n_codes: int) -> float:
    """exp(entropy) of the empirical code distribution; in [1, K]."""
    indices = np.asarray(indices).ravel()
    if indices.size == 0:
        raise InvalidInputError("perplexity of an empty index set is undefined")
    probs = np.bincount(indices, minlength=n_codes) / indices.size
    nz = probs[probs > 0]
    return float(np.exp(-(nz * np.log(nz)).sum()))
