"""Nucleus (top-p) filtering and the reproducible sampling RNG."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfigError, InvalidInputError


@dataclass(frozen=True)
class SamplerConfig:
    top_p: float = 0.8
    temperature: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.top_p <= 1.0:
            raise InvalidConfigError(f"top_p must lie in (0, 1], got {self.top_p}")
        if self.temperature <= 0.0:
            raise InvalidConfigError(f"temperature must be positive, got {self.temperature}")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator: seeded results are reproducible
    across platforms and documented as part of the sampling contract."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def top_p_filter(probs: np.ndarray, p: float) -> np.ndarray:
    """Keep the smallest highest-probability prefix with mass >= p.

    Probabilities sort descending with ties broken toward lower indices;
    everything outside the prefix is zeroed and the rest renormalized.
    """
    if not 0.0 < p <= 1.0:
        raise InvalidConfigError(f"p must lie in (0, 1], got {p}")
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size == 0:
        raise InvalidInputError("probs must be a nonempty 1-D distribution")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-6:
        raise InvalidInputError("probs must be a distribution summing to 1 within 1e-6")

    order = np.argsort(-probs, kind="stable")
    csum = np.cumsum(probs[order])
    cutoff = int(np.searchsorted(csum, p, side="left"))
    kept = order[: min(cutoff + 1, probs.size)]
    out = np.zeros_like(probs)
    out[kept] = probs[kept]
    return out / out.sum()


def softmax_1d(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64) / temperature
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()
