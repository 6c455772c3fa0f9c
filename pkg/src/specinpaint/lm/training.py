"""Prior training: batch assembly, mask sampling and optimization steps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nn
from ..errors import InvalidInputError
from .linearize import HierarchyConfig, patch_cells, top_order
from .model import CodemapTransformer


@dataclass(frozen=True)
class MaskSampler:
    """Per-token Bernoulli inpainting masks.

    A keep-probability is drawn uniformly from [keep_min, keep_max] per
    batch; each token is then hidden with probability 1 - keep.
    """

    keep_min: float = 0.8
    keep_max: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.keep_min <= self.keep_max <= 1.0:
            raise InvalidInputError("need 0 <= keep_min <= keep_max <= 1")

    def sample(self, rng: np.random.Generator, shape: tuple[int, ...]) -> tuple[np.ndarray, float]:
        keep = float(rng.uniform(self.keep_min, self.keep_max))
        return rng.random(shape) >= keep, keep


def linearize_top_grids(grids: np.ndarray, n_codes: int) -> np.ndarray:
    """(B, F, T) grids -> (B, 1 + F*T) token rows, START first."""
    grids = np.asarray(grids)
    b = grids.shape[0]
    cells = top_order(grids.shape[1:])
    f_idx = np.array([c[0] for c in cells])
    t_idx = np.array([c[1] for c in cells])
    starts = np.full((b, 1), n_codes, dtype=np.int64)
    return np.concatenate([starts, grids[:, f_idx, t_idx]], axis=1)


def linearize_bottom_grids(grids: np.ndarray, hier: HierarchyConfig, n_codes: int) -> np.ndarray:
    """(B, Fb, Tb) grids -> (B, P*(1 + Ft*Tt)) token rows in zig-zag order."""
    grids = np.asarray(grids)
    b = grids.shape[0]
    cells = patch_cells(hier)
    f_idx = np.array([c[0] for c in cells])
    t_idx = np.array([c[1] for c in cells])
    starts = np.full((b, hier.patch_area), n_codes, dtype=np.int64)
    return np.concatenate([starts, grids[:, f_idx, t_idx]], axis=1)


def top_batch(grids, pitches, instruments, hier: HierarchyConfig, n_codes: int,
              sampler: MaskSampler, rng: np.random.Generator) -> dict:
    tokens = linearize_top_grids(grids, n_codes)
    grid_mask, keep = sampler.sample(rng, tokens[:, 1:].shape)
    hidden = np.concatenate([np.zeros((tokens.shape[0], 1), dtype=bool), grid_mask], axis=1)
    return {
        "tokens": tokens,
        "hidden": hidden,
        "pitches": np.asarray(pitches),
        "instruments": np.asarray(instruments),
        "keep_probability": keep,
    }


def bottom_batch(bottom_grids, top_grids, pitches, instruments, hier: HierarchyConfig,
                 n_codes: int) -> dict:
    return {
        "bottom_tokens": linearize_bottom_grids(bottom_grids, hier, n_codes),
        "top_tokens": linearize_top_grids(top_grids, n_codes),
        "pitches": np.asarray(pitches),
        "instruments": np.asarray(instruments),
    }


def _step_metrics(logits: nn.Tensor, targets: np.ndarray, first_pred: int,
                  n_codes: int, smoothing: float) -> tuple[nn.Tensor, dict]:
    """Loss over positions whose target is a real code (not START)."""
    pred = logits[:, first_pred:-1] if first_pred else logits[:, :-1]
    pred = nn.reshape(pred, (-1, n_codes))
    flat_targets = targets.reshape(-1)
    loss = nn.cross_entropy_label_smoothed(pred, flat_targets, smoothing, n_codes)
    accuracy = float((pred.data.argmax(axis=1) == flat_targets).mean())
    return loss, {
        "loss": float(loss.data),
        "nll": nn.nll(pred.data, flat_targets),
        "accuracy": accuracy,
    }


def train_top_step(model: CodemapTransformer, batch: dict, lr: float,
                   clip: float = 5.0, smoothing: float = 0.05) -> dict:
    """Teacher-forced step: sources are ground truth, encoder-masked."""
    tokens = batch["tokens"]
    logits = model.forward_top(tokens, tokens, batch["hidden"], batch["pitches"], batch["instruments"])
    loss, metrics = _step_metrics(logits, tokens[:, 1:], 0, model.n_codes, smoothing)
    nn.zero_grads(model.params)
    loss.backward()
    metrics["grad_norm"] = nn.grad_clip(model.params, clip)
    nn.adam_step(model.params, lr=lr)
    return metrics


def train_bottom_step(model: CodemapTransformer, batch: dict, lr: float,
                      clip: float = 5.0, smoothing: float = 0.05) -> dict:
    p = model.hier.patch_area
    tokens = batch["bottom_tokens"]
    logits = model.forward_bottom(tokens, batch["top_tokens"], batch["pitches"], batch["instruments"])
    loss, metrics = _step_metrics(logits, tokens[:, p:], p - 1, model.n_codes, smoothing)
    nn.zero_grads(model.params)
    loss.backward()
    metrics["grad_norm"] = nn.grad_clip(model.params, clip)
    nn.adam_step(model.params, lr=lr)
    return metrics
