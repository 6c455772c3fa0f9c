"""Generation orchestration: regions to masks, masked autoregressive
sampling, the inpainting modes and from-scratch generation.

The central guarantee: tokens outside the inpainting mask are preserved
bit-exactly, and a fixed seed makes every operation deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nn
from ..errors import InvalidInputError
from ..lm import (
    CodemapTransformer,
    ConditioningLabels,
    HierarchyConfig,
    LinearSeq,
    delinearize_bottom,
    delinearize_top,
    linearize_bottom,
    linearize_mask_bottom,
    linearize_mask_top,
    linearize_top,
)
from ..vqvae import CodemapPair
from .topp import SamplerConfig, make_rng, softmax_1d, top_p_filter


@dataclass(frozen=True)
class RegionSelection:
    """Rectangle of codemap cells to regenerate, on one hierarchy level."""

    level: str  # "top" or "bottom"
    freq_start: int
    freq_end: int
    time_start: int
    time_end: int

    def __post_init__(self):
        if self.level not in ("top", "bottom"):
            raise InvalidInputError(f"unknown level {self.level!r}")
        if self.freq_start >= self.freq_end or self.time_start >= self.time_end:
            raise InvalidInputError("region must be nonempty")
        if min(self.freq_start, self.time_start) < 0:
            raise InvalidInputError("region bounds must be nonnegative")


def region_to_mask(region: RegionSelection, hier: HierarchyConfig) -> tuple[np.ndarray, np.ndarray]:
    """Region -> (top mask, bottom mask).

    A top-level region also masks the aligned (patch-expanded) bottom
    cells; a bottom-level region leaves the top untouched.
    """
    top_mask = np.zeros(hier.top_shape, dtype=bool)
    bottom_mask = np.zeros(hier.bottom_shape, dtype=bool)
    d_f, d_t = hier.patch
    if region.level == "top":
        if region.freq_end > hier.top_shape[0] or region.time_end > hier.top_shape[1]:
            raise InvalidInputError(f"region exceeds top grid {hier.top_shape}")
        top_mask[region.freq_start : region.freq_end, region.time_start : region.time_end] = True
        bottom_mask[
            region.freq_start * d_f : region.freq_end * d_f,
            region.time_start * d_t : region.time_end * d_t,
        ] = True
    else:
        if region.freq_end > hier.bottom_shape[0] or region.time_end > hier.bottom_shape[1]:
            raise InvalidInputError(f"region exceeds bottom grid {hier.bottom_shape}")
        bottom_mask[region.freq_start : region.freq_end, region.time_start : region.time_end] = True
    return top_mask, bottom_mask


class TopSampler:
    """Adapter: logits for one sequence position of the top model."""

    def __init__(self, model: CodemapTransformer):
        self.model = model

    def logits_at(self, tokens, hidden, labels, position) -> np.ndarray:
        with nn.no_grad():
            logits = self.model.forward_top(
                tokens[None], tokens[None], hidden[None], [labels.pitch], [labels.instrument]
            )
        return logits.data[0, position - 1]


class BottomSampler:
    """Adapter: logits for one bottom position given a fixed top sequence."""

    def __init__(self, model: CodemapTransformer, top_tokens: np.ndarray):
        self.model = model
        self.top_tokens = np.asarray(top_tokens)

    def logits_at(self, tokens, hidden, labels, position) -> np.ndarray:
        with nn.no_grad():
            logits = self.model.forward_bottom(
                tokens[None], self.top_tokens[None], [labels.pitch], [labels.instrument]
            )
        return logits.data[0, position - 1]


def sample_level(model, seq: LinearSeq, mask: np.ndarray, labels: ConditioningLabels,
                 cfg: SamplerConfig, rng: np.random.Generator | None = None) -> LinearSeq:
    """One left-to-right pass over the sequence.

    Masked positions are sampled from the top-p-filtered softmax and
    written back into the sequence (so later positions condition on
    them); unmasked positions pass through bit-identically.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (len(seq),):
        raise InvalidInputError(f"mask of shape {mask.shape} does not fit sequence of {len(seq)}")
    if rng is None:
        rng = make_rng(cfg.seed)
    tokens = seq.tokens.copy()
    hidden = mask.copy()
    n_codes = seq.n_codes
    for pos in np.flatnonzero(mask):
        logits = model.logits_at(tokens, hidden, labels, int(pos))
        filtered = top_p_filter(softmax_1d(logits, cfg.temperature), cfg.top_p)
        tokens[pos] = rng.choice(n_codes, p=filtered)
        hidden[pos] = False
    return LinearSeq(tokens=tokens, origins=seq.origins, n_codes=n_codes)


def inpaint(top_model: CodemapTransformer, bottom_model: CodemapTransformer,
            codes: CodemapPair, region: RegionSelection, labels: ConditioningLabels,
            cfg: SamplerConfig) -> CodemapPair:
    """Regenerate the selected region.

    Top-level regions resample the top rectangle, then the aligned bottom
    tokens conditioned on the new top; bottom-level regions resample only
    the bottom rectangle with the top fixed.  Everything outside the
    masks is preserved exactly.
    """
    hier = top_model.hier
    n_codes = top_model.n_codes
    top_mask, bottom_mask = region_to_mask(region, hier)
    rng = make_rng(cfg.seed)
    out = codes.copy()

    if top_mask.any():
        seq = sample_level(
            TopSampler(top_model), linearize_top(out.top, n_codes),
            linearize_mask_top(top_mask), labels, cfg, rng,
        )
        out.top = delinearize_top(seq, hier.top_shape)
    if bottom_mask.any():
        top_tokens = linearize_top(out.top, n_codes).tokens
        seq = sample_level(
            BottomSampler(bottom_model, top_tokens), linearize_bottom(out.bottom, hier, n_codes),
            linearize_mask_bottom(bottom_mask, hier), labels, cfg, rng,
        )
        out.bottom = delinearize_bottom(seq, hier)
    return out


def generate_from_scratch(top_model: CodemapTransformer, bottom_model: CodemapTransformer,
                          labels: ConditioningLabels, cfg: SamplerConfig) -> CodemapPair:
    """Sample a whole codemap pair from START-only context (all-true masks)."""
    hier = top_model.hier
    blank = CodemapPair(
        top=np.zeros(hier.top_shape, dtype=np.int64),
        bottom=np.zeros(hier.bottom_shape, dtype=np.int64),
    )
    region = RegionSelection("top", 0, hier.top_shape[0], 0, hier.top_shape[1])
    return inpaint(top_model, bottom_model, blank, region, labels, cfg)
