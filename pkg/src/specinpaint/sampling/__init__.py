"""Masked autoregressive sampling and inpainting orchestration."""

from .engine import (
    BottomSampler,
    RegionSelection,
    TopSampler,
    generate_from_scratch,
    inpaint,
    region_to_mask,
    sample_level,
)
from .topp import SamplerConfig, make_rng, softmax_1d, top_p_filter

__all__ = [
    "BottomSampler",
    "RegionSelection",
    "SamplerConfig",
    "TopSampler",
    "generate_from_scratch",
    "inpaint",
    "make_rng",
    "region_to_mask",
    "sample_level",
    "softmax_1d",
    "top_p_filter",
]
