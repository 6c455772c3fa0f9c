"""Codemap sequence models: linearization, masks, Transformers, training."""

from .linearize import (
    HierarchyConfig,
    LinearSeq,
    delinearize_bottom,
    delinearize_top,
    linearize_bottom,
    linearize_mask_bottom,
    linearize_mask_top,
    linearize_top,
    parent_index,
    patch_cells,
    top_order,
)
from .masks import anti_causal_mask, build_masks, causal_mask
from .model import (
    PITCH_MAX,
    PITCH_MIN,
    CodemapTransformer,
    ConditioningLabels,
    TransformerConfig,
    bottom_position_factors,
    paper_transformer_config,
    top_position_factors,
)
from .training import (
    MaskSampler,
    bottom_batch,
    linearize_bottom_grids,
    linearize_top_grids,
    top_batch,
    train_bottom_step,
    train_top_step,
)

__all__ = [
    "PITCH_MAX",
    "PITCH_MIN",
    "CodemapTransformer",
    "ConditioningLabels",
    "HierarchyConfig",
    "LinearSeq",
    "MaskSampler",
    "TransformerConfig",
    "anti_causal_mask",
    "bottom_batch",
    "bottom_position_factors",
    "build_masks",
    "causal_mask",
    "delinearize_bottom",
    "delinearize_top",
    "linearize_bottom",
    "linearize_bottom_grids",
    "linearize_mask_bottom",
    "linearize_mask_top",
    "linearize_top",
    "linearize_top_grids",
    "paper_transformer_config",
    "parent_index",
    "patch_cells",
    "top_batch",
    "top_order",
    "top_position_factors",
    "train_bottom_step",
    "train_top_step",
]
