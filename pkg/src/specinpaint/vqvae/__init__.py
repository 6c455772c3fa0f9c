"""Hierarchical vector-quantized autoencoder producing codemap pairs."""

from .codebook import (
    Codebook,
    ema_update,
    init_codebook,
    nearest_codes,
    perplexity,
    quantize,
    reseed_dead_codes,
)
from .model import CodemapPair, VqVae, VqVaeConfig, masked_recon_loss

__all__ = [
    "Codebook",
    "CodemapPair",
    "VqVae",
    "VqVaeConfig",
    "ema_update",
    "init_codebook",
    "masked_recon_loss",
    "nearest_codes",
    "perplexity",
    "quantize",
    "reseed_dead_codes",
]
