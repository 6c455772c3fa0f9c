"""Frozen model registry: the three checkpoints plus label vocabulary."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from ..dsp import MelConfig, StftConfig
from ..errors import InvalidInputError, UnavailableModelError
from ..lm import CodemapTransformer, HierarchyConfig
from ..vqvae import VqVae

VQVAE_CKPT = "vqvae.spnn"
VQVAE_META = "vqvae.json"
TOP_CKPT = "top.spnn"
TOP_META = "top.json"
BOTTOM_CKPT = "bottom.spnn"
BOTTOM_META = "bottom.json"
LABELS_FILE = "labels.json"
DSP_FILE = "dsp.json"


@dataclass
class ModelRegistry:
    vqvae: VqVae
    top: CodemapTransformer
    bottom: CodemapTransformer
    stft_cfg: StftConfig
    mel_cfg: MelConfig
    families: list
    version: str = "1"

    @property
    def hierarchy(self) -> HierarchyConfig:
        return self.top.hier

    @property
    def n_codes(self) -> int:
        return self.vqvae.cfg.codebook_size


def save_registry_metadata(directory: str, stft_cfg: StftConfig, mel_cfg: MelConfig, families) -> None:
    with open(os.path.join(directory, DSP_FILE), "w", encoding="utf-8") as f:
        json.dump(
            {
                "n_fft": stft_cfg.n_fft,
                "hop": stft_cfg.hop,
                "sample_rate": stft_cfg.sample_rate,
                "n_mels": mel_cfg.n_mels,
                "break_freq_hz": mel_cfg.break_freq,
            },
            f,
            indent=2,
        )
    with open(os.path.join(directory, LABELS_FILE), "w", encoding="utf-8") as f:
        json.dump({"families": list(families)}, f, indent=2)


def load_registry(directory: str) -> ModelRegistry:
    """Load and cross-validate all checkpoints; any inconsistency refuses
    startup with a diagnostic naming the offending shapes."""
    paths = [VQVAE_CKPT, VQVAE_META, TOP_CKPT, TOP_META, BOTTOM_CKPT, BOTTOM_META, LABELS_FILE, DSP_FILE]
    missing = [p for p in paths if not os.path.isfile(os.path.join(directory, p))]
    if missing:
        raise UnavailableModelError(f"checkpoint dir {directory} is missing {missing}")

    vqvae = VqVae.load(os.path.join(directory, VQVAE_CKPT), os.path.join(directory, VQVAE_META))
    top = CodemapTransformer.load(os.path.join(directory, TOP_CKPT), os.path.join(directory, TOP_META))
    bottom = CodemapTransformer.load(os.path.join(directory, BOTTOM_CKPT), os.path.join(directory, BOTTOM_META))

    vq_hier = (tuple(vqvae.cfg.top_shape), tuple(vqvae.cfg.top_downsample))
    for name, model in (("top", top), ("bottom", bottom)):
        lm_hier = (tuple(model.hier.top_shape), tuple(model.hier.patch))
        if lm_hier != vq_hier:
            raise InvalidInputError(
                f"hierarchy mismatch: vqvae has top_shape/patch {vq_hier}, {name} model has {lm_hier}"
            )
        if model.n_codes != vqvae.cfg.codebook_size:
            raise InvalidInputError(
                f"codebook mismatch: vqvae K={vqvae.cfg.codebook_size}, {name} model K={model.n_codes}"
            )

    with open(os.path.join(directory, DSP_FILE), "r", encoding="utf-8") as f:
        dsp = json.load(f)
    with open(os.path.join(directory, LABELS_FILE), "r", encoding="utf-8") as f:
        families = json.load(f)["families"]
    if len(families) != top.n_instruments:
        raise InvalidInputError(
            f"label vocabulary of {len(families)} families != model's {top.n_instruments}"
        )
    stft_cfg = StftConfig(n_fft=dsp["n_fft"], hop=dsp["hop"], sample_rate=dsp["sample_rate"])
    mel_cfg = MelConfig(n_mels=dsp["n_mels"], break_freq=dsp["break_freq_hz"], f_max=dsp["sample_rate"] / 2.0)
    if mel_cfg.n_mels != vqvae.cfg.input_shape[0]:
        raise InvalidInputError(
            f"dsp n_mels {mel_cfg.n_mels} != vqvae input rows {vqvae.cfg.input_shape[0]}"
        )
    return ModelRegistry(vqvae=vqvae, top=top, bottom=bottom, stft_cfg=stft_cfg, mel_cfg=mel_cfg,
                         families=families)
