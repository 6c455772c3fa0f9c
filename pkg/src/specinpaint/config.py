"""Run configuration: one JSON document covering every module.

Two built-in profiles: ``toy`` (desk-scale defaults, trainable on a
laptop CPU) and ``paper`` (the reference architecture's numbers, kept as
executable documentation).  Unknown keys are rejected so typos cannot
silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .dsp import MelConfig, StftConfig
from .errors import InvalidConfigError
from .lm import HierarchyConfig, TransformerConfig
from .vqvae import VqVaeConfig


@dataclass(frozen=True)
class DspSection:
    n_fft: int = 1024
    hop: int = 256
    sample_rate: int = 16000
    n_mels: int = 128
    break_freq_hz: float = 240.0
    log_amp_floor: float = -8.0


@dataclass(frozen=True)
class VqVaeSection:
    input_shape: tuple = (128, 32)
    bottom_downsample: tuple = (8, 8)
    top_downsample: tuple = (2, 2)
    codebook_size: int = 64
    code_dim: int = 32
    beta: float = 0.25
    decay: float = 0.99
    epsilon: float = 1e-5
    channels: int = 32
    dead_code_steps: int = 5000
    codeword_init_std: float = 0.001
    learning_rate: float = 1e-3
    batch_size: int = 8
    steps: int = 2000


@dataclass(frozen=True)
class LmSection:
    n_layers_enc: int = 2
    n_layers_dec: int = 2
    n_heads: int = 4
    model_dim: int = 64
    token_embed_dim: int = 40
    pos_embed_dim: int = 8
    label_embed_dim: int = 8
    ffn_dim: int = 128
    learning_rate: float = 1e-3
    warmup_steps: int = 500
    batch_size: int = 16
    steps: int = 2000
    label_smoothing: float = 0.05
    grad_clip: float = 5.0
    mask_keep_min: float = 0.8
    mask_keep_max: float = 1.0


@dataclass(frozen=True)
class SamplerSection:
    top_p: float = 0.8
    temperature: float = 1.0


@dataclass(frozen=True)
class DataSection:
    n_notes: int = 256
    pitch_min: int = 48
    pitch_max: int = 72
    note_duration: float = 0.6


@dataclass(frozen=True)
class RunConfig:
    dsp: DspSection = field(default_factory=DspSection)
    vqvae: VqVaeSection = field(default_factory=VqVaeSection)
    lm: LmSection = field(default_factory=LmSection)
    sampler: SamplerSection = field(default_factory=SamplerSection)
    data: DataSection = field(default_factory=DataSection)
    seed: int = 0

    # -- derived module configs -------------------------------------------

    def stft_config(self) -> StftConfig:
        return StftConfig(n_fft=self.dsp.n_fft, hop=self.dsp.hop, sample_rate=self.dsp.sample_rate)

    def mel_config(self) -> MelConfig:
        return MelConfig(
            n_mels=self.dsp.n_mels, break_freq=self.dsp.break_freq_hz, f_max=self.dsp.sample_rate / 2.0
        )

    def vqvae_config(self) -> VqVaeConfig:
        v = self.vqvae
        if self.dsp.n_mels != v.input_shape[0]:
            raise InvalidConfigError(
                f"vqvae.input_shape[0]={v.input_shape[0]} must equal dsp.n_mels={self.dsp.n_mels}"
            )
        return VqVaeConfig(
            input_shape=tuple(v.input_shape),
            bottom_downsample=tuple(v.bottom_downsample),
            top_downsample=tuple(v.top_downsample),
            codebook_size=v.codebook_size,
            code_dim=v.code_dim,
            beta=v.beta,
            channels=v.channels,
            decay=v.decay,
            epsilon=v.epsilon,
            dead_code_steps=v.dead_code_steps,
            codeword_init_std=v.codeword_init_std,
            amp_floor=self.dsp.log_amp_floor,
        )

    def hierarchy(self) -> HierarchyConfig:
        vq = self.vqvae_config()
        return HierarchyConfig(top_shape=vq.top_shape, patch=tuple(self.vqvae.top_downsample))

    def transformer_config(self) -> TransformerConfig:
        m = self.lm
        return TransformerConfig(
            n_layers_enc=m.n_layers_enc,
            n_layers_dec=m.n_layers_dec,
            n_heads=m.n_heads,
            model_dim=m.model_dim,
            token_embed_dim=m.token_embed_dim,
            pos_embed_dim=m.pos_embed_dim,
            label_embed_dim=m.label_embed_dim,
            ffn_dim=m.ffn_dim,
        )

    def to_dict(self) -> dict:
        # JSON-canonical form (tuples become lists) so the echoed config
        # reparses to an identical RunConfig
        return json.loads(json.dumps(dataclasses.asdict(self)))


PROFILES = {
    "toy": {},
    "paper": {
        "dsp": {"n_fft": 2048, "hop": 512, "n_mels": 1024},
        "vqvae": {
            "input_shape": (1024, 128),
            "bottom_downsample": (16, 16),
            "top_downsample": (2, 2),
            "codebook_size": 512,
            "code_dim": 64,
            "channels": 128,
            "learning_rate": 3e-4,
            "batch_size": 256,
        },
        "lm": {
            "n_layers_enc": 6,
            "n_layers_dec": 6,
            "n_heads": 8,
            "model_dim": 512,
            "token_embed_dim": 416,
            "pos_embed_dim": 32,
            "label_embed_dim": 32,
            "ffn_dim": 1024,
            "learning_rate": 1e-4,
        },
        "data": {"pitch_min": 24, "pitch_max": 84, "note_duration": 4.0},
    },
}


def _merge_section(cls, base, overrides: dict, path: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    updates = {}
    for key, value in overrides.items():
        if key not in known:
            raise InvalidConfigError(f"unknown config key {path}.{key}")
        current = getattr(base, key)
        if isinstance(current, tuple):
            value = tuple(value)
        elif isinstance(current, bool):
            value = bool(value)
        elif isinstance(current, int) and not isinstance(value, bool):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        updates[key] = value
    return dataclasses.replace(base, **updates)


def config_from_dict(raw: dict, profile: str = "toy") -> RunConfig:
    if profile not in PROFILES:
        raise InvalidConfigError(f"unknown profile {profile!r}; available: {sorted(PROFILES)}")
    cfg = RunConfig()
    sections = {
        "dsp": DspSection,
        "vqvae": VqVaeSection,
        "lm": LmSection,
        "sampler": SamplerSection,
        "data": DataSection,
    }
    merged: dict = {}
    for layer in (PROFILES[profile], raw):
        for key, value in layer.items():
            if key == "seed":
                merged["seed"] = int(value)
            elif key in sections:
                merged.setdefault(key, {}).update(value)
            else:
                raise InvalidConfigError(f"unknown config key {key}")
    updates = {}
    for name, cls in sections.items():
        if name in merged:
            updates[name] = _merge_section(cls, getattr(cfg, name), merged[name], name)
    if "seed" in merged:
        updates["seed"] = merged["seed"]
    return dataclasses.replace(cfg, **updates)


def load_config(path: str | None, profile: str = "toy") -> RunConfig:
    raw = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfigError(f"unreadable config {path}: {exc}") from exc
    return config_from_dict(raw, profile)
