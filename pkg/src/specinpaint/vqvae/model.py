"""Hierarchical two-level vector-quantized autoencoder over Mel-IF grids.

A strided-conv encoder compresses the (2, F, T) gram to a bottom latent
grid; a further stack compresses that to the top grid.  Both latents are
quantized against their own codebooks.  Decoding upsamples the quantized
top codes, concatenates them with the bottom codewords (the bottom's
conditional dependency on the top) and mirrors the encoder with
transposed convolutions; the output is amplitude-floored and IF-masked
exactly like real grams so the model never emits invalid cells.

Log-amplitudes are affine-rescaled so that [floor, amp_max] maps onto
[-1, 1]; the floor therefore sits at exactly -1 in model space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..dsp import MelIFGram, phase_threshold
from ..errors import InvalidConfigError, InvalidInputError, InvalidShapeError, NumericError
from .. import nn
from .codebook import Codebook, ema_update, init_codebook, perplexity, quantize, reseed_dead_codes


@dataclass
class CodemapPair:
    """Integer code grids; top is the coarse level, bottom the fine one."""

    top: np.ndarray
    bottom: np.ndarray

    def __post_init__(self):
        self.top = np.asarray(self.top, dtype=np.int64)
        self.bottom = np.asarray(self.bottom, dtype=np.int64)
        if self.top.ndim != 2 or self.bottom.ndim != 2:
            raise InvalidShapeError("codemaps must be 2-D (freq, time) grids")
        if np.any(self.top < 0) or np.any(self.bottom < 0):
            raise InvalidInputError("code indices must be nonnegative")

    def copy(self) -> "CodemapPair":
        return CodemapPair(self.top.copy(), self.bottom.copy())


def _is_pow2(v: int) -> bool:
    return v >= 1 and (v & (v - 1)) == 0


@dataclass(frozen=True)
class VqVaeConfig:
    input_shape: tuple[int, int] = (128, 32)
    bottom_downsample: tuple[int, int] = (8, 8)
    top_downsample: tuple[int, int] = (2, 2)
    codebook_size: int = 64
    code_dim: int = 32
    beta: float = 0.25
    channels: int = 32
    decay: float = 0.99
    epsilon: float = 1e-5
    dead_code_steps: int = 5000
    codeword_init_std: float = 0.001
    amp_floor: float = -8.0

    def __post_init__(self):
        for name, (df, dt) in (("bottom_downsample", self.bottom_downsample), ("top_downsample", self.top_downsample)):
            if not (_is_pow2(df) and _is_pow2(dt)):
                raise InvalidConfigError(f"{name} ratios must be powers of two, got {(df, dt)}")
        ftot = self.bottom_downsample[0] * self.top_downsample[0]
        ttot = self.bottom_downsample[1] * self.top_downsample[1]
        if self.input_shape[0] % ftot or self.input_shape[1] % ttot:
            raise InvalidConfigError(
                f"input shape {self.input_shape} not divisible by cumulative downsampling {(ftot, ttot)}"
            )
        if self.beta <= 0:
            raise InvalidConfigError("beta must be positive")
        if self.codebook_size < 2:
            raise InvalidConfigError("codebook_size must be at least 2")

    @property
    def bottom_shape(self) -> tuple[int, int]:
        return (self.input_shape[0] // self.bottom_downsample[0], self.input_shape[1] // self.bottom_downsample[1])

    @property
    def top_shape(self) -> tuple[int, int]:
        return (self.bottom_shape[0] // self.top_downsample[0], self.bottom_shape[1] // self.top_downsample[1])


def _stride_plan(down: tuple[int, int]) -> list[tuple[int, int]]:
    df, dt = down
    plan = []
    while df > 1 or dt > 1:
        plan.append((2 if df > 1 else 1, 2 if dt > 1 else 1))
        df, dt = max(1, df // 2), max(1, dt // 2)
    return plan


def _kernel_for(stride: tuple[int, int]) -> tuple[int, int]:
    return (4 if stride[0] == 2 else 3, 4 if stride[1] == 2 else 3)


def masked_recon_loss(pred: MelIFGram, target: MelIFGram) -> float:
    """Sum of squared log-amplitude errors over all cells plus squared IF
    errors over cells where the target amplitude is above its floor."""
    if pred.shape != target.shape:
        raise InvalidShapeError(f"pred {pred.shape} and target {target.shape} differ in shape")
    amp_term = float(np.sum((pred.log_amp - target.log_amp) ** 2))
    live = target.log_amp > target.threshold
    if_term = float(np.sum(((pred.if_norm - target.if_norm) ** 2)[live]))
    return amp_term + if_term


def _recon_loss_tensor(pred: nn.Tensor, target: np.ndarray, floor: float) -> nn.Tensor:
    """Tensor form of masked_recon_loss on (B, 2, F, T) stacks."""
    weights = np.ones_like(target)
    weights[:, 1] = target[:, 0] > floor
    diff = nn.sub(pred, nn.Tensor(target))
    return nn.tensor_sum(nn.mul(nn.mul(diff, diff), nn.Tensor(weights)))


class VqVae:
    """Two-level VQ-VAE; owns its parameters, codebooks and training step."""

    def __init__(self, cfg: VqVaeConfig, rng: np.random.Generator, amp_max: float = 0.0):
        self.cfg = cfg
        self.amp_max = float(amp_max)
        if self.amp_max <= cfg.amp_floor:
            raise InvalidConfigError("amp_max must exceed the amplitude floor")
        self.params: dict[str, nn.Parameter] = {}
        self._rng = rng
        self._build(rng)
        self.cb_top = init_codebook(
            cfg.codebook_size, cfg.code_dim, cfg.codeword_init_std, rng, cfg.decay, cfg.epsilon
        )
        self.cb_bottom = init_codebook(
            cfg.codebook_size, cfg.code_dim, cfg.codeword_init_std, rng, cfg.decay, cfg.epsilon
        )

    # -- construction -----------------------------------------------------

    def _add_conv(self, name: str, c_in: int, c_out: int, kernel: tuple[int, int], rng) -> None:
        bound = 1.0 / np.sqrt(c_in * kernel[0] * kernel[1])
        dtype = nn.default_dtype()
        self.params[name + ".w"] = nn.Parameter(rng.uniform(-bound, bound, (c_out, c_in, *kernel)).astype(dtype))
        self.params[name + ".b"] = nn.Parameter(rng.uniform(-bound, bound, c_out).astype(dtype))

    def _add_conv_t(self, name: str, c_in: int, c_out: int, kernel: tuple[int, int], rng) -> None:
        # transposed convs store weights as (in, out, kh, kw)
        bound = 1.0 / np.sqrt(c_out * kernel[0] * kernel[1])
        dtype = nn.default_dtype()
        self.params[name + ".w"] = nn.Parameter(rng.uniform(-bound, bound, (c_in, c_out, *kernel)).astype(dtype))
        self.params[name + ".b"] = nn.Parameter(rng.uniform(-bound, bound, c_out).astype(dtype))

    def _add_res_block(self, prefix: str, channels: int, rng) -> None:
        self._add_conv(prefix + ".c1", channels, channels, (3, 3), rng)
        self._add_conv(prefix + ".c2", channels, channels, (1, 1), rng)

    def _build(self, rng) -> None:
        cfg = self.cfg
        c, d = cfg.channels, cfg.code_dim
        self._plan_b = _stride_plan(cfg.bottom_downsample)
        self._plan_t = _stride_plan(cfg.top_downsample)

        c_in = 2
        for i, stride in enumerate(self._plan_b):
            self._add_conv(f"enc_b.conv{i}", c_in, c, _kernel_for(stride), rng)
            c_in = c
        self._add_res_block("enc_b.res0", c, rng)
        self._add_res_block("enc_b.res1", c, rng)

        for i, stride in enumerate(self._plan_t):
            self._add_conv(f"enc_t.conv{i}", c, c, _kernel_for(stride), rng)
        self._add_res_block("enc_t.res0", c, rng)
        self._add_res_block("enc_t.res1", c, rng)

        self._add_conv("proj_t", c, d, (1, 1), rng)
        self._add_conv("proj_b", c, d, (1, 1), rng)

        for i, stride in enumerate(reversed(self._plan_t)):
            self._add_conv_t(f"up_t.conv{i}", d, d, _kernel_for(stride), rng)

        self._add_conv("dec.in_conv", 2 * d, c, (3, 3), rng)
        self._add_res_block("dec.res0", c, rng)
        self._add_res_block("dec.res1", c, rng)
        plan_up = list(reversed(self._plan_b))
        for i, stride in enumerate(plan_up):
            c_out = 2 if i == len(plan_up) - 1 else c
            self._add_conv_t(f"dec.conv{i}", c, c_out, _kernel_for(stride), rng)

    # -- forward pieces ----------------------------------------------------

    def _conv(self, name: str, x: nn.Tensor, stride=(1, 1)) -> nn.Tensor:
        w = self.params[name + ".w"].tensor
        b = self.params[name + ".b"].tensor
        out = nn.conv2d(x, w, stride=stride, padding=1)
        return nn.add(out, nn.reshape(b, (1, -1, 1, 1)))

    def _conv_t(self, name: str, x: nn.Tensor, stride=(1, 1)) -> nn.Tensor:
        w = self.params[name + ".w"].tensor
        b = self.params[name + ".b"].tensor
        out = nn.conv_transpose2d(x, w, stride=stride, padding=1)
        return nn.add(out, nn.reshape(b, (1, -1, 1, 1)))

    def _proj(self, name: str, x: nn.Tensor) -> nn.Tensor:
        w = self.params[name + ".w"].tensor
        b = self.params[name + ".b"].tensor
        out = nn.conv2d(x, w, stride=1, padding=0)
        return nn.add(out, nn.reshape(b, (1, -1, 1, 1)))

    def _res(self, prefix: str, x: nn.Tensor) -> nn.Tensor:
        h = self._conv(prefix + ".c1", nn.relu(x))
        h = self._proj(prefix + ".c2", nn.relu(h))
        return nn.add(x, h)

    def _encode_bottom(self, x: nn.Tensor) -> nn.Tensor:
        h = x
        for i, stride in enumerate(self._plan_b):
            h = nn.relu(self._conv(f"enc_b.conv{i}", h, stride))
        h = self._res("enc_b.res0", h)
        return self._res("enc_b.res1", h)

    def _encode_top(self, h: nn.Tensor) -> nn.Tensor:
        for i, stride in enumerate(self._plan_t):
            h = nn.relu(self._conv(f"enc_t.conv{i}", h, stride))
        h = self._res("enc_t.res0", h)
        return self._res("enc_t.res1", h)

    def _upsample_top(self, zq_t: nn.Tensor) -> nn.Tensor:
        h = zq_t
        plan = list(reversed(self._plan_t))
        for i, stride in enumerate(plan):
            h = self._conv_t(f"up_t.conv{i}", h, stride)
            if i < len(plan) - 1:
                h = nn.relu(h)
        return h

    def _decode_core(self, zq_b: nn.Tensor, up_t: nn.Tensor) -> nn.Tensor:
        h = self._conv("dec.in_conv", nn.concat([zq_b, up_t], axis=1))
        h = self._res("dec.res0", h)
        h = self._res("dec.res1", h)
        for i, stride in enumerate(reversed(self._plan_b)):
            h = self._conv_t(f"dec.conv{i}", nn.relu(h), stride)
        return self._mask_output(h)

    def _mask_output(self, out: nn.Tensor) -> nn.Tensor:
        """Apply the gram-validity mask: floor the amplitude channel and
        zero/clip IF wherever the raw amplitude fell below the floor."""
        amp_raw = out[:, 0:1]
        if_raw = out[:, 1:2]
        amp = nn.maximum_scalar(amp_raw, -1.0)
        live = (amp_raw.data > -1.0).astype(amp_raw.data.dtype)
        if_masked = nn.mul(nn.clip(if_raw, -1.0, 1.0), nn.Tensor(live))
        return nn.concat([amp, if_masked], axis=1)

    @staticmethod
    def _to_vectors(grid: nn.Tensor) -> nn.Tensor:
        b, d, f, t = grid.shape
        return nn.reshape(nn.swapaxes(nn.swapaxes(grid, 1, 2), 2, 3), (b * f * t, d))

    @staticmethod
    def _to_grid(flat: nn.Tensor, b: int, f: int, t: int) -> nn.Tensor:
        d = flat.shape[-1]
        return nn.swapaxes(nn.swapaxes(nn.reshape(flat, (b, f, t, d)), 2, 3), 1, 2)

    # -- normalization -----------------------------------------------------

    @property
    def _amp_center(self) -> float:
        return 0.5 * (self.cfg.amp_floor + self.amp_max)

    @property
    def _amp_half(self) -> float:
        return 0.5 * (self.amp_max - self.cfg.amp_floor)

    def normalize(self, gram: MelIFGram) -> np.ndarray:
        """MelIFGram -> (2, F, T) model-space array; floor maps to -1."""
        amp = (gram.log_amp - self._amp_center) / self._amp_half
        return np.stack([amp, gram.if_norm]).astype(nn.default_dtype())

    def denormalize(self, stack: np.ndarray) -> MelIFGram:
        amp = stack[0].astype(np.float64) * self._amp_half + self._amp_center
        gram = MelIFGram(log_amp=amp, if_norm=stack[1].astype(np.float64), threshold=self.cfg.amp_floor)
        return phase_threshold(gram, self.cfg.amp_floor)

    # -- public API ---------------------------------------------------------

    def forward(self, x: nn.Tensor, frozen_residuals: dict | None = None):
        """Full training-path forward on normalized (B, 2, F, T) input.

        ``frozen_residuals`` replaces the straight-through outputs with
        ``z + const`` using residuals captured at a base point; gradient
        checks use it because the surrogate (not the piecewise-constant
        true quantization) is what the straight-through gradients
        differentiate.
        """
        b = x.shape[0]
        ft, tt = self.cfg.top_shape
        fb, tb = self.cfg.bottom_shape
        enc_b = self._encode_bottom(x)
        enc_t = self._encode_top(enc_b)
        z_t = self._to_vectors(self._proj("proj_t", enc_t))
        z_b = self._to_vectors(self._proj("proj_b", enc_b))
        idx_t, zq_t, _, commit_t = quantize(z_t, self.cb_top)
        idx_b, zq_b, _, commit_b = quantize(z_b, self.cb_bottom)
        residual_top = zq_t.data - z_t.data
        residual_bottom = zq_b.data - z_b.data
        if frozen_residuals is not None:
            zq_t = nn.add(z_t, nn.Tensor(frozen_residuals["top"]))
            zq_b = nn.add(z_b, nn.Tensor(frozen_residuals["bottom"]))
        up_t = self._upsample_top(self._to_grid(zq_t, b, ft, tt))
        recon = self._decode_core(self._to_grid(zq_b, b, fb, tb), up_t)
        return {
            "recon": recon,
            "idx_top": idx_t.reshape(b, ft, tt),
            "idx_bottom": idx_b.reshape(b, fb, tb),
            "commit_top": commit_t,
            "commit_bottom": commit_b,
            "z_top": z_t,
            "z_bottom": z_b,
            "residual_top": residual_top,
            "residual_bottom": residual_bottom,
        }

    def loss(self, x: nn.Tensor, frozen_residuals: dict | None = None):
        """Masked reconstruction + beta-weighted commitment losses."""
        out = self.forward(x, frozen_residuals)
        recon = _recon_loss_tensor(out["recon"], x.data, -1.0)
        commit = nn.add(out["commit_top"], out["commit_bottom"])
        total = nn.add(recon, nn.mul(commit, self.cfg.beta))
        return total, recon, out

    def train_step(self, batch: np.ndarray, lr: float) -> dict:
        """One optimization step on a normalized (B, 2, F, T) batch."""
        x = nn.Tensor(np.asarray(batch, dtype=nn.default_dtype()))
        total, recon, out = self.loss(x)
        if not np.isfinite(total.data):
            raise NumericError("non-finite training loss; step aborted")
        nn.zero_grads(self.params)
        total.backward()
        nn.adam_step(self.params, lr=lr)
        with nn.no_grad():
            ema_update(self.cb_top, out["z_top"].data, out["idx_top"].ravel())
            ema_update(self.cb_bottom, out["z_bottom"].data, out["idx_bottom"].ravel())
            reseed_dead_codes(self.cb_top, out["z_top"].data, self._rng, self.cfg.dead_code_steps)
            reseed_dead_codes(self.cb_bottom, out["z_bottom"].data, self._rng, self.cfg.dead_code_steps)
        return {
            "loss": float(total.data),
            "recon_loss": float(recon.data),
            "commit_loss": float(out["commit_top"].data + out["commit_bottom"].data),
            "perplexity_top": perplexity(out["idx_top"].ravel(), self.cfg.codebook_size),
            "perplexity_bottom": perplexity(out["idx_bottom"].ravel(), self.cfg.codebook_size),
        }

    def encode(self, gram: MelIFGram) -> CodemapPair:
        """Deterministic gram -> (top, bottom) integer maps."""
        if gram.shape != tuple(self.cfg.input_shape):
            raise InvalidInputError(f"gram shape {gram.shape} != configured {self.cfg.input_shape}")
        with nn.no_grad():
            x = nn.Tensor(self.normalize(gram)[None])
            out = self.forward(x)
        return CodemapPair(top=out["idx_top"][0], bottom=out["idx_bottom"][0])

    def decode(self, codes: CodemapPair) -> MelIFGram:
        """Codemaps -> gram; output always satisfies gram invariants."""
        ft, tt = self.cfg.top_shape
        fb, tb = self.cfg.bottom_shape
        if codes.top.shape != (ft, tt) or codes.bottom.shape != (fb, tb):
            raise InvalidInputError(
                f"codemap shapes {codes.top.shape}/{codes.bottom.shape} != configured {(ft, tt)}/{(fb, tb)}"
            )
        if codes.top.max() >= self.cfg.codebook_size or codes.bottom.max() >= self.cfg.codebook_size:
            raise InvalidInputError("code index out of range for the codebook")
        dtype = nn.default_dtype()
        with nn.no_grad():
            zq_t = nn.Tensor(self.cb_top.codewords[codes.top].astype(dtype)[None].transpose(0, 3, 1, 2))
            zq_b = nn.Tensor(self.cb_bottom.codewords[codes.bottom].astype(dtype)[None].transpose(0, 3, 1, 2))
            recon = self._decode_core(zq_b, self._upsample_top(zq_t))
        return self.denormalize(recon.data[0])

    # -- persistence ---------------------------------------------------------

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays = {name: p.data for name, p in self.params.items()}
        for tag, cb in (("codebook_top", self.cb_top), ("codebook_bottom", self.cb_bottom)):
            arrays[f"{tag}.codewords"] = cb.codewords
            arrays[f"{tag}.ema_counts"] = cb.ema_counts
            arrays[f"{tag}.ema_sums"] = cb.ema_sums
        return arrays

    def save(self, path: str, sidecar_path: str | None = None) -> None:
        nn.save_params(path, self.state_arrays())
        if sidecar_path:
            with open(sidecar_path, "w", encoding="utf-8") as f:
                json.dump(
                    {
                        "config": {
                            "input_shape": list(self.cfg.input_shape),
                            "bottom_downsample": list(self.cfg.bottom_downsample),
                            "top_downsample": list(self.cfg.top_downsample),
                            "codebook_size": self.cfg.codebook_size,
                            "code_dim": self.cfg.code_dim,
                            "beta": self.cfg.beta,
                            "channels": self.cfg.channels,
                            "decay": self.cfg.decay,
                            "epsilon": self.cfg.epsilon,
                            "dead_code_steps": self.cfg.dead_code_steps,
                            "codeword_init_std": self.cfg.codeword_init_std,
                            "amp_floor": self.cfg.amp_floor,
                        },
                        "stats": {"amp_max": self.amp_max},
                    },
                    f,
                    indent=2,
                )

    @classmethod
    def load(cls, path: str, sidecar_path: str) -> "VqVae":
        with open(sidecar_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
        raw = meta["config"]
        cfg = VqVaeConfig(
            input_shape=tuple(raw["input_shape"]),
            bottom_downsample=tuple(raw["bottom_downsample"]),
            top_downsample=tuple(raw["top_downsample"]),
            codebook_size=raw["codebook_size"],
            code_dim=raw["code_dim"],
            beta=raw["beta"],
            channels=raw["channels"],
            decay=raw["decay"],
            epsilon=raw["epsilon"],
            dead_code_steps=raw["dead_code_steps"],
            codeword_init_std=raw["codeword_init_std"],
            amp_floor=raw["amp_floor"],
        )
        model = cls(cfg, np.random.default_rng(0), amp_max=meta["stats"]["amp_max"])
        arrays = nn.load_params(path)
        for name, p in model.params.items():
            if name not in arrays:
                raise InvalidInputError(f"checkpoint missing parameter {name!r}")
            if tuple(arrays[name].shape) != tuple(p.shape):
                raise InvalidInputError(f"checkpoint parameter {name!r} has shape {arrays[name].shape}, expected {p.shape}")
            p.tensor.data = arrays[name].astype(nn.default_dtype())
        for tag, cb in (("codebook_top", model.cb_top), ("codebook_bottom", model.cb_bottom)):
            cb.codewords = arrays[f"{tag}.codewords"].astype(np.float64)
            cb.ema_counts = arrays[f"{tag}.ema_counts"].astype(np.float64)
            cb.ema_sums = arrays[f"{tag}.ema_sums"].astype(np.float64)
        return model
