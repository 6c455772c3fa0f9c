"""The two codemap Transformers.

Both levels share one encoder-decoder architecture over linearized code
sequences.  The top model is self-conditioned: its encoder reads the same
sequence through an anti-causal mask (minus tokens scheduled for
inpainting) so the causal decoder can honor fixed future constraints.
The bottom model's encoder reads the full top sequence and its decoder
cross-attends through the diagonal parent-patch mask only.

Every position's input vector concatenates a token embedding, two small
factorized positional embeddings (time x frequency band for the top;
parent band x within-patch offset for the bottom, which deliberately
hides global time) and the pitch/instrument label embeddings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .. import nn
from ..errors import InvalidConfigError, InvalidInputError, InvalidShapeError
from .linearize import HierarchyConfig
from .masks import anti_causal_mask, build_masks, causal_mask

PITCH_MIN = 24
PITCH_MAX = 84


@dataclass(frozen=True)
class ConditioningLabels:
    pitch: int
    instrument: int

    def __post_init__(self):
        if not PITCH_MIN <= self.pitch <= PITCH_MAX:
            raise InvalidInputError(f"pitch {self.pitch} outside [{PITCH_MIN}, {PITCH_MAX}]")
        if self.instrument < 0:
            raise InvalidInputError("instrument id must be nonnegative")


@dataclass(frozen=True)
class TransformerConfig:
    n_layers_enc: int = 2
    n_layers_dec: int = 2
    n_heads: int = 4
    model_dim: int = 64
    token_embed_dim: int = 40
    pos_embed_dim: int = 8  # split into two factors
    label_embed_dim: int = 8
    ffn_dim: int = 128

    def __post_init__(self):
        if self.token_embed_dim + self.pos_embed_dim + 2 * self.label_embed_dim != self.model_dim:
            raise InvalidConfigError(
                "token_embed_dim + pos_embed_dim + 2*label_embed_dim must equal model_dim, got "
                f"{self.token_embed_dim}+{self.pos_embed_dim}+2*{self.label_embed_dim} != {self.model_dim}"
            )
        if self.pos_embed_dim % 2:
            raise InvalidConfigError("pos_embed_dim must split into two equal factors")
        if self.model_dim % self.n_heads:
            raise InvalidConfigError("model_dim must be divisible by n_heads")


def paper_transformer_config() -> TransformerConfig:
    """The reference configuration: 416 + 32 + 32 + 32 = 512."""
    return TransformerConfig(
        n_layers_enc=6,
        n_layers_dec=6,
        n_heads=8,
        model_dim=512,
        token_embed_dim=416,
        pos_embed_dim=32,
        label_embed_dim=32,
        ffn_dim=1024,
    )


def top_position_factors(hier: HierarchyConfig, seq_len: int) -> tuple[np.ndarray, np.ndarray]:
    """(time index, frequency index) per top sequence position; 0 = START."""
    f_dim = hier.top_shape[0]
    g = np.arange(seq_len) - 1
    time_idx = np.where(g < 0, 0, g // f_dim + 1)
    freq_idx = np.where(g < 0, 0, g % f_dim + 1)
    return time_idx, freq_idx


def bottom_position_factors(hier: HierarchyConfig, seq_len: int) -> tuple[np.ndarray, np.ndarray]:
    """(parent frequency band, within-patch offset) per bottom position.

    Carries no global time information by construction.
    """
    i = np.arange(seq_len)
    parent = i // hier.patch_area
    g = parent - 1
    band_idx = np.where(g < 0, 0, g % hier.top_shape[0] + 1)
    within_idx = i % hier.patch_area
    return band_idx, within_idx


class CodemapTransformer:
    """One level's encoder-decoder model over linearized codemaps."""

    def __init__(
        self,
        cfg: TransformerConfig,
        hier: HierarchyConfig,
        level: str,
        n_codes: int,
        n_instruments: int,
        rng: np.random.Generator,
    ):
        if level not in ("top", "bottom"):
            raise InvalidConfigError(f"unknown level {level!r}")
        self.cfg = cfg
        self.hier = hier
        self.level = level
        self.n_codes = n_codes
        self.n_instruments = n_instruments
        self.params: dict[str, nn.Parameter] = {}
        self.seq_len = hier.top_seq_len if level == "top" else hier.bottom_seq_len

        half = cfg.pos_embed_dim // 2
        if level == "top":
            self._pos_a_idx, self._pos_b_idx = top_position_factors(hier, self.seq_len)
            pos_a_rows = hier.top_shape[1] + 1  # time frames + START
            pos_b_rows = hier.top_shape[0] + 1  # frequency bands + START
            self._enc_len = self.seq_len
        else:
            self._pos_a_idx, self._pos_b_idx = bottom_position_factors(hier, self.seq_len)
            pos_a_rows = hier.top_shape[0] + 1  # parent bands + START patch
            pos_b_rows = hier.patch_area
            self._enc_len = hier.top_seq_len
            self._enc_pos_a, self._enc_pos_b = top_position_factors(hier, self._enc_len)

        self._add_table("tok", n_codes + 1, cfg.token_embed_dim, rng)
        self._add_table("pos_a", pos_a_rows, half, rng)
        self._add_table("pos_b", pos_b_rows, half, rng)
        if level == "bottom":
            # the encoder consumes top-level sequences with their own geometry
            self._add_table("enc_pos_a", hier.top_shape[1] + 1, half, rng)
            self._add_table("enc_pos_b", hier.top_shape[0] + 1, half, rng)
        self._add_table("pitch", PITCH_MAX - PITCH_MIN + 1, cfg.label_embed_dim, rng)
        self._add_table("instr", n_instruments, cfg.label_embed_dim, rng)

        d, f = cfg.model_dim, cfg.ffn_dim
        for i in range(cfg.n_layers_enc):
            self._add_attn(f"enc{i}.self", d, rng)
            self._add_ffn(f"enc{i}", d, f, rng)
            self._add_ln(f"enc{i}.ln1", d)
            self._add_ln(f"enc{i}.ln2", d)
        for i in range(cfg.n_layers_dec):
            self._add_attn(f"dec{i}.self", d, rng)
            self._add_attn(f"dec{i}.cross", d, rng)
            self._add_ffn(f"dec{i}", d, f, rng)
            self._add_ln(f"dec{i}.ln1", d)
            self._add_ln(f"dec{i}.ln2", d)
            self._add_ln(f"dec{i}.ln3", d)
        self._add_linear("out", d, n_codes, rng)

    # -- parameter helpers ---------------------------------------------------

    def _add_table(self, name: str, rows: int, dim: int, rng) -> None:
        bound = 1.0 / np.sqrt(dim)
        self.params[name] = nn.Parameter(rng.uniform(-bound, bound, (rows, dim)).astype(nn.default_dtype()))

    def _add_linear(self, name: str, d_in: int, d_out: int, rng) -> None:
        bound = 1.0 / np.sqrt(d_in)
        dtype = nn.default_dtype()
        self.params[name + ".w"] = nn.Parameter(rng.uniform(-bound, bound, (d_in, d_out)).astype(dtype))
        self.params[name + ".b"] = nn.Parameter(rng.uniform(-bound, bound, d_out).astype(dtype))

    def _add_attn(self, prefix: str, d: int, rng) -> None:
        for proj in ("wq", "wk", "wv", "wo"):
            self._add_linear(f"{prefix}.{proj}", d, d, rng)

    def _add_ffn(self, prefix: str, d: int, f: int, rng) -> None:
        self._add_linear(f"{prefix}.ffn1", d, f, rng)
        self._add_linear(f"{prefix}.ffn2", f, d, rng)

    def _add_ln(self, name: str, d: int) -> None:
        dtype = nn.default_dtype()
        self.params[name + ".g"] = nn.Parameter(np.ones(d, dtype=dtype))
        self.params[name + ".b"] = nn.Parameter(np.zeros(d, dtype=dtype))

    # -- building blocks -------------------------------------------------------

    def _linear(self, name: str, x: nn.Tensor) -> nn.Tensor:
        return nn.linear(x, self.params[name + ".w"].tensor, self.params[name + ".b"].tensor)

    def _ln(self, name: str, x: nn.Tensor) -> nn.Tensor:
        return nn.layer_norm(x, self.params[name + ".g"].tensor, self.params[name + ".b"].tensor)

    def _attn(self, prefix: str, q_in: nn.Tensor, kv_in: nn.Tensor, mask) -> nn.Tensor:
        q = self._linear(f"{prefix}.wq", q_in)
        k = self._linear(f"{prefix}.wk", kv_in)
        v = self._linear(f"{prefix}.wv", kv_in)
        h = nn.multi_head_attention(q, k, v, mask, self.cfg.n_heads)
        return self._linear(f"{prefix}.wo", h)

    def _ffn(self, prefix: str, x: nn.Tensor) -> nn.Tensor:
        return self._linear(f"{prefix}.ffn2", nn.relu(self._linear(f"{prefix}.ffn1", x)))

    def _label_indices(self, pitches, instruments, batch: int):
        pitches = np.asarray(pitches).ravel()
        instruments = np.asarray(instruments).ravel()
        if pitches.size != batch or instruments.size != batch:
            raise InvalidInputError("one pitch and one instrument label per sequence required")
        if pitches.min() < PITCH_MIN or pitches.max() > PITCH_MAX:
            raise InvalidInputError(f"pitch outside [{PITCH_MIN}, {PITCH_MAX}]")
        if instruments.min() < 0 or instruments.max() >= self.n_instruments:
            raise InvalidInputError(f"instrument id outside [0, {self.n_instruments})")
        return pitches - PITCH_MIN, instruments

    def _embed(self, tokens: np.ndarray, pos_a_idx, pos_b_idx, pitch_idx, instr_idx,
               pos_a="pos_a", pos_b="pos_b") -> nn.Tensor:
        b, length = tokens.shape
        if tokens.min() < 0 or tokens.max() > self.n_codes:
            raise InvalidInputError("token id outside [0, n_codes]")
        tok = nn.embedding(self.params["tok"].tensor, tokens)
        pa = nn.embedding(self.params[pos_a].tensor, np.broadcast_to(pos_a_idx, (b, length)))
        pb = nn.embedding(self.params[pos_b].tensor, np.broadcast_to(pos_b_idx, (b, length)))
        pit = nn.embedding(self.params["pitch"].tensor, np.repeat(pitch_idx[:, None], length, axis=1))
        ins = nn.embedding(self.params["instr"].tensor, np.repeat(instr_idx[:, None], length, axis=1))
        return nn.concat([tok, pa, pb, pit, ins], axis=-1)

    def _encoder(self, src: nn.Tensor, enc_mask) -> nn.Tensor:
        h = src
        for i in range(self.cfg.n_layers_enc):
            h = self._ln(f"enc{i}.ln1", nn.add(h, self._attn(f"enc{i}.self", h, h, enc_mask)))
            h = self._ln(f"enc{i}.ln2", nn.add(h, self._ffn(f"enc{i}", h)))
        return h

    def _decoder(self, tgt: nn.Tensor, memory: nn.Tensor, dec_mask, cross_mask) -> nn.Tensor:
        h = tgt
        for i in range(self.cfg.n_layers_dec):
            h = self._ln(f"dec{i}.ln1", nn.add(h, self._attn(f"dec{i}.self", h, h, dec_mask)))
            h = self._ln(f"dec{i}.ln2", nn.add(h, self._attn(f"dec{i}.cross", h, memory, cross_mask)))
            h = self._ln(f"dec{i}.ln3", nn.add(h, self._ffn(f"dec{i}", h)))
        return h

    # -- public forwards ---------------------------------------------------------

    def positional_vector(self, origin, enc_side: bool = False) -> np.ndarray:
        """Concatenated positional factors for a grid cell (None = START);
        exposed for inspecting the factorization equality classes."""
        if self.level == "top" or enc_side:
            f_dim = self.hier.top_shape[0]
            ta, tb = ("enc_pos_a", "enc_pos_b") if enc_side and self.level == "bottom" else ("pos_a", "pos_b")
            if origin is None:
                a_idx = b_idx = 0
            else:
                f, t = origin
                a_idx, b_idx = t + 1, f + 1
            return np.concatenate([self.params[ta].data[a_idx], self.params[tb].data[b_idx]])
        if origin is None:
            raise InvalidInputError("bottom START positions need a sequence index, not an origin")
        f, t = origin
        if not (0 <= f < self.hier.bottom_shape[0] and 0 <= t < self.hier.bottom_shape[1]):
            raise InvalidInputError(f"origin {origin} outside bottom grid {self.hier.bottom_shape}")
        d_f, d_t = self.hier.patch
        band_idx = f // d_f + 1
        within_idx = (t % d_t) * d_f + (f % d_f)
        return np.concatenate([self.params["pos_a"].data[band_idx], self.params["pos_b"].data[within_idx]])

    def forward_top(self, targets: np.ndarray, sources: np.ndarray, hidden: np.ndarray,
                    pitches, instruments) -> nn.Tensor:
        """Next-token logits (B, L, K) for the self-conditioned top model.

        ``hidden`` marks source tokens the encoder must not reveal (the
        linearized inpainting mask).
        """
        if self.level != "top":
            raise InvalidInputError("forward_top requires a top-level model")
        targets = np.atleast_2d(np.asarray(targets))
        sources = np.atleast_2d(np.asarray(sources))
        hidden = np.atleast_2d(np.asarray(hidden, dtype=bool))
        b, length = targets.shape
        if sources.shape != (b, length) or length != self.seq_len:
            raise InvalidShapeError(f"target/source must be (B, {self.seq_len})")
        if hidden.shape != (b, length):
            raise InvalidShapeError("hidden mask must match the token batch")
        pitch_idx, instr_idx = self._label_indices(pitches, instruments, b)

        enc_masks = np.empty((b, 1, length, length), dtype=bool)
        for j in range(b):
            enc_masks[j, 0], _, _ = build_masks(length, hidden[j])
        # m (.) c: hidden tokens are value-replaced by the neutral symbol so
        # nothing reaches the decoder through the encoder's residual stream
        sources = np.where(hidden, self.n_codes, sources)

        src = self._embed(sources, self._pos_a_idx, self._pos_b_idx, pitch_idx, instr_idx)
        tgt = self._embed(targets, self._pos_a_idx, self._pos_b_idx, pitch_idx, instr_idx)
        memory = self._encoder(src, enc_masks)
        h = self._decoder(tgt, memory, causal_mask(length), np.ones((length, length), dtype=bool))
        return self._linear("out", h)

    def forward_bottom(self, bottoms: np.ndarray, tops: np.ndarray, pitches, instruments) -> nn.Tensor:
        """Next-token logits (B, Lb, K) for the top-conditioned bottom model."""
        if self.level != "bottom":
            raise InvalidInputError("forward_bottom requires a bottom-level model")
        bottoms = np.atleast_2d(np.asarray(bottoms))
        tops = np.atleast_2d(np.asarray(tops))
        b, length = bottoms.shape
        if length != self.seq_len or tops.shape != (b, self._enc_len):
            raise InvalidShapeError(
                f"expected bottoms (B, {self.seq_len}) aligned with tops (B, {self._enc_len})"
            )
        pitch_idx, instr_idx = self._label_indices(pitches, instruments, b)

        _, dec_mask, cross_mask = build_masks(length, patch_area=self.hier.patch_area)
        src = self._embed(tops, self._enc_pos_a, self._enc_pos_b, pitch_idx, instr_idx,
                          pos_a="enc_pos_a", pos_b="enc_pos_b")
        tgt = self._embed(bottoms, self._pos_a_idx, self._pos_b_idx, pitch_idx, instr_idx)
        memory = self._encoder(src, np.ones((self._enc_len, self._enc_len), dtype=bool))
        h = self._decoder(tgt, memory, dec_mask, cross_mask)
        return self._linear("out", h)

    # -- persistence ----------------------------------------------------------

    def save(self, path: str, sidecar_path: str | None = None) -> None:
        nn.save_params(path, {name: p.data for name, p in self.params.items()})
        if sidecar_path:
            meta = {
                "level": self.level,
                "n_codes": self.n_codes,
                "n_instruments": self.n_instruments,
                "hierarchy": {"top_shape": list(self.hier.top_shape), "patch": list(self.hier.patch)},
                "transformer": {
                    "n_layers_enc": self.cfg.n_layers_enc,
                    "n_layers_dec": self.cfg.n_layers_dec,
                    "n_heads": self.cfg.n_heads,
                    "model_dim": self.cfg.model_dim,
                    "token_embed_dim": self.cfg.token_embed_dim,
                    "pos_embed_dim": self.cfg.pos_embed_dim,
                    "label_embed_dim": self.cfg.label_embed_dim,
                    "ffn_dim": self.cfg.ffn_dim,
                },
                "pitch_range": [PITCH_MIN, PITCH_MAX],
            }
            with open(sidecar_path, "w", encoding="utf-8") as f:
                json.dump(meta, f, indent=2)

    @classmethod
    def load(cls, path: str, sidecar_path: str) -> "CodemapTransformer":
        with open(sidecar_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
        cfg = TransformerConfig(**meta["transformer"])
        hier = HierarchyConfig(
            top_shape=tuple(meta["hierarchy"]["top_shape"]), patch=tuple(meta["hierarchy"]["patch"])
        )
        model = cls(cfg, hier, meta["level"], meta["n_codes"], meta["n_instruments"], np.random.default_rng(0))
        arrays = nn.load_params(path)
        for name, p in model.params.items():
            if name not in arrays:
                raise InvalidInputError(f"checkpoint missing parameter {name!r}")
            if tuple(arrays[name].shape) != tuple(p.shape):
                raise InvalidInputError(f"checkpoint parameter {name!r} has wrong shape {arrays[name].shape}")
            p.tensor.data = arrays[name].astype(nn.default_dtype())
        return model
