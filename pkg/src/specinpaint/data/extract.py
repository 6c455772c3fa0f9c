"""Gram preparation and codemap extraction against a frozen autoencoder."""

from __future__ import annotations

import numpy as np

from ..dsp import MelConfig, MelIFGram, StftConfig, melif_encode, pad_for_frames
from ..vqvae import VqVae
from .store import CodemapRecord, CodemapStore, CodemapStoreWriter
from .synth import NoteRecord


def note_to_gram(note: NoteRecord, stft_cfg: StftConfig, mel_cfg: MelConfig,
                 threshold: float, n_frames: int) -> MelIFGram:
    """Pad/crop the note to the canonical frame count, then encode."""
    wave = pad_for_frames(note.waveform, n_frames, stft_cfg)
    return melif_encode(wave, stft_cfg, mel_cfg, threshold)


def amp_max_over(notes, stft_cfg: StftConfig, mel_cfg: MelConfig,
                 threshold: float, n_frames: int) -> float:
    """Dataset log-amplitude ceiling, stored with the model for
    normalization."""
    peak = threshold
    for note in notes:
        gram = note_to_gram(note, stft_cfg, mel_cfg, threshold, n_frames)
        peak = max(peak, float(gram.log_amp.max()))
    return peak


def extract_codemaps(model: VqVae, notes, out_path: str, stft_cfg: StftConfig,
                     mel_cfg: MelConfig) -> CodemapStore:
    """Encode every note and write the fixed-stride store."""
    cfg = model.cfg
    n_frames = cfg.input_shape[1]
    with CodemapStoreWriter(out_path, cfg.top_shape, cfg.bottom_shape, cfg.codebook_size) as writer:
        for i, note in enumerate(notes):
            gram = note_to_gram(note, stft_cfg, mel_cfg, cfg.amp_floor, n_frames)
            codes = model.encode(gram)
            writer.append(
                CodemapRecord(id=i, pitch=note.pitch, instrument=note.instrument,
                              top=codes.top, bottom=codes.bottom)
            )
    return CodemapStore(out_path)
