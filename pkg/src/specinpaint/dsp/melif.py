"""The two-channel Mel-IF representation and its codec.

A sound is stored as a mel-warped grid of natural-log amplitudes plus the
instantaneous frequency (IF) of each band: the frame-to-frame phase
difference, wrapped and normalized by pi into [-1, 1].  Low-amplitude
cells carry essentially random phase, so both channels are floored by
``phase_threshold`` before any model sees them.

Warping averages each channel with the filterbank weighted by linear
amplitude, so the loud bins of a band decide its value; the IF channel is
averaged as unit phasors because wrapped values near +-1 must not be mixed
arithmetically.  Unwarping uses the nonnegative pseudo-inverse for the
amplitude channel and nearest-band assignment for the IF channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidShapeError
from .mel import (
    MelConfig,
    fft_bin_freqs,
    hertz_to_mel,
    mel_unwarp_matrix,
    mel_warp_matrix,
)
from .stft import ComplexGram, StftConfig, _wrap_phase, istft, stft

# Magnitudes are floored before the log so silence stays finite; the value
# only needs to sit far below any useful phase_threshold.
_MAG_FLOOR = 1e-12


@dataclass
class MelIFGram:
    """Two-channel (log-amplitude, normalized IF) grid of shape (n_mels, n_frames)."""

    log_amp: np.ndarray
    if_norm: np.ndarray
    threshold: float

    def __post_init__(self):
        self.log_amp = np.asarray(self.log_amp, dtype=np.float64)
        self.if_norm = np.asarray(self.if_norm, dtype=np.float64)
        if self.log_amp.shape != self.if_norm.shape:
            raise InvalidShapeError(f"log_amp {self.log_amp.shape} and if_norm {self.if_norm.shape} differ in shape")
        if self.log_amp.ndim != 2:
            raise InvalidShapeError("MelIFGram expects 2-D (freq, time) grids")

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_amp.shape


def phase_to_if(phase: np.ndarray) -> np.ndarray:
    """Unroll phase in time: column 0 keeps phase/pi, later columns the
    wrapped finite difference over pi."""
    phase = np.asarray(phase, dtype=np.float64)
    out = np.empty_like(phase)
    out[:, 0] = phase[:, 0]
    out[:, 1:] = _wrap_phase(np.diff(phase, axis=1))
    return out / np.pi


def if_to_phase(if_norm: np.ndarray) -> np.ndarray:
    """Invert phase_to_if via cumulative sum; exact modulo 2*pi."""
    if_norm = np.asarray(if_norm, dtype=np.float64)
    return _wrap_phase(np.cumsum(if_norm * np.pi, axis=1))


def phase_threshold(gram: MelIFGram, threshold: float) -> MelIFGram:
    """Clamp log-amplitude to a floor and zero the IF of floored cells.

    Idempotent; only ever raises amplitudes and zeroes IF values.
    """
    silent = gram.log_amp <= threshold
    return MelIFGram(
        log_amp=np.maximum(gram.log_amp, threshold),
        if_norm=np.where(silent, 0.0, gram.if_norm),
        threshold=threshold,
    )


def _nearest_band(mel_cfg: MelConfig, n_bins: int) -> np.ndarray:
    """Index of the mel band whose center is nearest each linear bin."""
    bin_mels = hertz_to_mel(fft_bin_freqs(n_bins, mel_cfg.f_max), mel_cfg)
    centers = np.linspace(0.0, bin_mels[-1], mel_cfg.n_mels)
    return np.abs(centers[None, :] - bin_mels[:, None]).argmin(axis=1)


def melif_encode(
    waveform: np.ndarray, stft_cfg: StftConfig, mel_cfg: MelConfig, threshold: float
) -> MelIFGram:
    """Waveform -> thresholded Mel-IF grid of shape (n_mels, n_frames)."""
    gram = stft(waveform, stft_cfg)
    amp = np.maximum(gram.magnitude, _MAG_FLOOR)
    log_amp = np.log(amp)
    if_norm = phase_to_if(gram.phase)

    warp = mel_warp_matrix(mel_cfg, stft_cfg.n_bins)
    band_amp = warp @ amp
    log_amp_mel = (warp @ (amp * log_amp)) / band_amp
    if_mel = np.angle(warp @ (amp * np.exp(1j * np.pi * if_norm))) / np.pi
    return phase_threshold(MelIFGram(log_amp=log_amp_mel, if_norm=if_mel, threshold=threshold), threshold)


def melif_decode(gram: MelIFGram, stft_cfg: StftConfig, mel_cfg: MelConfig) -> np.ndarray:
    """Mel-IF grid -> waveform via mel unwarp, phase integration and istft."""
    if gram.shape[0] != mel_cfg.n_mels:
        raise InvalidShapeError(f"gram has {gram.shape[0]} rows, mel config expects {mel_cfg.n_mels}")
    unwarp = mel_unwarp_matrix(mel_cfg, stft_cfg.n_bins)
    magnitude = np.exp(unwarp @ gram.log_amp)
    phase = if_to_phase(gram.if_norm[_nearest_band(mel_cfg, stft_cfg.n_bins)])
    return istft(ComplexGram(magnitude=magnitude, phase=phase), stft_cfg)
