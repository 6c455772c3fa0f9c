"""Short-time Fourier analysis and exact overlap-add resynthesis.

The one-sided spectrum of an ``n_fft``-point frame has ``n_fft/2 + 1`` bins,
of which DC and Nyquist are purely real.  To keep grids at exactly
``n_fft/2`` rows without discarding information, row 0 packs both: its
complex value is ``X[0] + 1j * X[n_fft/2]``.  ``istft`` unpacks it, so the
analysis/synthesis pair is lossless up to float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfigError, InvalidInputError, InvalidShapeError


@dataclass(frozen=True)
class StftConfig:
    """Frame geometry for analysis and synthesis (Hann window)."""

    n_fft: int
    hop: int
    sample_rate: int

    def __post_init__(self):
        if self.n_fft <= 0 or self.n_fft & (self.n_fft - 1):
            raise InvalidConfigError(f"n_fft must be a power of two, got {self.n_fft}")
        if self.hop <= 0:
            raise InvalidConfigError(f"hop must be positive, got {self.hop}")
        if self.n_fft < 2 * self.hop:
            raise InvalidConfigError(f"need n_fft >= 2*hop for overlap-add, got {self.n_fft} < 2*{self.hop}")
        if self.n_fft % self.hop:
            raise InvalidConfigError("hop must divide n_fft so the Hann window satisfies constant overlap-add")
        if self.sample_rate <= 0:
            raise InvalidConfigError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def n_bins(self) -> int:
        """Rows of the packed one-sided grid."""
        return self.n_fft // 2

    @property
    def cola_gain(self) -> float:
        """Constant value of the summed overlapping Hann windows."""
        return 0.5 * self.n_fft / self.hop

    def num_frames(self, n_samples: int) -> int:
        if n_samples < self.n_fft:
            raise InvalidInputError(f"waveform of {n_samples} samples is shorter than one {self.n_fft}-sample window")
        return int(np.ceil((n_samples - self.n_fft) / self.hop)) + 1

    def samples_for_frames(self, n_frames: int) -> int:
        """Largest waveform length analyzed into exactly ``n_frames`` frames."""
        return self.n_fft + (n_frames - 1) * self.hop


@dataclass
class ComplexGram:
    """Polar one-sided spectrogram; shape (n_bins, n_frames), row 0 packed."""

    magnitude: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        self.magnitude = np.asarray(self.magnitude, dtype=np.float64)
        self.phase = np.asarray(self.phase, dtype=np.float64)
        if self.magnitude.shape != self.phase.shape:
            raise InvalidShapeError(f"magnitude {self.magnitude.shape} and phase {self.phase.shape} differ in shape")
        if self.magnitude.ndim != 2:
            raise InvalidShapeError("ComplexGram expects 2-D (freq, time) grids")
        if np.any(self.magnitude < 0):
            raise InvalidInputError("magnitude must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitude.shape


def hann_window(n_fft: int) -> np.ndarray:
    """Periodic Hann window; satisfies COLA at any hop dividing n_fft."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n_fft) / n_fft)


def _wrap_phase(phase: np.ndarray) -> np.ndarray:
    """Map angles into (-pi, pi]."""
    out = np.mod(phase, 2.0 * np.pi)
    out[out > np.pi] -= 2.0 * np.pi
    return out


def pad_for_frames(waveform: np.ndarray, n_frames: int, cfg: StftConfig) -> np.ndarray:
    """Zero-pad or truncate so that stft yields exactly ``n_frames`` frames."""
    target = cfg.samples_for_frames(n_frames)
    wave = np.asarray(waveform, dtype=np.float64).ravel()
    if wave.size >= target:
        return wave[:target]
    return np.concatenate([wave, np.zeros(target - wave.size)])


def stft(waveform: np.ndarray, cfg: StftConfig) -> ComplexGram:
    """Windowed DFT analysis onto the packed one-sided grid.

    Frame count is ``ceil((len - n_fft)/hop) + 1``; the final frame is
    zero-padded.  Rows ascend in frequency from DC.
    """
    wave = np.asarray(waveform, dtype=np.float64)
    if wave.ndim != 1:
        raise InvalidInputError(f"waveform must be mono 1-D, got shape {wave.shape}")
    n_frames = cfg.num_frames(wave.size)
    padded_len = cfg.samples_for_frames(n_frames)
    padded = np.zeros(padded_len)
    padded[: wave.size] = wave

    frame_view = np.lib.stride_tricks.sliding_window_view(padded, cfg.n_fft)[:: cfg.hop]
    frames = frame_view[:n_frames] * hann_window(cfg.n_fft)
    spec = np.fft.rfft(frames, axis=1)

    packed = np.empty((n_frames, cfg.n_bins), dtype=complex)
    packed[:, 0] = spec[:, 0].real + 1j * spec[:, -1].real
    packed[:, 1:] = spec[:, 1 : cfg.n_bins]
    return ComplexGram(magnitude=np.abs(packed).T, phase=_wrap_phase(np.angle(packed)).T)


def istft(gram: ComplexGram, cfg: StftConfig) -> np.ndarray:
    """Overlap-add resynthesis; exact inverse of stft away from the edges."""
    if gram.shape[0] != cfg.n_bins:
        raise InvalidShapeError(f"gram has {gram.shape[0]} rows, config expects {cfg.n_bins}")
    n_frames = gram.shape[1]
    packed = (gram.magnitude * np.exp(1j * gram.phase)).T

    spec = np.empty((n_frames, cfg.n_bins + 1), dtype=complex)
    spec[:, 1 : cfg.n_bins] = packed[:, 1:]
    spec[:, 0] = packed[:, 0].real
    spec[:, -1] = packed[:, 0].imag
    frames = np.fft.irfft(spec, n=cfg.n_fft, axis=1)

    out = np.zeros(cfg.samples_for_frames(n_frames))
    for f in range(n_frames):
        start = f * cfg.hop
        out[start : start + cfg.n_fft] += frames[f]
    return out / cfg.cola_gain


def interior_slice(n_samples: int, cfg: StftConfig) -> slice:
    """Sample range unaffected by partial window overlap at the edges."""
    return slice(cfg.n_fft, max(cfg.n_fft, n_samples - cfg.n_fft))
