"""Waveform <-> Mel-IF spectrogram codec."""

from .mel import (
    MelConfig,
    build_mel_filterbank,
    fft_bin_freqs,
    filter_center_freqs,
    hertz_to_mel,
    mel_to_hertz,
    mel_unwarp_matrix,
    mel_warp_matrix,
)
from .melif import MelIFGram, if_to_phase, melif_decode, melif_encode, phase_threshold, phase_to_if
from .stft import ComplexGram, StftConfig, hann_window, interior_slice, istft, pad_for_frames, stft
from .wavio import read_wav, resample_linear, wav_bytes, write_wav

__all__ = [
    "ComplexGram",
    "MelConfig",
    "MelIFGram",
    "StftConfig",
    "build_mel_filterbank",
    "fft_bin_freqs",
    "filter_center_freqs",
    "hann_window",
    "hertz_to_mel",
    "if_to_phase",
    "interior_slice",
    "istft",
    "mel_to_hertz",
    "mel_unwarp_matrix",
    "mel_warp_matrix",
    "melif_decode",
    "melif_encode",
    "pad_for_frames",
    "phase_threshold",
    "phase_to_if",
    "read_wav",
    "resample_linear",
    "stft",
    "wav_bytes",
    "write_wav",
]
