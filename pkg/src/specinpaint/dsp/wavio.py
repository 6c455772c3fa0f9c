"""Mono 16-bit PCM WAV reading/writing and linear-interpolation resampling."""

from __future__ import annotations

import io
import wave

import numpy as np

from ..errors import InvalidInputError


def write_wav(path_or_buf, waveform: np.ndarray, sample_rate: int) -> None:
    wave_f = np.asarray(waveform, dtype=np.float64).ravel()
    pcm = (np.clip(wave_f, -1.0, 1.0) * 32767.0).round().astype("<i2")
    with wave.open(path_or_buf if isinstance(path_or_buf, str) else path_or_buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())


def wav_bytes(waveform: np.ndarray, sample_rate: int) -> bytes:
    buf = io.BytesIO()
    write_wav(buf, waveform, sample_rate)
    return buf.getvalue()


def read_wav(path_or_buf) -> tuple[np.ndarray, int]:
    """Return (float waveform in [-1, 1], sample rate); multichannel is averaged."""
    try:
        with wave.open(path_or_buf if isinstance(path_or_buf, str) else path_or_buf, "rb") as r:
            n_channels = r.getnchannels()
            width = r.getsampwidth()
            rate = r.getframerate()
            raw = r.readframes(r.getnframes())
    except (wave.Error, EOFError) as exc:
        raise InvalidInputError(f"not a readable WAV file: {exc}") from exc
    if width != 2:
        raise InvalidInputError(f"only 16-bit PCM supported, got sample width {width}")
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return data, rate


def resample_linear(waveform: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    if rate_in == rate_out:
        return np.asarray(waveform, dtype=np.float64)
    wave_f = np.asarray(waveform, dtype=np.float64)
    n_out = int(round(wave_f.size * rate_out / rate_in))
    t_out = np.arange(n_out) * (rate_in / rate_out)
    return np.interp(t_out, np.arange(wave_f.size), wave_f)
