"""Synthetic instrument notes: a desk-scale stand-in for a real note corpus.

Four families with distinct envelope/spectrum recipes give the models
label diversity to condition on.  Everything is additive synthesis plus
(for the noisy family) filtered noise; a seed makes notes bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError

FAMILIES = ("plucked", "sustained", "brassy", "noisy")
SAMPLE_RATE = 16000
PITCH_MIN = 24
PITCH_MAX = 84


@dataclass
class NoteRecord:
    waveform: np.ndarray
    pitch: int
    instrument: int
    duration: float

    def __post_init__(self):
        if not PITCH_MIN <= self.pitch <= PITCH_MAX:
            raise InvalidInputError(f"pitch {self.pitch} outside [{PITCH_MIN}, {PITCH_MAX}]")


def midi_to_hz(pitch: int) -> float:
    return 440.0 * 2.0 ** ((pitch - 69) / 12.0)


def _adsr(n: int, attack: float, decay_to: float, release: float, release_to: float) -> np.ndarray:
    env = np.ones(n)
    a = max(1, int(n * attack))
    env[:a] = np.linspace(0.0, 1.0, a)
    d = max(1, int(n * 0.15))
    env[a : a + d] = np.linspace(1.0, decay_to, min(d, n - a))
    env[a + d :] = decay_to
    r = max(1, int(n * release))
    env[n - r :] *= np.linspace(1.0, release_to, r)
    return env


def synth_note(pitch: int, family: int, duration: float, seed: int,
               sample_rate: int = SAMPLE_RATE) -> NoteRecord:
    """Additive-synthesis note, peak-normalized to 0.5."""
    if not PITCH_MIN <= pitch <= PITCH_MAX:
        raise InvalidInputError(f"pitch {pitch} outside [{PITCH_MIN}, {PITCH_MAX}]")
    if not 0 <= family < len(FAMILIES):
        raise InvalidInputError(f"family id {family} outside [0, {len(FAMILIES)})")
    if duration <= 0:
        raise InvalidInputError("duration must be positive")

    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    f0 = midi_to_hz(pitch)
    nyquist = sample_rate / 2.0

    name = FAMILIES[family]
    if name == "plucked":
        amps = [1.0 / k for k in range(1, 9)]
        env = np.exp(-5.0 * t / duration)
    elif name == "sustained":
        amps = [1.0 / k**2 for k in range(1, 7)]
        env = _adsr(n, attack=0.05, decay_to=0.9, release=0.10, release_to=0.3)
    elif name == "brassy":
        amps = [1.0 / np.sqrt(k) for k in range(1, 11)]
        env = _adsr(n, attack=0.15, decay_to=0.95, release=0.10, release_to=0.4)
    else:  # noisy
        amps = [1.0 / k for k in range(1, 5)]
        env = _adsr(n, attack=0.05, decay_to=0.85, release=0.10, release_to=0.3)

    wave = np.zeros(n)
    for k, amp in enumerate(amps, start=1):
        freq = k * f0
        if freq >= nyquist:
            break
        wave += amp * np.sin(2.0 * np.pi * freq * t + rng.uniform(0.0, 2.0 * np.pi))
    wave *= env

    if name == "noisy":
        noise = rng.standard_normal(n)
        kernel = np.hanning(33)
        noise = np.convolve(noise, kernel / kernel.sum(), mode="same")
        wave += 0.35 * noise / max(np.abs(noise).max(), 1e-12) * env

    wave = 0.5 * wave / max(np.abs(wave).max(), 1e-12)
    return NoteRecord(waveform=wave, pitch=pitch, instrument=family, duration=duration)
