"""Loader for note directories in the NSynth convention:
WAV files plus an ``examples.json`` mapping note ids to metadata."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from ..dsp import read_wav, resample_linear
from ..errors import InvalidDatasetError
from .synth import PITCH_MAX, PITCH_MIN, SAMPLE_RATE, NoteRecord


@dataclass
class LoadResult:
    notes: list = field(default_factory=list)
    families: list = field(default_factory=list)  # id -> family name
    skipped: int = 0  # unparsable entries (pitch-filtered notes are not errors)
    filtered: int = 0


def load_nsynth(directory: str) -> LoadResult:
    """Read all notes, filtered to pitch [24, 84]; family names are mapped
    onto a sorted id vocabulary. Unparsable entries are skipped and counted.
    """
    meta_path = os.path.join(directory, "examples.json")
    if not os.path.isfile(meta_path):
        raise InvalidDatasetError(f"missing metadata file {meta_path}")
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            metadata = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidDatasetError(f"unreadable metadata: {exc}") from exc
    if not isinstance(metadata, dict):
        raise InvalidDatasetError("metadata must map note ids to field dicts")

    result = LoadResult()
    names = sorted(
        {
            str(entry.get("instrument_family_str", entry.get("instrument_family", "unknown")))
            for entry in metadata.values()
            if isinstance(entry, dict)
        }
    )
    result.families = names
    family_id = {name: i for i, name in enumerate(names)}

    for key in sorted(metadata):
        entry = metadata[key]
        try:
            pitch = int(entry["pitch"])
            family = str(entry.get("instrument_family_str", entry.get("instrument_family")))
            wav_path = os.path.join(directory, "audio", f"{key}.wav")
            if not os.path.isfile(wav_path):
                wav_path = os.path.join(directory, f"{key}.wav")
            wave, rate = read_wav(wav_path)
        except Exception:
            result.skipped += 1
            continue
        if not PITCH_MIN <= pitch <= PITCH_MAX:
            result.filtered += 1
            continue
        wave = resample_linear(wave, rate, SAMPLE_RATE)
        result.notes.append(
            NoteRecord(waveform=wave, pitch=pitch, instrument=family_id[family],
                       duration=wave.size / SAMPLE_RATE)
        )
    return result


def write_note_dir(directory: str, notes, families) -> None:
    """Write notes in the same convention (used by the synthetic generator)."""
    from ..dsp import write_wav

    audio_dir = os.path.join(directory, "audio")
    os.makedirs(audio_dir, exist_ok=True)
    metadata = {}
    for i, note in enumerate(notes):
        key = f"note_{i:06d}"
        write_wav(os.path.join(audio_dir, f"{key}.wav"), note.waveform, SAMPLE_RATE)
        metadata[key] = {
            "pitch": int(note.pitch),
            "instrument_family": int(note.instrument),
            "instrument_family_str": families[note.instrument],
        }
    with open(os.path.join(directory, "examples.json"), "w", encoding="utf-8") as f:
        json.dump(metadata, f, indent=1)
