"""Synthetic notes, NSynth-style loading and codemap store tests."""

import json
import os

import numpy as np
import pytest

from specinpaint.data import (
    FAMILIES,
    SAMPLE_RATE,
    CodemapRecord,
    CodemapStore,
    CodemapStoreWriter,
    load_nsynth,
    open_store,
    record_stride,
    synth_note,
    write_note_dir,
)
from specinpaint.dsp import write_wav
from specinpaint.errors import InvalidDatasetError, InvalidInputError, InvalidStoreError


class TestSynthNote:
    def test_pitch_69_is_440hz(self):
        note = synth_note(69, family=1, duration=1.0, seed=0)
        spectrum = np.abs(np.fft.rfft(note.waveform))
        peak_hz = spectrum.argmax() * SAMPLE_RATE / note.waveform.size
        assert abs(peak_hz - 440.0) <= SAMPLE_RATE / note.waveform.size

    def test_seed_determinism(self):
        a = synth_note(60, 0, 0.5, seed=7)
        b = synth_note(60, 0, 0.5, seed=7)
        assert np.array_equal(a.waveform, b.waveform)
        c = synth_note(60, 0, 0.5, seed=8)
        assert not np.array_equal(a.waveform, c.waveform)

    def test_plucked_decays(self):
        note = synth_note(48, FAMILIES.index("plucked"), 1.0, seed=1)
        n = note.waveform.size
        head = np.sqrt(np.mean(note.waveform[: n // 10] ** 2))
        tail = np.sqrt(np.mean(note.waveform[-n // 10 :] ** 2))
        assert tail < 0.2 * head

    def test_peak_normalized(self):
        for fam in range(4):
            note = synth_note(60, fam, 0.5, seed=fam)
            assert np.abs(note.waveform).max() == pytest.approx(0.5, abs=1e-9)

    def test_invalid_args_rejected(self):
        with pytest.raises(InvalidInputError):
            synth_note(90, 0, 1.0, seed=0)
        with pytest.raises(InvalidInputError):
            synth_note(60, 9, 1.0, seed=0)


class TestLoadNsynth:
    def test_empty_directory(self, tmp_path):
        with open(tmp_path / "examples.json", "w") as f:
            json.dump({}, f)
        result = load_nsynth(str(tmp_path))
        assert result.notes == []
        assert result.skipped == 0

    def test_missing_metadata_rejected(self, tmp_path):
        with pytest.raises(InvalidDatasetError):
            load_nsynth(str(tmp_path))

    def test_pitch_filter(self, tmp_path):
        os.makedirs(tmp_path / "audio")
        meta = {}
        for key, pitch in (("a", 60), ("b", 90)):
            write_wav(str(tmp_path / "audio" / f"{key}.wav"), np.zeros(1000), SAMPLE_RATE)
            meta[key] = {"pitch": pitch, "instrument_family_str": "keyboard"}
        with open(tmp_path / "examples.json", "w") as f:
            json.dump(meta, f)
        result = load_nsynth(str(tmp_path))
        assert len(result.notes) == 1
        assert result.notes[0].pitch == 60
        assert result.filtered == 1

    def test_unparsable_entry_skipped_with_count(self, tmp_path):
        os.makedirs(tmp_path / "audio")
        write_wav(str(tmp_path / "audio" / "ok.wav"), np.zeros(1000), SAMPLE_RATE)
        meta = {
            "ok": {"pitch": 60, "instrument_family_str": "string"},
            "missing_wav": {"pitch": 60, "instrument_family_str": "string"},
        }
        with open(tmp_path / "examples.json", "w") as f:
            json.dump(meta, f)
        result = load_nsynth(str(tmp_path))
        assert len(result.notes) == 1
        assert result.skipped == 1

    def test_roundtrip_fixture(self, tmp_path):
        notes = [synth_note(60, 0, 0.3, seed=0), synth_note(72, 3, 0.3, seed=1)]
        write_note_dir(str(tmp_path), notes, FAMILIES)
        result = load_nsynth(str(tmp_path))
        assert len(result.notes) == 2
        assert sorted(n.pitch for n in result.notes) == [60, 72]
        # ids follow the loader's sorted vocabulary; names must round-trip
        names = {result.families[n.instrument] for n in result.notes}
        assert names == {"plucked", "noisy"}
        # PCM16 round trip: waveforms match within quantization
        by_pitch = {n.pitch: n for n in result.notes}
        np.testing.assert_allclose(by_pitch[60].waveform, notes[0].waveform, atol=2e-4)


def make_records(rng, n, top_shape=(4, 2), bottom_shape=(8, 4), k=64):
    return [
        CodemapRecord(
            id=i,
            pitch=int(rng.integers(24, 85)),
            instrument=int(rng.integers(0, 4)),
            top=rng.integers(0, k, top_shape),
            bottom=rng.integers(0, k, bottom_shape),
        )
        for i in range(n)
    ]


class TestCodemapStore:
    def test_write_read_roundtrip(self, tmp_path):
        path = str(tmp_path / "codes.spin")
        rng = np.random.default_rng(0)
        records = make_records(rng, 10)
        with CodemapStoreWriter(path, (4, 2), (8, 4), 64) as w:
            for rec in records:
                w.append(rec)
        store = open_store(path)
        assert len(store) == 10
        assert store.top_shape == (4, 2) and store.bottom_shape == (8, 4) and store.n_codes == 64
        for i, rec in enumerate(records):
            got = store[i]
            assert got.id == rec.id and got.pitch == rec.pitch and got.instrument == rec.instrument
            np.testing.assert_array_equal(got.top, rec.top)
            np.testing.assert_array_equal(got.bottom, rec.bottom)

    def test_random_access_matches_sequential(self, tmp_path):
        path = str(tmp_path / "codes.spin")
        rng = np.random.default_rng(1)
        with CodemapStoreWriter(path, (4, 2), (8, 4), 64) as w:
            for rec in make_records(rng, 20):
                w.append(rec)
        store = open_store(path)
        sequential = [store[i].top.copy() for i in range(20)]
        for i in reversed(range(20)):
            np.testing.assert_array_equal(store[i].top, sequential[i])

    def test_size_is_exactly_header_plus_records(self, tmp_path):
        path = str(tmp_path / "codes.spin")
        with CodemapStoreWriter(path, (4, 2), (8, 4), 64) as w:
            for rec in make_records(np.random.default_rng(2), 7):
                w.append(rec)
        expected = 22 + 7 * record_stride((4, 2), (8, 4))
        assert os.path.getsize(path) == expected

    def test_corrupted_magic_rejected(self, tmp_path):
        path = str(tmp_path / "codes.spin")
        with CodemapStoreWriter(path, (4, 2), (8, 4), 64) as w:
            for rec in make_records(np.random.default_rng(3), 3):
                w.append(rec)
        blob = bytearray(open(path, "rb").read())
        blob[:4] = b"JUNK"
        with open(path, "wb") as f:
            f.write(blob)
        with pytest.raises(InvalidStoreError):
            open_store(path)

    def test_truncated_file_rejected(self, tmp_path):
        path = str(tmp_path / "codes.spin")
        with CodemapStoreWriter(path, (4, 2), (8, 4), 64) as w:
            for rec in make_records(np.random.default_rng(4), 3):
                w.append(rec)
        blob = open(path, "rb").read()
        with open(path, "wb") as f:
            f.write(blob[:-5])
        with pytest.raises(InvalidStoreError):
            open_store(path)

    def test_out_of_range_code_rejected_at_write(self, tmp_path):
        path = str(tmp_path / "codes.spin")
        rec = CodemapRecord(0, 60, 0, np.full((4, 2), 64), np.zeros((8, 4), int))
        with CodemapStoreWriter(path, (4, 2), (8, 4), 64) as w:
            with pytest.raises(InvalidInputError):
                w.append(rec)
