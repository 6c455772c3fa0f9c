"""Training-data provisioning: synthesis, loading and the codemap store."""

from .extract import amp_max_over, extract_codemaps, note_to_gram
from .nsynth import LoadResult, load_nsynth, write_note_dir
from .store import CodemapRecord, CodemapStore, CodemapStoreWriter, open_store, record_stride
from .synth import FAMILIES, SAMPLE_RATE, NoteRecord, midi_to_hz, synth_note

__all__ = [
    "FAMILIES",
    "SAMPLE_RATE",
    "CodemapRecord",
    "CodemapStore",
    "CodemapStoreWriter",
    "LoadResult",
    "NoteRecord",
    "amp_max_over",
    "extract_codemaps",
    "load_nsynth",
    "midi_to_hz",
    "note_to_gram",
    "open_store",
    "record_stride",
    "synth_note",
    "write_note_dir",
]
