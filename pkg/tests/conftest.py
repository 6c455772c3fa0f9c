"""Shared fixtures: a small trained pipeline for service/CLI tests."""

import json

import pytest

from specinpaint.cli import main


@pytest.fixture(scope="session")
def toy_run(tmp_path_factory):
    """Synthesize a small corpus and train briefly; returns artifact paths.

    Step counts are tiny: these checkpoints exercise interfaces, not
    quality (the acceptance suite trains the real toy configuration).
    """
    root = tmp_path_factory.mktemp("toyrun")
    notes = root / "notes"
    run = root / "run"
    assert main(["synth-data", "--out", str(notes), "--count", "48"]) == 0
    assert main(["train-vqvae", "--data", str(notes), "--out", str(run), "--steps", "60"]) == 0
    store = run / "codemaps.spin"
    assert main(["extract-codemaps", "--data", str(notes), "--checkpoint-dir", str(run),
                 "--out", str(store)]) == 0
    for level in ("top", "bottom"):
        assert main(["train-prior", "--level", level, "--store", str(store),
                     "--out", str(run), "--steps", "40"]) == 0
    return {"notes": notes, "run": run, "store": store}


@pytest.fixture()
def toy_families(toy_run):
    with open(toy_run["run"] / "labels.json", "r", encoding="utf-8") as f:
        return json.load(f)["families"]
