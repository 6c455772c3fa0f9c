"""Command-line contract tests: exit codes, summaries, determinism."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from specinpaint.cli import EXIT_CONFIG, EXIT_MISSING_INPUT, EXIT_OK, main
from specinpaint.config import config_from_dict, load_config
from specinpaint.errors import InvalidConfigError
from specinpaint.nn import load_params


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out.strip().splitlines()
    summary = json.loads(out[-1]) if out else None
    return code, summary


class TestConfig:
    def test_profiles_parse(self):
        toy = load_config(None, "toy")
        paper = load_config(None, "paper")
        assert toy.vqvae.codebook_size == 64
        assert paper.vqvae.codebook_size == 512
        assert paper.vqvae_config().top_shape == (32, 4)
        assert paper.transformer_config().model_dim == 512

    def test_unknown_key_rejected(self):
        with pytest.raises(InvalidConfigError):
            config_from_dict({"dsp": {"nfft": 1024}})
        with pytest.raises(InvalidConfigError):
            config_from_dict({"dspx": {}})

    def test_summary_config_roundtrips(self, capsys, tmp_path):
        code, summary = run_cli(capsys, ["synth-data", "--out", str(tmp_path / "n"), "--count", "4"])
        assert code == EXIT_OK
        echoed = summary["config"]
        rebuilt = config_from_dict(
            {k: v for k, v in echoed.items() if k != "seed"} | {"seed": echoed["seed"]}
        )
        assert rebuilt.to_dict() == echoed

    def test_config_file_merging(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"vqvae": {"codebook_size": 32}, "seed": 5}))
        cfg = load_config(str(path), "toy")
        assert cfg.vqvae.codebook_size == 32
        assert cfg.seed == 5
        assert cfg.vqvae.code_dim == 32  # untouched default


class TestExitCodes:
    def test_missing_dataset_exits_3(self, capsys, tmp_path):
        code = main(["train-vqvae", "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "o")])
        assert code == EXIT_MISSING_INPUT

    def test_bad_config_file_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"dsp\": {\"bogus\": 1}}")
        code = main(["--config", str(bad), "synth-data", "--out", str(tmp_path / "n")])
        assert code == EXIT_CONFIG

    def test_missing_store_exits_3(self, tmp_path):
        code = main(["train-prior", "--level", "top", "--store", str(tmp_path / "no.spin"),
                     "--out", str(tmp_path)])
        assert code == EXIT_MISSING_INPUT

    def test_console_script_help(self):
        proc = subprocess.run([sys.executable, "-m", "specinpaint.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "exit codes" in proc.stdout


class TestTrainVqvae:
    def test_zero_steps_writes_initialized_checkpoint(self, capsys, tmp_path, toy_run):
        out = tmp_path / "run0"
        code, summary = run_cli(capsys, [
            "train-vqvae", "--data", str(toy_run["notes"]), "--out", str(out), "--steps", "0",
        ])
        assert code == EXIT_OK
        assert "loss" not in summary["metrics"]
        arrays = load_params(str(out / "vqvae.spnn"))
        assert "codebook_top.codewords" in arrays


class TestSampleDeterminism:
    def test_same_seed_byte_identical_wavs(self, capsys, tmp_path, toy_run):
        paths = [str(tmp_path / f"{i}.wav") for i in range(2)]
        for p in paths:
            code, _ = run_cli(capsys, [
                "sample", "--checkpoint-dir", str(toy_run["run"]),
                "--pitch", "60", "--instrument", "1", "--seed", "7", "--out", p,
            ])
            assert code == EXIT_OK
        assert open(paths[0], "rb").read() == open(paths[1], "rb").read()

    def test_render_and_inpaint_roundtrip(self, capsys, tmp_path, toy_run):
        wav = str(tmp_path / "r.wav")
        code, _ = run_cli(capsys, [
            "render", "--store", str(toy_run["store"]), "--index", "1",
            "--checkpoint-dir", str(toy_run["run"]), "--out", wav,
        ])
        assert code == EXIT_OK
        out = str(tmp_path / "painted.wav")
        code, summary = run_cli(capsys, [
            "inpaint", "--checkpoint-dir", str(toy_run["run"]), "--in", wav,
            "--level", "top", "--freq", "0", "5", "--time", "0", "2",
            "--pitch", "72", "--instrument", "2", "--seed", "3", "--out", out,
        ])
        assert code == EXIT_OK
        assert os.path.getsize(out) > 44  # non-empty WAV payload
