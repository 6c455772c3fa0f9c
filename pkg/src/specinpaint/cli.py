"""Operator command line: dataset synthesis, training, extraction,
sampling, rendering and serving.

Every command prints one machine-readable JSON summary line on success
and exits 0; failures exit with a distinct documented code.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import nn
from .config import RunConfig, load_config
from .data import (
    FAMILIES,
    amp_max_over,
    extract_codemaps,
    load_nsynth,
    note_to_gram,
    open_store,
    synth_note,
    write_note_dir,
)
from .dsp import melif_decode, pad_for_frames, read_wav, resample_linear, melif_encode, write_wav
from .errors import (
    InvalidConfigError,
    InvalidDatasetError,
    InvalidInputError,
    InvalidStoreError,
    NumericError,
    UnavailableModelError,
)
from .lm import CodemapTransformer, ConditioningLabels, MaskSampler, bottom_batch, top_batch, train_bottom_step, train_top_step
from .sampling import RegionSelection, SamplerConfig, generate_from_scratch, inpaint
from .service import load_registry, save_registry_metadata
from .service.registry import BOTTOM_CKPT, BOTTOM_META, TOP_CKPT, TOP_META, VQVAE_CKPT, VQVAE_META
from .vqvae import CodemapPair, VqVae

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_MISSING_INPUT = 3
EXIT_NUMERIC = 4

EPILOG = """exit codes:
  0  success
  1  unexpected internal error
  2  invalid arguments or configuration
  3  missing or invalid input artifact (dataset, store, checkpoint)
  4  numeric error during training (non-finite loss/gradient)
"""


def _summary(command: str, cfg: RunConfig, started: float, **extra) -> None:
    line = {"command": command, "ok": True, "elapsed_s": round(time.time() - started, 3),
            "config": cfg.to_dict()}
    line.update(extra)
    print(json.dumps(line))


def _metrics_writer(out_dir: str):
    path = os.path.join(out_dir, "metrics.jsonl")
    handle = open(path, "a", encoding="utf-8")

    def write(record: dict) -> None:
        handle.write(json.dumps(record) + "\n")
        handle.flush()

    return write, handle


# -- commands ----------------------------------------------------------------


def cmd_synth_data(args, cfg: RunConfig) -> None:
    started = time.time()
    pitches = list(range(cfg.data.pitch_min, cfg.data.pitch_max + 1))
    notes = []
    for i in range(args.count):
        family = i % len(FAMILIES)
        pitch = pitches[(i // len(FAMILIES)) % len(pitches)]
        notes.append(synth_note(pitch, family, cfg.data.note_duration, seed=cfg.seed + i))
    os.makedirs(args.out, exist_ok=True)
    write_note_dir(args.out, notes, FAMILIES)
    _summary("synth-data", cfg, started, outputs={"dir": args.out}, metrics={"notes": len(notes)})


def _load_grams(cfg: RunConfig, data_dir: str):
    result = load_nsynth(data_dir)
    if not result.notes:
        raise InvalidDatasetError(f"no usable notes in {data_dir}")
    stft_cfg, mel_cfg = cfg.stft_config(), cfg.mel_config()
    n_frames = cfg.vqvae.input_shape[1]
    grams = [note_to_gram(n, stft_cfg, mel_cfg, cfg.dsp.log_amp_floor, n_frames) for n in result.notes]
    return result, grams


def cmd_train_vqvae(args, cfg: RunConfig) -> None:
    started = time.time()
    result, grams = _load_grams(cfg, args.data)
    amp_max = max(cfg.dsp.log_amp_floor + 1.0, max(float(g.log_amp.max()) for g in grams))
    rng = np.random.default_rng(cfg.seed)
    model = VqVae(cfg.vqvae_config(), rng, amp_max=amp_max)
    batch_source = np.stack([model.normalize(g) for g in grams])

    os.makedirs(args.out, exist_ok=True)
    write_metrics, handle = _metrics_writer(args.out)
    steps = cfg.vqvae.steps if args.steps is None else args.steps
    metrics = {}
    for step in range(steps):
        idx = rng.integers(0, batch_source.shape[0], cfg.vqvae.batch_size)
        metrics = model.train_step(batch_source[idx], lr=cfg.vqvae.learning_rate)
        if step % 50 == 0 or step == steps - 1:
            write_metrics({"step": step, **{k: round(v, 5) for k, v in metrics.items()}})
    handle.close()

    model.save(os.path.join(args.out, VQVAE_CKPT), os.path.join(args.out, VQVAE_META))
    save_registry_metadata(args.out, cfg.stft_config(), cfg.mel_config(), result.families)
    _summary("train-vqvae", cfg, started,
             outputs={"checkpoint": os.path.join(args.out, VQVAE_CKPT)},
             metrics={"steps": steps, **{k: round(v, 5) for k, v in metrics.items()}})


def cmd_extract_codemaps(args, cfg: RunConfig) -> None:
    started = time.time()
    result, _ = _load_grams(cfg, args.data)
    model = VqVae.load(os.path.join(args.checkpoint_dir, VQVAE_CKPT),
                       os.path.join(args.checkpoint_dir, VQVAE_META))
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    store = extract_codemaps(model, result.notes, args.out, cfg.stft_config(), cfg.mel_config())
    _summary("extract-codemaps", cfg, started, outputs={"store": args.out},
             metrics={"records": len(store)})
    store.close()


def cmd_train_prior(args, cfg: RunConfig) -> None:
    started = time.time()
    store = open_store(args.store)
    labels_path = os.path.join(args.out, "labels.json")
    if not os.path.isfile(labels_path):
        raise InvalidInputError(f"missing {labels_path}; run train-vqvae into the same --out first")
    with open(labels_path, "r", encoding="utf-8") as f:
        families = json.load(f)["families"]

    if store.bottom_shape[0] % store.top_shape[0] or store.bottom_shape[1] % store.top_shape[1]:
        raise InvalidStoreError("store shapes are not hierarchically divisible")
    from .lm import HierarchyConfig

    hier = HierarchyConfig(
        top_shape=store.top_shape,
        patch=(store.bottom_shape[0] // store.top_shape[0], store.bottom_shape[1] // store.top_shape[1]),
    )
    rng = np.random.default_rng(cfg.seed + (1 if args.level == "top" else 2))
    model = CodemapTransformer(cfg.transformer_config(), hier, args.level, store.n_codes,
                               n_instruments=len(families), rng=rng)
    tops, bottoms, pitches, instruments = store.grids()
    sampler = MaskSampler(cfg.lm.mask_keep_min, cfg.lm.mask_keep_max)

    write_metrics, handle = _metrics_writer(args.out)
    steps = cfg.lm.steps if args.steps is None else args.steps
    metrics = {}
    for step in range(steps):
        idx = rng.integers(0, len(store), cfg.lm.batch_size)
        lr = nn.warmup_lr(cfg.lm.learning_rate, step, cfg.lm.warmup_steps)
        if args.level == "top":
            batch = top_batch(tops[idx], pitches[idx], instruments[idx], hier, store.n_codes, sampler, rng)
            metrics = train_top_step(model, batch, lr, cfg.lm.grad_clip, cfg.lm.label_smoothing)
        else:
            batch = bottom_batch(bottoms[idx], tops[idx], pitches[idx], instruments[idx], hier, store.n_codes)
            metrics = train_bottom_step(model, batch, lr, cfg.lm.grad_clip, cfg.lm.label_smoothing)
        if step % 50 == 0 or step == steps - 1:
            write_metrics({"level": args.level, "step": step,
                           **{k: round(v, 5) for k, v in metrics.items()}})
    handle.close()
    store.close()

    names = (TOP_CKPT, TOP_META) if args.level == "top" else (BOTTOM_CKPT, BOTTOM_META)
    model.save(os.path.join(args.out, names[0]), os.path.join(args.out, names[1]))
    _summary("train-prior", cfg, started,
             outputs={"checkpoint": os.path.join(args.out, names[0]), "level": args.level},
             metrics={"steps": steps, **{k: round(v, 5) for k, v in metrics.items()}})


def _decode_to_wav(registry, codes: CodemapPair, out_path: str) -> None:
    gram = registry.vqvae.decode(codes)
    wave = melif_decode(gram, registry.stft_cfg, registry.mel_cfg)
    peak = np.abs(wave).max()
    if peak > 1.0:
        wave = wave / peak
    write_wav(out_path, wave, registry.stft_cfg.sample_rate)


def cmd_sample(args, cfg: RunConfig) -> None:
    started = time.time()
    registry = load_registry(args.checkpoint_dir)
    labels = ConditioningLabels(pitch=args.pitch, instrument=args.instrument)
    sampler = SamplerConfig(top_p=cfg.sampler.top_p, temperature=cfg.sampler.temperature,
                            seed=cfg.seed if args.seed is None else args.seed)
    codes = generate_from_scratch(registry.top, registry.bottom, labels, sampler)
    _decode_to_wav(registry, codes, args.out)
    _summary("sample", cfg, started, outputs={"wav": args.out},
             metrics={"seed": sampler.seed, "pitch": args.pitch, "instrument": args.instrument})


def cmd_inpaint(args, cfg: RunConfig) -> None:
    started = time.time()
    registry = load_registry(args.checkpoint_dir)
    wave, rate = read_wav(args.input)
    wave = resample_linear(wave, rate, registry.stft_cfg.sample_rate)
    wave = pad_for_frames(wave, registry.vqvae.cfg.input_shape[1], registry.stft_cfg)
    gram = melif_encode(wave, registry.stft_cfg, registry.mel_cfg, registry.vqvae.cfg.amp_floor)
    codes = registry.vqvae.encode(gram)

    labels = ConditioningLabels(pitch=args.pitch, instrument=args.instrument)
    region = RegionSelection(level=args.level, freq_start=args.freq[0], freq_end=args.freq[1],
                             time_start=args.time[0], time_end=args.time[1])
    sampler = SamplerConfig(top_p=cfg.sampler.top_p, temperature=cfg.sampler.temperature,
                            seed=cfg.seed if args.seed is None else args.seed)
    out_codes = inpaint(registry.top, registry.bottom, codes, region, labels, sampler)
    _decode_to_wav(registry, out_codes, args.out)
    _summary("inpaint", cfg, started, outputs={"wav": args.out},
             metrics={"seed": sampler.seed, "level": args.level})


def cmd_render(args, cfg: RunConfig) -> None:
    started = time.time()
    registry = load_registry(args.checkpoint_dir)
    store = open_store(args.store)
    if not 0 <= args.index < len(store):
        raise InvalidInputError(f"index {args.index} outside store of {len(store)} records")
    record = store[args.index]
    _decode_to_wav(registry, CodemapPair(record.top, record.bottom), args.out)
    store.close()
    _summary("render", cfg, started, outputs={"wav": args.out},
             metrics={"index": args.index, "pitch": record.pitch, "instrument": record.instrument})


def cmd_serve(args, cfg: RunConfig) -> None:
    import uvicorn

    from .service import create_app

    registry = load_registry(args.checkpoint_dir)
    app = create_app(registry, default_top_p=cfg.sampler.top_p,
                     default_temperature=cfg.sampler.temperature, snapshot_path=args.snapshot)
    uvicorn.run(app, host=args.host, port=args.port)


# -- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specinpaint",
        description="Interactive instrument-sound generation by codemap inpainting.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", help="JSON config file merged over the profile defaults")
    parser.add_argument("--profile", default="toy", choices=["toy", "paper"])
    parser.add_argument("--seed", type=int, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", help="generate a synthetic note directory")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=256)
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("train-vqvae", help="train the autoencoder on a note directory")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_train_vqvae)

    p = sub.add_parser("extract-codemaps", help="encode every note into a SPIN store")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract_codemaps)

    p = sub.add_parser("train-prior", help="train one codemap Transformer")
    p.add_argument("--level", required=True, choices=["top", "bottom"])
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_train_prior)

    p = sub.add_parser("sample", help="generate a note from scratch")
    p.add_argument("--checkpoint-dir", required=True)
    p.add_argument("--pitch", type=int, required=True)
    p.add_argument("--instrument", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("inpaint", help="regenerate a region of an input WAV")
    p.add_argument("--checkpoint-dir", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--level", required=True, choices=["top", "bottom"])
    p.add_argument("--freq", type=int, nargs=2, required=True, metavar=("F0", "F1"))
    p.add_argument("--time", type=int, nargs=2, required=True, metavar=("T0", "T1"))
    p.add_argument("--pitch", type=int, required=True)
    p.add_argument("--instrument", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_inpaint)

    p = sub.add_parser("render", help="decode one stored codemap record to audio")
    p.add_argument("--store", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--checkpoint-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--checkpoint-dir", default=os.environ.get("SPECTRO_CHECKPOINT_DIR"),
                   help="defaults to $SPECTRO_CHECKPOINT_DIR")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--snapshot", help="write a session snapshot here on shutdown")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.profile)
        if args.seed is not None:
            import dataclasses

            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.command == "serve" and not args.checkpoint_dir:
            raise InvalidConfigError("serve needs --checkpoint-dir or $SPECTRO_CHECKPOINT_DIR")
        args.func(args, cfg)
        return EXIT_OK
    except InvalidConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidDatasetError, InvalidStoreError, UnavailableModelError, InvalidInputError,
            FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # pragma: no cover
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
