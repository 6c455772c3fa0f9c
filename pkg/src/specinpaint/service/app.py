"""HTTP back-end serving analyze/sample/inpaint/render requests.

Matrices in JSON are row-major arrays of arrays with frequency-ascending
rows, exactly as the UI consumes them.  One mutation runs per session at
a time (409 on overlap); all sampling is seeded and echoed back so any
session state can be replayed from its request history.
"""

from __future__ import annotations

import io
import os
import secrets
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, File, HTTPException, Response, UploadFile
from pydantic import BaseModel

from ..dsp import melif_decode, melif_encode, pad_for_frames, read_wav, resample_linear, wav_bytes
from ..errors import InvalidInputError
from ..lm import PITCH_MAX, PITCH_MIN, ConditioningLabels
from ..sampling import RegionSelection, SamplerConfig, generate_from_scratch, inpaint
from .registry import ModelRegistry
from .sessions import Session, SessionStore


class SampleRequest(BaseModel):
    pitch: int
    instrument: int | str
    seed: int | None = None


class InpaintRequest(BaseModel):
    level: str
    freq_start: int
    freq_end: int
    time_start: int
    time_end: int
    pitch: int
    instrument: int | str
    seed: int | None = None
    top_p: float | None = None
    temperature: float | None = None


def create_app(registry: ModelRegistry | None, default_top_p: float = 0.8,
               default_temperature: float = 1.0, snapshot_path: str | None = None,
               static_dir: str | None = None) -> FastAPI:
    store = SessionStore()

    @asynccontextmanager
    async def lifespan(_app):
        yield
        if snapshot_path is not None:
            store.snapshot(snapshot_path)

    app = FastAPI(title="specinpaint service", lifespan=lifespan)
    if static_dir is None and os.path.isfile(os.path.join("frontend", "index.html")):
        static_dir = "frontend"
    if static_dir is not None and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")
    app.state.registry = registry
    app.state.sessions = store

    def reg() -> ModelRegistry:
        if registry is None:
            raise HTTPException(status_code=503, detail="models not loaded")
        return registry

    def instrument_id(instrument) -> int:
        families = reg().families
        if isinstance(instrument, str):
            if instrument in families:
                return families.index(instrument)
            try:
                instrument = int(instrument)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown instrument {instrument!r}") from None
        if not 0 <= int(instrument) < len(families):
            raise HTTPException(status_code=400, detail=f"instrument id {instrument} outside vocabulary")
        return int(instrument)

    def labels_from(pitch: int, instrument) -> ConditioningLabels:
        try:
            return ConditioningLabels(pitch=pitch, instrument=instrument_id(instrument))
        except InvalidInputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    def sampler_config(seed, top_p, temperature) -> SamplerConfig:
        try:
            return SamplerConfig(
                top_p=default_top_p if top_p is None else top_p,
                temperature=default_temperature if temperature is None else temperature,
                seed=secrets.randbits(63) if seed is None else seed,
            )
        except InvalidInputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    def session_payload(session: Session, seed: int | None = None) -> dict:
        r = reg()
        gram = r.vqvae.decode(session.codes)
        payload = {
            "session_id": session.id,
            "top": session.codes.top.tolist(),
            "bottom": session.codes.bottom.tolist(),
            "spectrogram": gram.log_amp.tolist(),
            "pitch": session.labels.pitch,
            "instrument": session.labels.instrument,
        }
        if seed is not None:
            payload["seed"] = seed
        return payload

    def get_session(session_id: str) -> Session:
        reg()
        session = app.state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.get("/status")
    def status():
        r = reg()
        return {
            "top_shape": list(r.hierarchy.top_shape),
            "bottom_shape": list(r.hierarchy.bottom_shape),
            "codebook_size": r.n_codes,
            "pitch_range": [PITCH_MIN, PITCH_MAX],
            "families": list(r.families),
            "model_version": r.version,
        }

    @app.post("/sessions/sample")
    def sample(body: SampleRequest):
        r = reg()
        labels = labels_from(body.pitch, body.instrument)
        cfg = sampler_config(body.seed, None, None)
        codes = generate_from_scratch(r.top, r.bottom, labels, cfg)
        session = app.state.sessions.create(codes, labels)
        return session_payload(session, seed=cfg.seed)

    @app.post("/sessions/analyze")
    def analyze(file: UploadFile = File(...), pitch: int = 60, instrument: int | str = 0):
        r = reg()
        labels = labels_from(pitch, instrument)
        try:
            wave, rate = read_wav(io.BytesIO(file.file.read()))
        except InvalidInputError as exc:
            raise HTTPException(status_code=422, detail=f"undecodable upload: {exc}") from exc
        wave = resample_linear(wave, rate, r.stft_cfg.sample_rate)
        wave = pad_for_frames(wave, r.vqvae.cfg.input_shape[1], r.stft_cfg)
        gram = melif_encode(wave, r.stft_cfg, r.mel_cfg, r.vqvae.cfg.amp_floor)
        codes = r.vqvae.encode(gram)
        session = app.state.sessions.create(codes, labels)
        return session_payload(session)

    @app.post("/sessions/{session_id}/inpaint")
    def inpaint_session(session_id: str, body: InpaintRequest):
        r = reg()
        session = get_session(session_id)
        labels = labels_from(body.pitch, body.instrument)
        try:
            region = RegionSelection(
                level=body.level,
                freq_start=body.freq_start,
                freq_end=body.freq_end,
                time_start=body.time_start,
                time_end=body.time_end,
            )
        except InvalidInputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        cfg = sampler_config(body.seed, body.top_p, body.temperature)
        if not session.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="session is being mutated by another request")
        try:
            try:
                new_codes = inpaint(r.top, r.bottom, session.codes, region, labels, cfg)
            except InvalidInputError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            session.codes = new_codes
            session.labels = labels
            session.touch()
            return session_payload(session, seed=cfg.seed)
        finally:
            session.lock.release()

    @app.get("/sessions/{session_id}/audio")
    def audio(session_id: str):
        r = reg()
        session = get_session(session_id)
        gram = r.vqvae.decode(session.codes)
        wave = melif_decode(gram, r.stft_cfg, r.mel_cfg)
        peak = np.abs(wave).max()
        if peak > 1.0:
            wave = wave / peak
        return Response(content=wav_bytes(wave, r.stft_cfg.sample_rate), media_type="audio/wav")

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete(session_id: str):
        reg()
        if not app.state.sessions.delete(session_id):
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return Response(status_code=204)

    return app
