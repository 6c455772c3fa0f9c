"""In-memory session store with per-session mutation locks."""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..lm import ConditioningLabels
from ..vqvae import CodemapPair


@dataclass
class Session:
    id: str
    codes: CodemapPair
    labels: ConditioningLabels
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def touch(self) -> None:
        self.updated = time.time()


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._guard = threading.Lock()

    def create(self, codes: CodemapPair, labels: ConditioningLabels) -> Session:
        session = Session(id=uuid.uuid4().hex, codes=codes, labels=labels)
        with self._guard:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._guard:
            return self._sessions.get(session_id)

    def delete(self, session_id: str) -> bool:
        with self._guard:
            return self._sessions.pop(session_id, None) is not None

    def __len__(self) -> int:
        return len(self._sessions)

    def snapshot(self, path: str) -> None:
        """Dump all sessions as JSON codemap records (durability is
        best-effort for this single-user tool)."""
        with self._guard:
            payload = [
                {
                    "id": s.id,
                    "pitch": s.labels.pitch,
                    "instrument": s.labels.instrument,
                    "top": s.codes.top.tolist(),
                    "bottom": s.codes.bottom.tolist(),
                }
                for s in self._sessions.values()
            ]
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f)

    def restore(self, path: str) -> int:
        try:
            with open(path, "r", encoding="utf-8") as f:
                payload = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"unreadable session snapshot: {exc}") from exc
        count = 0
        with self._guard:
            for entry in payload:
                session = Session(
                    id=entry["id"],
                    codes=CodemapPair(np.asarray(entry["top"]), np.asarray(entry["bottom"])),
                    labels=ConditioningLabels(pitch=entry["pitch"], instrument=entry["instrument"]),
                )
                self._sessions[session.id] = session
                count += 1
        return count
