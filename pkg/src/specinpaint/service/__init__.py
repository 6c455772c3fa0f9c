"""HTTP service: model registry, session state and the FastAPI app."""

from .app import create_app
from .registry import ModelRegistry, load_registry, save_registry_metadata
from .sessions import Session, SessionStore

__all__ = [
    "ModelRegistry",
    "Session",
    "SessionStore",
    "create_app",
    "load_registry",
    "save_registry_metadata",
]
