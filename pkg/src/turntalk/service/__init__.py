"""Service wiring: configuration, persistence, asset storage, the
composition root, and the HTTP adapter."""

from .config import ServiceConfig, load_config
from .runtime import Runtime

__all__ = ["Runtime", "ServiceConfig", "load_config"]
