"""Configuration package."""
from .settings import settings, PROJECT_ROOT

__all__ = ["settings", "PROJECT_ROOT"]
