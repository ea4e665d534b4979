"""Database module for the SQLite run registry."""
from .models import RunDB
from .sqlite_db import RunRegistry, get_registry

__all__ = [
    "RunDB",
    "RunRegistry",
    "get_registry",
]
