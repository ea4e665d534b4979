"""Shared utilities and common functions."""
import hashlib
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, Union

PathLike = Union[str, Path]

_DIGEST_CHUNK = 1 << 20


def generate_id(prefix: str = "RUN") -> str:
    """
    Generate a unique ID with optional prefix.

    Args:
        prefix: Prefix for the ID (default: "RUN")

    Returns:
        Unique ID string
    """
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%d%H%M%S")
    return f"{prefix}-{timestamp}-{uuid.uuid4().hex[:8].upper()}"


def get_timestamp() -> datetime:
    """Current UTC timestamp."""
    return datetime.now(timezone.utc)


def sha256_file(path: PathLike) -> str:
    """Hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(_DIGEST_CHUNK), b""):
            digest.update(block)
    return digest.hexdigest()


def digest_files(paths: Iterable[PathLike], root: PathLike = None) -> Dict[str, str]:
    """
    Digests keyed by a stable name: the path relative to `root`, or the file name.

    Args:
        paths: Files to digest
        root: Directory the names are relative to

    Returns:
        Name-sorted mapping of name to hex digest
    """
    digests = {}
    for path in paths:
        path = Path(path)
        name = path.relative_to(root).as_posix() if root else path.name
        digests[name] = sha256_file(path)
    return dict(sorted(digests.items()))


def format_count(n: int) -> str:
    """Thousands-separated integer, e.g. 110,592."""
    return f"{n:,}"
