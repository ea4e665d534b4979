"""Run manifests: provenance of every output tree."""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import structlog
from pydantic import BaseModel, ConfigDict, ValidationError

from cli import __version__
from shared.config_loader import dump_document, load_document
from shared.errors import DatasetError
from shared.utils import sha256_file

logger = structlog.get_logger()

SCHEMA_VERSION = 1
MANIFEST_FILE = "manifest.json"


class RunManifest(BaseModel):
    """Resolved parameters, seed, input digests and outputs of one run."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: int = SCHEMA_VERSION
    command: str
    params: Dict[str, Any]
    seed: Optional[int] = None
    inputs: Dict[str, str] = {}
    tool_version: str = __version__
    outputs: List[str] = []


def output_list(paths: Sequence[Union[str, Path]], out_dir: Union[str, Path]) -> List[str]:
    """Sorted POSIX paths relative to the output directory, manifest excluded."""
    out_dir = Path(out_dir)
    names = {Path(p).resolve().relative_to(out_dir.resolve()).as_posix() for p in paths}
    names.discard(MANIFEST_FILE)
    return sorted(names)


def write_manifest(manifest: RunManifest, out_dir: Union[str, Path]) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / MANIFEST_FILE
    path.write_text(dump_document(manifest.model_dump(mode="json")), encoding="utf-8")
    logger.info("manifest_written", path=str(path), outputs=len(manifest.outputs))
    return path


def read_manifest(run_dir: Union[str, Path]) -> RunManifest:
    """
    Load the manifest of a run directory.

    Raises:
        FileNotFoundError: no manifest in the directory
        DatasetError: the manifest does not match the schema
    """
    path = Path(run_dir) / MANIFEST_FILE
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    try:
        return RunManifest.model_validate(load_document(path))
    except ValidationError as e:
        raise DatasetError(f"{path}: invalid manifest: {e.errors()[0]['msg']}") from e


def manifest_digest(path: Union[str, Path]) -> str:
    return sha256_file(path)
