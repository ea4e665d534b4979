"""Loaders for accelerator, network and space documents."""
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import structlog
import yaml
from pydantic import ValidationError

from config.settings import settings
from shared.errors import ConfigError, DseError, NetworkError
from shared.models import AcceleratorConfig, NetworkConfig

logger = structlog.get_logger()

CONFIG_FIELDS = ("pe_type", "pe_rows", "pe_cols", "sp_if", "sp_fw", "sp_ps", "glb", "bw")
LAYER_FIELDS = ("a", "c", "f", "k", "s", "p", "rs", "ds")

PathLike = Union[str, Path]


def parse_document(text: str, fmt: str = "json") -> Any:
    """
    Parse a JSON or YAML document.

    Args:
        text: Document text
        fmt: "json" or "yaml"

    Returns:
        Parsed document
    """
    try:
        if fmt == "yaml":
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"malformed {fmt} document: {e}") from e


def load_document(path: PathLike) -> Any:
    """Load a document, choosing YAML for .yaml/.yml files and JSON otherwise."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"document not found: {path}")
    fmt = "yaml" if path.suffix in (".yaml", ".yml") else "json"
    return parse_document(path.read_text(encoding="utf-8"), fmt)


def dump_document(data: Dict[str, Any]) -> str:
    """Deterministic JSON: insertion key order, two-space indent, trailing newline."""
    return json.dumps(data, indent=2) + "\n"


def _validation_message(err: Dict[str, Any]) -> str:
    kind = err["type"]
    if kind == "missing":
        return "missing field"
    if kind == "enum":
        return f"unknown pe_type {err.get('input')!r}"
    if kind == "greater_than":
        return f"non-positive size {err.get('input')!r}"
    if kind == "greater_than_equal":
        return f"negative value {err.get('input')!r}"
    if kind == "extra_forbidden":
        return "unknown field"
    return err["msg"]


def _embedded_error(exc: ValidationError) -> Optional[DseError]:
    for err in exc.errors():
        inner = (err.get("ctx") or {}).get("error")
        if isinstance(inner, DseError):
            return inner
    return None


def accelerator_config_from_dict(data: Any) -> AcceleratorConfig:
    """
    Build an AcceleratorConfig from a parsed document.

    Raises:
        ConfigError: naming the offending field
    """
    if not isinstance(data, dict):
        raise ConfigError("accelerator config must be an object")
    try:
        return AcceleratorConfig.model_validate(data)
    except ValidationError as e:
        inner = _embedded_error(e)
        if inner is not None:
            raise inner from e
        err = e.errors()[0]
        field = ".".join(str(part) for part in err["loc"]) or None
        raise ConfigError(_validation_message(err), field=field) from e


def parse_accelerator_config(text: str, fmt: str = "json") -> AcceleratorConfig:
    """Parse an accelerator config document."""
    return accelerator_config_from_dict(parse_document(text, fmt))


def accelerator_config_to_dict(cfg: AcceleratorConfig) -> Dict[str, Any]:
    """Config as a plain dict in the documented field order."""
    data = cfg.model_dump(mode="json")
    return {name: data[name] for name in CONFIG_FIELDS}


def serialize_accelerator_config(cfg: AcceleratorConfig) -> str:
    """Serialize an accelerator config with a stable field order."""
    return dump_document(accelerator_config_to_dict(cfg))


def network_from_dict(data: Any) -> NetworkConfig:
    """
    Build a NetworkConfig from a parsed document; rs/ds default to 0.

    Raises:
        NetworkError: naming the offending layer index
    """
    if not isinstance(data, dict):
        raise NetworkError("network document must be an object")
    layers = data.get("layers")
    if not layers:
        raise NetworkError("empty layer list")
    try:
        return NetworkConfig.model_validate(data)
    except ValidationError as e:
        inner = _embedded_error(e)
        err = e.errors()[0]
        loc = err["loc"]
        index = loc[1] if len(loc) > 1 and loc[0] == "layers" and isinstance(loc[1], int) else None
        if isinstance(inner, NetworkError):
            raise inner from e
        if inner is not None:
            raise NetworkError(str(inner), layer_index=index) from e
        if index is None:
            field = ".".join(map(str, loc))
        else:
            field = str(loc[2]) if len(loc) > 2 else ""
        message = _validation_message(err)
        raise NetworkError(f"{field}: {message}" if field else message, layer_index=index) from e


def load_network(text: str, fmt: str = "json") -> NetworkConfig:
    """Parse a network document."""
    return network_from_dict(parse_document(text, fmt))


def network_to_dict(network: NetworkConfig) -> Dict[str, Any]:
    """Network as a plain dict; `pool` is emitted only when set."""
    layers = []
    for layer in network.layers:
        record = {name: getattr(layer, name) for name in LAYER_FIELDS}
        if layer.pool:
            record["pool"] = True
        layers.append(record)
    return {"name": network.name, "layers": layers}


def serialize_network(network: NetworkConfig) -> str:
    """Serialize a network with a stable field order."""
    return dump_document(network_to_dict(network))


def load_network_file(path: PathLike) -> NetworkConfig:
    """Load one network document from disk."""
    path = Path(path)
    try:
        network = network_from_dict(load_document(path))
    except NetworkError as e:
        logger.error("network_load_failed", file=str(path), error=str(e))
        raise
    logger.info("network_loaded", name=network.name, layers=len(network.layers))
    return network


def load_networks(sources: Union[PathLike, Sequence[PathLike]]) -> List[NetworkConfig]:
    """
    Load networks from a directory (every *.json/*.yaml, sorted by name) or a list of files.

    Args:
        sources: Directory path, single file, or sequence of files

    Returns:
        Networks in deterministic order
    """
    if isinstance(sources, (str, Path)):
        source = Path(sources)
        if source.is_dir():
            files: Iterable[Path] = sorted(
                p for p in source.iterdir() if p.suffix in (".json", ".yaml", ".yml")
            )
        elif source.exists():
            files = [source]
        else:
            raise FileNotFoundError(f"networks path not found: {source}")
    else:
        files = [Path(p) for p in sources]
    networks = [load_network_file(p) for p in files]
    if not networks:
        raise NetworkError(f"no network documents found in {sources}")
    return networks


class NetworkLibrary:
    """Named access to the shipped network layer tables."""

    def __init__(self, networks_dir: Optional[PathLike] = None):
        """
        Initialize the library.

        Args:
            networks_dir: Directory containing network documents
        """
        self.networks_dir = Path(networks_dir or settings.networks_dir)
        self._cache: Dict[str, NetworkConfig] = {}

    def names(self) -> List[str]:
        """Names of the available network files (without suffix)."""
        return sorted(p.stem for p in self.networks_dir.glob("*.json"))

    def get(self, name: str) -> NetworkConfig:
        """Load a network by file stem, e.g. "vgg16"."""
        if name in self._cache:
            return self._cache[name]
        path = self.networks_dir / f"{name}.json"
        if not path.exists():
            logger.warning("network_not_found", name=name, file=str(path))
            raise FileNotFoundError(f"network not found: {path}")
        network = load_network_file(path)
        self._cache[name] = network
        return network

