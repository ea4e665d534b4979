"""Accelerator design space: per-knob candidate lists and their enumeration."""
from itertools import product
from math import prod
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, ValidationError

from config.settings import settings
from shared.config_loader import CONFIG_FIELDS, dump_document, load_document
from shared.errors import ConfigError
from shared.models import AcceleratorConfig, PeType, PositiveInt

logger = structlog.get_logger()

Knob = Tuple[PositiveInt, ...]


class ConfigSpaceSpec(BaseModel):
    """Candidate values for every AcceleratorConfig field."""
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    pe_types: Tuple[PeType, ...] = Field(
        min_length=1, validation_alias=AliasChoices("pe_types", "pe_type")
    )
    pe_rows: Knob = Field(min_length=1)
    pe_cols: Knob = Field(min_length=1)
    sp_if: Knob = Field(min_length=1)
    sp_fw: Knob = Field(min_length=1)
    sp_ps: Knob = Field(min_length=1)
    glb: Knob = Field(min_length=1)
    bw: Knob = Field(min_length=1)

    def knobs(self) -> Tuple[tuple, ...]:
        """Candidate lists in AcceleratorConfig field order."""
        return (
            self.pe_types, self.pe_rows, self.pe_cols, self.sp_if,
            self.sp_fw, self.sp_ps, self.glb, self.bw,
        )

    @property
    def size(self) -> int:
        """Cartesian size, invalid combinations included."""
        return prod(len(knob) for knob in self.knobs())

    def restrict(self, **knobs) -> "ConfigSpaceSpec":
        """Copy with some candidate lists replaced."""
        return self.model_validate({**self.to_dict(), **knobs})

    def to_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        return {"pe_types": data["pe_types"], **{k: data[k] for k in CONFIG_FIELDS[1:]}}


class IndexedConfig(NamedTuple):
    """A materialized config and its Cartesian index."""
    config_id: int
    config: AcceleratorConfig


class SpaceEnumeration(NamedTuple):
    configs: List[IndexedConfig]
    skipped: int


def enumerate_space(spec: ConfigSpaceSpec) -> SpaceEnumeration:
    """
    Materialize the Cartesian product in odometer order (last knob fastest).

    Combinations whose scratchpads exceed the global buffer are skipped and
    counted. `config_id` is the position in the full product.
    """
    configs: List[IndexedConfig] = []
    skipped = 0
    for index, values in enumerate(product(*spec.knobs())):
        pe_type, rows, cols, sp_if, sp_fw, sp_ps, glb, bw = values
        if sp_if + sp_fw + sp_ps > glb:
            skipped += 1
            continue
        cfg = AcceleratorConfig(
            pe_type=pe_type, pe_rows=rows, pe_cols=cols, sp_if=sp_if,
            sp_fw=sp_fw, sp_ps=sp_ps, glb=glb, bw=bw,
        )
        configs.append(IndexedConfig(index, cfg))
    logger.info("space_enumerated", size=spec.size, valid=len(configs), skipped=skipped)
    return SpaceEnumeration(configs, skipped)


def sample_space(spec: ConfigSpaceSpec, n: int, seed: int) -> List[IndexedConfig]:
    """
    Uniform sample without replacement of valid configs, in config_id order.

    Returns every valid config when n covers the space.
    """
    if n < 1:
        raise ConfigError(f"sample size must be positive, got {n}")
    valid = enumerate_space(spec).configs
    if n >= len(valid):
        return valid
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(len(valid), size=n, replace=False))
    return [valid[i] for i in picked.tolist()]


def space_from_dict(data: Any) -> ConfigSpaceSpec:
    """Validate a parsed space document."""
    if not isinstance(data, dict):
        raise ConfigError("space document must be an object")
    try:
        return ConfigSpaceSpec.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        field = str(err["loc"][0]) if err["loc"] else None
        if err["type"] == "too_short":
            message = "empty candidate list"
        elif err["type"] == "enum":
            message = f"unknown pe_type {err.get('input')!r}"
        else:
            message = err["msg"]
        raise ConfigError(message, field=field) from e


def load_space(path: Optional[Union[str, Path]] = None) -> ConfigSpaceSpec:
    """Load a space document; `settings.default_space_path` when omitted."""
    path = Path(path or settings.default_space_path)
    spec = space_from_dict(load_document(path))
    logger.info("space_loaded", path=str(path), size=spec.size)
    return spec


def serialize_space(spec: ConfigSpaceSpec) -> str:
    return dump_document(spec.to_dict())
