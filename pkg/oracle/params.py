"""Analytical oracle constants loaded from the versioned defaults file."""
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Union

import structlog
from pydantic import BaseModel, ConfigDict, PositiveFloat, ValidationError, model_validator

from config.settings import settings
from shared.config_loader import load_document
from shared.errors import OracleError
from shared.models import PeType

logger = structlog.get_logger()

# Strictly decreasing cost, increasing clock.
PE_COST_ORDER = (PeType.FP32, PeType.INT16, PeType.LIGHTPE2, PeType.LIGHTPE1)


class PeCostParams(BaseModel):
    """Clock and per-PE base cost of one PE type."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    clock_hz: PositiveFloat
    pe_power_mw: PositiveFloat
    pe_area_mm2: PositiveFloat


class OracleParams(BaseModel):
    """
    Constants of the analytical cost oracle.

    Densities are per byte of scratchpad (per PE) or global buffer.
    `spill_factor` multiplies memory traffic when a layer's working set
    exceeds the global buffer. `smooth` drops every ceiling.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    version: str = "1.0"
    spill_factor: PositiveFloat = 2.0
    sp_power_mw_per_byte: PositiveFloat
    glb_power_mw_per_byte: PositiveFloat
    sp_area_mm2_per_byte: PositiveFloat
    glb_area_mm2_per_byte: PositiveFloat
    smooth: bool = False
    pe_types: Dict[PeType, PeCostParams]

    @model_validator(mode="after")
    def _check_pe_types(self) -> "OracleParams":
        missing = [pe.value for pe in PeType if pe not in self.pe_types]
        if missing:
            raise ValueError(f"missing PE types {missing}")
        for faster, slower in zip(PE_COST_ORDER, PE_COST_ORDER[1:]):
            a, b = self.pe_types[faster], self.pe_types[slower]
            if not (a.pe_power_mw > b.pe_power_mw and a.pe_area_mm2 > b.pe_area_mm2):
                raise ValueError(
                    f"per-PE power and area must decrease from {faster.value} to {slower.value}"
                )
        return self

    def clock_hz(self, pe: PeType) -> float:
        return self.pe_types[pe].clock_hz

    def pe_power(self, pe: PeType) -> float:
        return self.pe_types[pe].pe_power_mw

    def pe_area(self, pe: PeType) -> float:
        return self.pe_types[pe].pe_area_mm2

    def with_smooth(self, smooth: bool = True) -> "OracleParams":
        """Copy with the smooth flag set."""
        return self.model_copy(update={"smooth": smooth})


def oracle_params_from_dict(data) -> OracleParams:
    """Validate a parsed defaults document."""
    try:
        return OracleParams.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        field = ".".join(str(part) for part in err["loc"])
        raise OracleError(f"{field}: {err['msg']}" if field else err["msg"]) from e


def load_oracle_params(path: Optional[Union[str, Path]] = None) -> OracleParams:
    """
    Load oracle parameters from a JSON or YAML document.

    Args:
        path: Defaults file, `settings.oracle_params_path` when omitted
    """
    path = Path(path or settings.oracle_params_path)
    params = oracle_params_from_dict(load_document(path))
    logger.info("oracle_params_loaded", path=str(path), version=params.version,
                smooth=params.smooth)
    return params


@lru_cache(maxsize=1)
def default_oracle_params() -> OracleParams:
    """The shipped defaults, loaded once."""
    return load_oracle_params(settings.oracle_params_path)
