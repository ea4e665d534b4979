"""Pluggable top-1 accuracy for sampled architectures."""
import math
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Tuple, Union

import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from coexplorer.arch_space import ArchChoice
from shared.errors import AccuracyLookupError, DatasetError
from shared.models import PeType

logger = structlog.get_logger()

TABLE_COLUMNS = ("arch_index", "pe_type", "top1_percent")


class AccuracyProvider(ABC):
    """Top-1 accuracy (percent, in (0, 100)) of an architecture on a PE type."""

    mode: str = "base"

    @abstractmethod
    def top1(self, arch_index: int, choice: ArchChoice, pe: PeType) -> float:
        """Accuracy in percent."""


class SyntheticAccuracyParams(BaseModel):
    """
    top1 = base + gain * (1 - exp(-s / depth_scale)) - penalty[pe]
    where s = sum(reps * channels) / channel_unit.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    base: float = 60.0
    gain: float = 34.0
    depth_scale: float = Field(default=20.0, gt=0)
    channel_unit: float = Field(default=64.0, gt=0)
    penalties: Dict[PeType, float] = {
        PeType.FP32: 0.0,
        PeType.INT16: 0.0,
        PeType.LIGHTPE2: 0.3,
        PeType.LIGHTPE1: 1.0,
    }

    @model_validator(mode="after")
    def _check_penalties(self) -> "SyntheticAccuracyParams":
        p = self.penalties
        if set(p) != set(PeType):
            raise ValueError("a penalty is required for every PE type")
        if not 0 <= p[PeType.FP32] == p[PeType.INT16] <= p[PeType.LIGHTPE2] <= p[PeType.LIGHTPE1]:
            raise ValueError("penalties must satisfy 0 <= FP32 = INT16 <= LightPE2 <= LightPE1")
        if self.base - p[PeType.LIGHTPE1] <= 0 or self.base + self.gain >= 100:
            raise ValueError("accuracy would leave (0, 100)")
        return self


class SyntheticAccuracyProvider(AccuracyProvider):
    """Monotone saturating function of channel-weighted depth, for demos and tests."""

    mode = "synthetic"

    def __init__(self, params: SyntheticAccuracyParams = SyntheticAccuracyParams()):
        self.params = params

    def top1(self, arch_index: int, choice: ArchChoice, pe: PeType) -> float:
        p = self.params
        s = sum(reps * channels for reps, channels in choice.selections) / p.channel_unit
        return p.base + p.gain * (1.0 - math.exp(-s / p.depth_scale)) - p.penalties[pe]


class TableAccuracyProvider(AccuracyProvider):
    """Externally measured accuracies keyed by (arch_index, PE type)."""

    mode = "table"

    def __init__(self, table: Dict[Tuple[int, PeType], float]):
        self.table = dict(table)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TableAccuracyProvider":
        """
        Read `arch_index,pe_type,top1_percent` rows.

        Raises:
            DatasetError: wrong columns, unknown PE type or accuracy outside (0, 100)
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"accuracy table not found: {path}")
        df = pd.read_csv(path)
        if list(df.columns) != list(TABLE_COLUMNS):
            raise DatasetError(f"{path.name}: expected columns {list(TABLE_COLUMNS)}")
        table = {}
        for row in df.itertuples(index=False):
            try:
                pe = PeType(row.pe_type)
            except ValueError:
                raise DatasetError(f"{path.name}: unknown pe_type {row.pe_type!r}") from None
            if not 0 < row.top1_percent < 100:
                raise DatasetError(f"{path.name}: top1_percent {row.top1_percent} outside (0, 100)")
            table[(int(row.arch_index), pe)] = float(row.top1_percent)
        logger.info("accuracy_table_loaded", path=str(path), entries=len(table))
        return cls(table)

    def top1(self, arch_index: int, choice: ArchChoice, pe: PeType) -> float:
        try:
            return self.table[(arch_index, pe)]
        except KeyError:
            raise AccuracyLookupError(f"no accuracy for architecture {arch_index} on {pe.value}") from None
