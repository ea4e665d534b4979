"""Pydantic models shared across the co-exploration engine."""
from enum import Enum
from typing import Annotated, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from shared.errors import ConfigError, NetworkError
from shared.geometry import conv_output_dim

PositiveInt = Annotated[int, Field(strict=True, gt=0)]
NonNegativeInt = Annotated[int, Field(strict=True, ge=0)]
Flag = Literal[0, 1]


# Enums
class PeType(str, Enum):
    """Processing element implementations."""
    FP32 = "FP32"
    INT16 = "INT16"
    LIGHTPE2 = "LightPE2"
    LIGHTPE1 = "LightPE1"

    @property
    def activation_bits(self) -> int:
        return _PE_BITS[self][0]

    @property
    def weight_bits(self) -> int:
        return _PE_BITS[self][1]

    @property
    def activation_bytes(self) -> float:
        return self.activation_bits / 8

    @property
    def weight_bytes(self) -> float:
        return self.weight_bits / 8

    @property
    def psum_bytes(self) -> int:
        return 4 if self is PeType.FP32 else 2

    @property
    def shifts(self) -> int:
        """Number of shift terms per weight (0 for multiplier-based PEs)."""
        return {PeType.LIGHTPE1: 1, PeType.LIGHTPE2: 2}.get(self, 0)

    @property
    def is_light(self) -> bool:
        return self.shifts > 0


# (activation bits, weight bits)
_PE_BITS = {
    PeType.FP32: (32, 32),
    PeType.INT16: (16, 16),
    PeType.LIGHTPE2: (8, 8),
    PeType.LIGHTPE1: (8, 4),
}


class Target(str, Enum):
    """Cost quantities a surrogate can model."""
    POWER = "power"
    AREA = "area"
    LATENCY = "latency"


# Hardware
class AcceleratorConfig(BaseModel):
    """A spatial-array accelerator design point. Sizes in bytes, bw in bytes/cycle."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    pe_type: PeType
    pe_rows: PositiveInt
    pe_cols: PositiveInt
    sp_if: PositiveInt
    sp_fw: PositiveInt
    sp_ps: PositiveInt
    glb: PositiveInt
    bw: PositiveInt

    @model_validator(mode="after")
    def _scratchpads_fit_buffer(self) -> "AcceleratorConfig":
        if self.sp_total > self.glb:
            raise ConfigError(
                f"scratchpad sum {self.sp_total} exceeds glb {self.glb}", field="glb"
            )
        return self

    @property
    def n_pe(self) -> int:
        return self.pe_rows * self.pe_cols

    @property
    def sp_total(self) -> int:
        return self.sp_if + self.sp_fw + self.sp_ps


# Workload
class LayerShape(BaseModel):
    """Geometry of one square convolution layer."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    a: PositiveInt
    c: PositiveInt
    f: PositiveInt
    k: PositiveInt
    s: PositiveInt
    p: NonNegativeInt
    rs: Flag = 0
    ds: Flag = 0
    pool: bool = False  # a pooling stage precedes this layer

    @model_validator(mode="after")
    def _check_geometry(self) -> "LayerShape":
        conv_output_dim(self.a, self.k, self.s, self.p)
        if self.rs and self.ds:
            raise ValueError("rs and ds cannot both be 1")
        return self

    @property
    def e(self) -> int:
        return conv_output_dim(self.a, self.k, self.s, self.p)


class NetworkConfig(BaseModel):
    """An ordered stack of convolution layers."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(min_length=1)
    layers: Tuple[LayerShape, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_channel_chaining(self) -> "NetworkConfig":
        for index in range(1, len(self.layers)):
            layer, previous = self.layers[index], self.layers[index - 1]
            if not layer.pool and layer.c != previous.f:
                raise NetworkError(
                    f"c={layer.c} does not match previous f={previous.f}",
                    layer_index=index,
                )
        return self


# Costs
class LayerCost(BaseModel):
    """Per-layer cycle breakdown and utilization statistics."""
    model_config = ConfigDict(frozen=True)

    cycles: float
    compute_cycles: float
    mem_cycles: float
    skip_cycles: float
    traffic_bytes: float
    utilization: float
    spilled: bool


class CostRecord(BaseModel):
    """Power (mW), latency (s), area (mm^2) and energy (mJ) of a (config, network) pair."""
    model_config = ConfigDict(frozen=True)

    power: float
    latency: float
    area: float
    energy: float
    cycles_per_layer: Tuple[float, ...]
    layers: Tuple[LayerCost, ...] = ()


class DesignPoint(BaseModel):
    """An evaluated (config, network) pair."""
    model_config = ConfigDict(frozen=True)

    config: AcceleratorConfig
    config_id: int
    network: str
    power_mw: float
    latency_s: float
    area_mm2: float
    energy_mj: float
    perf_per_area: float
    source: Literal["oracle", "surrogate"]

    @classmethod
    def from_metrics(
        cls,
        config: AcceleratorConfig,
        config_id: int,
        network: str,
        power_mw: float,
        latency_s: float,
        area_mm2: float,
        source: str,
    ) -> "DesignPoint":
        """Build a point, deriving energy and performance per area."""
        return cls(
            config=config,
            config_id=config_id,
            network=network,
            power_mw=power_mw,
            latency_s=latency_s,
            area_mm2=area_mm2,
            energy_mj=power_mw * latency_s,
            perf_per_area=1.0 / (latency_s * area_mm2),
            source=source,
        )

    @property
    def pe_type(self) -> PeType:
        return self.config.pe_type

    @property
    def point_id(self) -> Tuple[int, str]:
        return (self.config_id, self.network)
