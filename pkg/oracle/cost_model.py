"""Closed-form power, area and latency of a spatial-array accelerator.

The array maps each layer row-stationary style: filter rows fold over the
PE rows and output rows over the PE columns. Cycles are the larger of the
compute and memory terms plus a skip-connection term. The model is
PE-type independent except for byte widths and clock.
"""
from math import ceil
from typing import Callable, Optional, Tuple

import structlog

from oracle.params import OracleParams, default_oracle_params
from shared.models import AcceleratorConfig, CostRecord, LayerCost, LayerShape, NetworkConfig

logger = structlog.get_logger()


def _identity(x: float) -> float:
    return x


def _rounding(smooth: bool) -> Callable[[float], float]:
    return _identity if smooth else ceil


def layer_macs(layer: LayerShape) -> int:
    """E^2 * C * F * K^2."""
    e = layer.e
    return e * e * layer.c * layer.f * layer.k * layer.k


def weight_bytes(layer: LayerShape, cfg: AcceleratorConfig, smooth: bool = False) -> float:
    """Filter tensor bytes; sub-byte weights round up per filter."""
    up = _rounding(smooth)
    return layer.f * up(layer.k * layer.k * layer.c * cfg.pe_type.weight_bytes)


def _layer_terms(
    cfg: AcceleratorConfig,
    layer: LayerShape,
    smooth: bool,
    spill_factor: float,
) -> Tuple[float, float, float, float, float, bool]:
    up = _rounding(smooth)
    pe = cfg.pe_type
    b_a, b_w, b_ps = pe.activation_bytes, pe.weight_bytes, pe.psum_bytes
    a, c, f, k = layer.a, layer.c, layer.f, layer.k
    e = layer.e
    n_pe = cfg.pe_rows * cfg.pe_cols

    folds = up(k / cfg.pe_rows) * up(e / cfg.pe_cols)
    active = min(k * e, n_pe)
    macs = e * e * c * f * k * k
    compute = folds * up(macs / (folds * active))

    w_bytes = weight_bytes(layer, cfg, smooth)
    rho_if = max(1, up(k * a * b_a / cfg.sp_if))
    rho_w = max(1, up(k * k * b_w / cfg.sp_fw))
    rho_ps = max(1, up(e * b_ps / cfg.sp_ps))
    traffic = (
        a * a * c * b_a * rho_if
        + w_bytes * rho_w
        + 2 * e * e * f * b_ps * rho_ps
    )
    spilled = a * a * c * b_a + w_bytes + e * e * f * b_ps > cfg.glb
    if spilled:
        traffic *= spill_factor
    mem = up(traffic / cfg.bw)

    skip_unit = up(2 * e * e * f * b_a / cfg.bw)
    skip = layer.rs * skip_unit + layer.ds * 2 * skip_unit
    return compute, mem, skip, traffic, active / n_pe, spilled


def layer_cost(
    cfg: AcceleratorConfig,
    layer: LayerShape,
    params: Optional[OracleParams] = None,
) -> LayerCost:
    """Cycle breakdown and utilization of one layer."""
    params = params or default_oracle_params()
    compute, mem, skip, traffic, utilization, spilled = _layer_terms(
        cfg, layer, params.smooth, params.spill_factor
    )
    return LayerCost(
        cycles=max(compute, mem) + skip,
        compute_cycles=compute,
        mem_cycles=mem,
        skip_cycles=skip,
        traffic_bytes=traffic,
        utilization=utilization,
        spilled=spilled,
    )


def layer_cycles(
    cfg: AcceleratorConfig,
    layer: LayerShape,
    params: Optional[OracleParams] = None,
    smooth: Optional[bool] = None,
) -> float:
    """
    Cycles of one layer: ``max(compute, mem) + skip``.

    Integer-valued unless smooth mode drops the ceilings.

    Args:
        cfg: Accelerator configuration
        layer: Convolution layer
        params: Oracle parameters (spill factor, smooth flag)
        smooth: Overrides `params.smooth` when given
    """
    params = params or default_oracle_params()
    smooth = params.smooth if smooth is None else smooth
    compute, mem, skip, *_ = _layer_terms(cfg, layer, smooth, params.spill_factor)
    return max(compute, mem) + skip


def network_cycles(
    cfg: AcceleratorConfig,
    net: NetworkConfig,
    params: Optional[OracleParams] = None,
) -> Tuple[float, ...]:
    params = params or default_oracle_params()
    return tuple(layer_cycles(cfg, layer, params) for layer in net.layers)


def network_latency(
    cfg: AcceleratorConfig,
    net: NetworkConfig,
    params: Optional[OracleParams] = None,
) -> float:
    """Seconds: summed layer cycles over the PE type's clock."""
    params = params or default_oracle_params()
    return sum(network_cycles(cfg, net, params)) / params.clock_hz(cfg.pe_type)


def buffer_power(cfg: AcceleratorConfig, params: Optional[OracleParams] = None) -> float:
    params = params or default_oracle_params()
    return params.glb_power_mw_per_byte * cfg.glb


def array_power(cfg: AcceleratorConfig, params: Optional[OracleParams] = None) -> float:
    """PE array power (mW): #PE * (p_pe + p_sp * scratchpad bytes)."""
    params = params or default_oracle_params()
    return cfg.n_pe * (
        params.pe_power(cfg.pe_type) + params.sp_power_mw_per_byte * cfg.sp_total
    )


def oracle_power(cfg: AcceleratorConfig, params: Optional[OracleParams] = None) -> float:
    """Total power in mW."""
    return buffer_power(cfg, params) + array_power(cfg, params)


def buffer_area(cfg: AcceleratorConfig, params: Optional[OracleParams] = None) -> float:
    params = params or default_oracle_params()
    return params.glb_area_mm2_per_byte * cfg.glb


def array_area(cfg: AcceleratorConfig, params: Optional[OracleParams] = None) -> float:
    params = params or default_oracle_params()
    return cfg.n_pe * (
        params.pe_area(cfg.pe_type) + params.sp_area_mm2_per_byte * cfg.sp_total
    )


def oracle_area(cfg: AcceleratorConfig, params: Optional[OracleParams] = None) -> float:
    """Total area in mm^2."""
    return buffer_area(cfg, params) + array_area(cfg, params)


def evaluate_cost(
    cfg: AcceleratorConfig,
    net: NetworkConfig,
    params: Optional[OracleParams] = None,
) -> CostRecord:
    """Power, latency, area, energy and per-layer statistics of a (config, network) pair."""
    params = params or default_oracle_params()
    layers = tuple(layer_cost(cfg, layer, params) for layer in net.layers)
    cycles = tuple(lc.cycles for lc in layers)
    power = oracle_power(cfg, params)
    latency = sum(cycles) / params.clock_hz(cfg.pe_type)
    return CostRecord(
        power=power,
        latency=latency,
        area=oracle_area(cfg, params),
        energy=power * latency,
        cycles_per_layer=cycles,
        layers=layers,
    )
