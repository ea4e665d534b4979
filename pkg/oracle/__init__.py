"""Analytical power, performance and area oracle."""
from .cost_model import (
    array_area,
    array_power,
    buffer_area,
    buffer_power,
    evaluate_cost,
    layer_cost,
    layer_cycles,
    layer_macs,
    network_latency,
    oracle_area,
    oracle_power,
)
from .params import OracleParams, default_oracle_params, load_oracle_params

__all__ = [
    "OracleParams",
    "array_area",
    "array_power",
    "buffer_area",
    "buffer_power",
    "default_oracle_params",
    "evaluate_cost",
    "layer_cost",
    "layer_cycles",
    "layer_macs",
    "load_oracle_params",
    "network_latency",
    "oracle_area",
    "oracle_power",
]
