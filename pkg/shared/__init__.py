"""Shared domain types, errors and document loaders."""
from .errors import DseError
from .models import (
    AcceleratorConfig,
    CostRecord,
    DesignPoint,
    LayerCost,
    LayerShape,
    NetworkConfig,
    PeType,
    Target,
)

__all__ = [
    "AcceleratorConfig",
    "CostRecord",
    "DesignPoint",
    "DseError",
    "LayerCost",
    "LayerShape",
    "NetworkConfig",
    "PeType",
    "Target",
]
