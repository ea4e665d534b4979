"""Design-space enumeration, evaluation and Pareto analysis."""
from .pareto import Direction, Objective, ParetoSet, maximize, minimize, pareto_front
from .space import ConfigSpaceSpec, IndexedConfig, enumerate_space, load_space, sample_space

__all__ = [
    "ConfigSpaceSpec",
    "Direction",
    "IndexedConfig",
    "Objective",
    "ParetoSet",
    "enumerate_space",
    "load_space",
    "maximize",
    "minimize",
    "pareto_front",
    "sample_space",
]
