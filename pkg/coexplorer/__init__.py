"""Joint accelerator and network architecture exploration."""
from .accuracy import (
    AccuracyProvider,
    SyntheticAccuracyParams,
    SyntheticAccuracyProvider,
    TableAccuracyProvider,
)
from .arch_space import (
    ArchChoice,
    ArchSpace,
    decode_arch,
    default_arch_space,
    encode_arch,
    expand,
    iter_archs,
    sample_archs,
    space_size,
)
from .coexplore import CoexploreResult, coexplore, write_coexplore

__all__ = [
    "AccuracyProvider",
    "ArchChoice",
    "ArchSpace",
    "CoexploreResult",
    "SyntheticAccuracyParams",
    "SyntheticAccuracyProvider",
    "TableAccuracyProvider",
    "coexplore",
    "decode_arch",
    "default_arch_space",
    "encode_arch",
    "expand",
    "iter_archs",
    "sample_archs",
    "space_size",
    "write_coexplore",
]
