"""Exception hierarchy for the co-exploration engine.

Every error carries the process exit code the CLI maps it to. Classes also
derive from the nearest builtin so callers may catch either.
"""
from typing import Optional


class DseError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 2


class UsageError(DseError):
    """Invalid command-line usage."""

    exit_code = 1


class ConfigError(DseError, ValueError):
    """An accelerator config or space document is invalid."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class NetworkError(DseError, ValueError):
    """A network document is invalid."""

    def __init__(self, message: str, layer_index: Optional[int] = None):
        self.layer_index = layer_index
        prefix = f"layer {layer_index}: " if layer_index is not None else ""
        super().__init__(f"{prefix}{message}")


class GeometryError(DseError, ValueError):
    """Convolution geometry yields no output position."""


class QuantizationError(DseError, ValueError):
    """Invalid quantization request."""


class CodeError(QuantizationError):
    """A packed weight code is malformed or non-canonical."""


class AccumulatorOverflowError(DseError, OverflowError):
    """A multiply-accumulate left the accumulator range."""


class OracleError(DseError, ValueError):
    """Invalid oracle parameters."""


class DatasetError(DseError, ValueError):
    """Dataset generation or loading failed."""


class InsufficientDataError(DatasetError):
    """Too few rows for the requested polynomial basis."""


class ModelError(DseError, ValueError):
    """A surrogate model is invalid or cannot answer the query."""


class MissingModelError(ModelError, KeyError):
    """No surrogate model is loaded for a (target, PE type) pair."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class MetricError(DseError, ValueError):
    """A percentage-error metric is undefined for the inputs."""


class ParetoError(DseError, ValueError):
    """Invalid Pareto-front request."""


class NormalizationError(DseError, ValueError):
    """No reference point exists for normalization."""


class ArchSpaceError(DseError, ValueError):
    """Invalid architecture space, choice or sampling request."""


class AccuracyLookupError(DseError, KeyError):
    """The accuracy provider has no value for an architecture."""

    def __str__(self) -> str:
        return Exception.__str__(self)
