"""Per-tensor weight quantization for every PE type."""
from typing import List, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from quantization.mac import INT16_MAX
from quantization.pow2 import Pow2Weight, decode_many, encode_many, weights_from_codes
from shared.errors import QuantizationError
from shared.models import PeType

logger = structlog.get_logger()

QuantizedValues = Union[List[Pow2Weight], np.ndarray]


class QuantStats(BaseModel):
    """Error of a quantized tensor against its real-valued source."""
    model_config = ConfigDict(frozen=True)

    mean_abs_err: float = Field(ge=0)
    max_abs_err: float = Field(ge=0)
    count: int = Field(ge=1)
    scale: float = 1.0


def _int16_quantize(w: np.ndarray) -> Tuple[np.ndarray, float]:
    peak = float(np.max(np.abs(w)))
    scale = peak / INT16_MAX if peak > 0 else 1.0
    # round half away from zero
    q = np.sign(w) * np.floor(np.abs(w) / scale + 0.5)
    q = np.clip(q, -INT16_MAX, INT16_MAX).astype(np.int32)
    return q, scale


def dequantize(values: QuantizedValues, pe: PeType, scale: float = 1.0) -> np.ndarray:
    """Real values represented by quantize_tensor output."""
    if pe.is_light:
        return np.array([pw.value for pw in values], dtype=np.float64)
    return np.asarray(values, dtype=np.float64) * (scale if pe is PeType.INT16 else 1.0)


def quantize_tensor(
    weights: Sequence[float], pe: PeType
) -> Tuple[QuantizedValues, QuantStats]:
    """
    Quantize a weight tensor for a PE type.

    Shift-add types map each weight to its nearest power-of-two code.
    INT16 uses one symmetric scale ``max|w| / 32767``; FP32 rounds to float32.

    Args:
        weights: Real-valued weights
        pe: Target PE type

    Returns:
        (quantized values, error statistics)

    Raises:
        QuantizationError: empty or non-finite tensor
    """
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size == 0:
        raise QuantizationError("cannot quantize an empty tensor")
    if not np.all(np.isfinite(w)):
        raise QuantizationError("weights must be finite")

    scale = 1.0
    if pe.is_light:
        signs, indices = encode_many(w, pe.shifts)
        values: QuantizedValues = weights_from_codes(signs, indices, pe.shifts)
        restored = decode_many(signs, indices, pe.shifts)
    elif pe is PeType.INT16:
        values, scale = _int16_quantize(w)
        restored = values * scale
    else:
        values = w.astype(np.float32)
        restored = values.astype(np.float64)

    err = np.abs(w - restored)
    stats = QuantStats(
        mean_abs_err=float(err.mean()),
        max_abs_err=float(err.max()),
        count=int(w.size),
        scale=scale,
    )
    logger.debug("tensor_quantized", pe_type=pe.value, count=stats.count,
                 mean_abs_err=stats.mean_abs_err)
    return values, stats
