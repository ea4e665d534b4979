"""Multiply-accumulate semantics of the four PE types."""
from typing import Union

import numpy as np
import structlog

from quantization.pow2 import Pow2Weight, encode_weight_pow2
from shared.errors import AccumulatorOverflowError, QuantizationError
from shared.models import PeType

logger = structlog.get_logger()

ACTIVATION_MIN, ACTIVATION_MAX = -128, 127
ACC32_MIN, ACC32_MAX = -(2 ** 31), 2 ** 31 - 1
INT16_MIN, INT16_MAX = -(2 ** 15), 2 ** 15 - 1

# Shift-add products are kept at scale 2**-FRACTION_BITS.
FRACTION_BITS = 7

Number = Union[int, float]


def _require_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise QuantizationError(f"{name} must be an integer, got {value!r}")
    return int(value)


def shift_add_mac(x: int, pw: Pow2Weight, acc: int = 0) -> int:
    """
    Shift-add MAC: ``acc + sign * sum(x << (7 - m))``.

    The added term equals ``2**7 * x * decode(pw)`` exactly.

    Args:
        x: Signed 8-bit activation
        pw: Power-of-two weight
        acc: 32-bit accumulator at scale 2**-7

    Raises:
        QuantizationError: activation or accumulator out of range
        AccumulatorOverflowError: result leaves the 32-bit range
    """
    x = _require_int("activation", x)
    acc = _require_int("accumulator", acc)
    if not ACTIVATION_MIN <= x <= ACTIVATION_MAX:
        raise QuantizationError(f"activation {x} is not a signed 8-bit value")
    if not ACC32_MIN <= acc <= ACC32_MAX:
        raise QuantizationError(f"accumulator {acc} is not a signed 32-bit value")
    term = 0
    for m in pw.exponents:
        term += x << (FRACTION_BITS - m)
    result = acc + pw.sign * term
    if not ACC32_MIN <= result <= ACC32_MAX:
        raise AccumulatorOverflowError(
            f"32-bit accumulator overflow: {acc} + {pw.sign * term}"
        )
    return result


def _int16_mac(x, w, acc) -> int:
    x = _require_int("activation", x)
    w = _require_int("weight", w)
    acc = _require_int("accumulator", acc)
    for name, value in (("activation", x), ("weight", w), ("accumulator", acc)):
        if not INT16_MIN <= value <= INT16_MAX:
            raise QuantizationError(f"{name} {value} is not a signed 16-bit value")
    result = acc + x * w
    if not INT16_MIN <= result <= INT16_MAX:
        raise AccumulatorOverflowError(f"16-bit accumulator overflow: {acc} + {x} * {w}")
    return result


def _fp32_mac(x, w, acc) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        result = np.float32(acc) + np.float32(x) * np.float32(w)
    if not np.isfinite(result):
        raise AccumulatorOverflowError(f"float32 accumulator overflow: {acc} + {x} * {w}")
    return float(result)


def reference_mac(
    x: Number,
    w: Union[Number, Pow2Weight],
    acc: Number,
    pe: PeType,
) -> Number:
    """
    Multiply-add in the native precision of a PE type.

    INT16 and FP32 compute ``acc + x * w`` in 16-bit integer and float32
    arithmetic. Shift-add types encode a real weight to the nearest code
    first and accumulate at scale 2**-7.
    """
    if pe is PeType.INT16:
        return _int16_mac(x, w, acc)
    if pe is PeType.FP32:
        return _fp32_mac(x, w, acc)
    if not isinstance(w, Pow2Weight):
        w = encode_weight_pow2(float(w), pe.shifts)
    elif w.k != pe.shifts:
        raise QuantizationError(f"{pe.value} takes {pe.shifts} exponent(s), weight has {w.k}")
    return shift_add_mac(x, w, acc)
