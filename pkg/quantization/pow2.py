"""Power-of-two weight codes for the shift-add processing elements.

A LightPE1 weight is ``sign * 2**-m``; a LightPE2 weight is
``sign * (2**-m1 + 2**-m2)`` with ``m1 <= m2``. Exponents lie in 0..7.
"""
from functools import lru_cache
from itertools import combinations_with_replacement
from math import isfinite
from typing import Literal, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from shared.errors import CodeError, QuantizationError
from shared.models import PeType

MAX_EXPONENT = 7
EXPONENT_BITS = 3

# LightPE2 layout, MSB first: sign | m1 | m2 | pad
_LPE2_SIGN_SHIFT = 7
_LPE2_M1_SHIFT = 4
_LPE2_M2_SHIFT = 1
_EXPONENT_MASK = (1 << EXPONENT_BITS) - 1


class Pow2Weight(BaseModel):
    """A sign plus one or two power-of-two exponents."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    sign: Literal[1, -1]
    exponents: Tuple[int, ...] = Field(min_length=1, max_length=2)

    @field_validator("exponents")
    @classmethod
    def _canonical_exponents(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        for m in value:
            if not 0 <= m <= MAX_EXPONENT:
                raise ValueError(f"exponent {m} outside 0..{MAX_EXPONENT}")
        return tuple(sorted(value))

    @property
    def k(self) -> int:
        """Number of shifts."""
        return len(self.exponents)

    @property
    def magnitude(self) -> float:
        return sum(2.0 ** -m for m in self.exponents)

    @property
    def value(self) -> float:
        return self.sign * self.magnitude


def _check_k(k: int) -> None:
    if k not in (1, 2):
        raise QuantizationError(f"number of shifts must be 1 or 2, got {k}")


def decode_weight(pw: Pow2Weight) -> float:
    """Exact dyadic value ``sign * sum(2**-m)``."""
    return pw.value


@lru_cache(maxsize=None)
def _exponent_sets(k: int) -> Tuple[Tuple[int, ...], ...]:
    """Exponent tuples for k shifts ordered by (magnitude, m1)."""
    sets = combinations_with_replacement(range(MAX_EXPONENT + 1), k)
    return tuple(sorted(sets, key=lambda ms: (sum(2.0 ** -m for m in ms), ms[0])))


@lru_cache(maxsize=None)
def _magnitudes(k: int) -> np.ndarray:
    mags = np.array([sum(2.0 ** -m for m in ms) for ms in _exponent_sets(k)])
    mags.setflags(write=False)
    return mags


@lru_cache(maxsize=None)
def _weights(k: int, sign: int) -> Tuple[Pow2Weight, ...]:
    return tuple(Pow2Weight(sign=sign, exponents=ms) for ms in _exponent_sets(k))


def code_table(pe: PeType) -> Tuple[Pow2Weight, ...]:
    """
    Every canonical weight of a shift-add PE type.

    Positive codes come first, each half ordered by increasing magnitude.

    Raises:
        CodeError: for PE types without a power-of-two code
    """
    if not pe.is_light:
        raise CodeError(f"{pe.value} has no power-of-two code")
    return _weights(pe.shifts, 1) + _weights(pe.shifts, -1)


def _nearest_indices(magnitudes: np.ndarray, k: int) -> np.ndarray:
    table = _magnitudes(k)
    hi = np.searchsorted(table, magnitudes, side="left")
    hi = np.clip(hi, 0, len(table) - 1)
    lo = np.clip(hi - 1, 0, len(table) - 1)
    take_hi = np.abs(magnitudes - table[hi]) < np.abs(magnitudes - table[lo])
    return np.where(take_hi, hi, lo)


def encode_many(weights: Sequence[float], k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized nearest-code search.

    Args:
        weights: Real weights
        k: Number of shifts (1 or 2)

    Returns:
        (signs, indices) where indices point into the magnitude-ordered table for k
    """
    _check_k(k)
    w = np.asarray(weights, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise QuantizationError("weights must be finite")
    signs = np.where(w < 0, -1, 1)
    return signs, _nearest_indices(np.abs(w), k)


def encode_weight_pow2(w: float, k: int) -> Pow2Weight:
    """
    Nearest representable weight over the full code space for k shifts.

    Ties go to the smaller magnitude; zero encodes with a positive sign.
    """
    if not isfinite(w):
        raise QuantizationError(f"cannot encode non-finite weight {w}")
    signs, indices = encode_many([w], k)
    return _weights(k, int(signs[0]))[int(indices[0])]


def weights_from_codes(signs: np.ndarray, indices: np.ndarray, k: int) -> list:
    """Materialize Pow2Weight objects from encode_many output."""
    positive, negative = _weights(k, 1), _weights(k, -1)
    return [
        (positive if s > 0 else negative)[i]
        for s, i in zip(signs.tolist(), indices.tolist())
    ]


def decode_many(signs: np.ndarray, indices: np.ndarray, k: int) -> np.ndarray:
    """Real values of encode_many output."""
    return signs * _magnitudes(k)[indices]


def pack_code(pw: Pow2Weight, pe: PeType) -> int:
    """
    Pack a weight into its hardware code.

    LightPE1: 4 bits ``sign | m``. LightPE2: 8 bits ``sign | m1 | m2 | 0``.
    The sign bit is 1 for negative weights.
    """
    sign_bit = 1 if pw.sign < 0 else 0
    if pe is PeType.LIGHTPE1 and pw.k == 1:
        return (sign_bit << EXPONENT_BITS) | pw.exponents[0]
    if pe is PeType.LIGHTPE2 and pw.k == 2:
        m1, m2 = pw.exponents
        return (
            (sign_bit << _LPE2_SIGN_SHIFT)
            | (m1 << _LPE2_M1_SHIFT)
            | (m2 << _LPE2_M2_SHIFT)
        )
    raise CodeError(f"a weight with {pw.k} exponent(s) has no {pe.value} code")


def unpack_code(code: int, pe: PeType) -> Pow2Weight:
    """
    Inverse of pack_code.

    Raises:
        CodeError: out-of-range code, nonzero pad bit or m1 > m2
    """
    if pe is PeType.LIGHTPE1:
        if not 0 <= code < 1 << 4:
            raise CodeError(f"LightPE1 code {code} is not a 4-bit value")
        sign = -1 if code >> EXPONENT_BITS else 1
        return Pow2Weight(sign=sign, exponents=(code & _EXPONENT_MASK,))
    if pe is PeType.LIGHTPE2:
        if not 0 <= code < 1 << 8:
            raise CodeError(f"LightPE2 code {code} is not an 8-bit value")
        if code & 1:
            raise CodeError(f"LightPE2 code {code:#010b} has its pad bit set")
        m1 = (code >> _LPE2_M1_SHIFT) & _EXPONENT_MASK
        m2 = (code >> _LPE2_M2_SHIFT) & _EXPONENT_MASK
        if m1 > m2:
            raise CodeError(f"LightPE2 code {code:#010b} is not canonical (m1={m1} > m2={m2})")
        sign = -1 if code >> _LPE2_SIGN_SHIFT else 1
        return Pow2Weight(sign=sign, exponents=(m1, m2))
    raise CodeError(f"{pe.value} has no power-of-two code")
