"""Power-of-two weight encoding and PE arithmetic."""
from .mac import reference_mac, shift_add_mac
from .pow2 import (
    Pow2Weight,
    code_table,
    decode_weight,
    encode_many,
    encode_weight_pow2,
    pack_code,
    unpack_code,
)
from .tensor import QuantStats, dequantize, quantize_tensor

__all__ = [
    "Pow2Weight",
    "QuantStats",
    "code_table",
    "decode_weight",
    "dequantize",
    "encode_many",
    "encode_weight_pow2",
    "pack_code",
    "quantize_tensor",
    "reference_mac",
    "shift_add_mac",
    "unpack_code",
]
