"""Convolution geometry helpers."""
from shared.errors import GeometryError


def conv_output_dim(a: int, k: int, s: int, p: int) -> int:
    """
    Output dimension of a square convolution.

    Args:
        a: Input feature map dimension (unpadded)
        k: Kernel size
        s: Stride
        p: Padding on each side

    Returns:
        E = floor((a + 2p - k) / s) + 1
    """
    if a + 2 * p < k:
        raise GeometryError(
            f"kernel {k} larger than padded input {a + 2 * p} (a={a}, p={p})"
        )
    return (a + 2 * p - k) // s + 1


def output_dim(layer) -> int:
    """Output dimension E of a LayerShape."""
    return conv_output_dim(layer.a, layer.k, layer.s, layer.p)
