"""Same-size complex convolution and the shifted conjugate product.

Images are 2D float arrays indexed ``[row, col]``. Pixel points and offsets
are ``(x, y)`` pairs with ``x`` the column and ``y`` the row.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import signal

from .errors import ParameterError
from .wavelets import MorletKernel

BOUNDARIES = ("zero", "symmetric", "wrap")


def as_image(image) -> np.ndarray:
    """Validate and return ``image`` as a 2D float64 array."""
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"image must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("image contains non-finite values")
    return arr


def convolve(image, kernel: MorletKernel | np.ndarray, boundary: str = "zero") -> np.ndarray:
    """Discrete 2D convolution, cropped to the image size.

    ``out[p] = sum_q image[q] * kernel[p - q]`` with the kernel centred on its
    middle element. ``boundary="zero"`` pads with zeros, ``"symmetric"`` mirrors
    the image about its outer pixel edges and ``"wrap"`` treats it as periodic.
    """
    img = as_image(image)
    k = kernel.values if isinstance(kernel, MorletKernel) else np.asarray(kernel)
    if k.ndim != 2 or k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise ParameterError(f"kernel must be 2D with odd sides, got shape {k.shape}")
    if max(k.shape) > min(img.shape):
        raise ParameterError(
            f"kernel {k.shape[1]}x{k.shape[0]} larger than image {img.shape[1]}x{img.shape[0]}"
        )
    if boundary == "zero":
        out = signal.fftconvolve(img, k, mode="same")
    elif boundary == "symmetric":
        hy, hx = k.shape[0] // 2, k.shape[1] // 2
        padded = np.pad(img, ((hy, hy), (hx, hx)), mode="symmetric")
        out = signal.fftconvolve(padded, k, mode="valid")
    elif boundary == "wrap":
        out = signal.convolve2d(img, k, mode="same", boundary="wrap")
    else:
        raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    return np.asarray(out, dtype=complex)


def add_shifted_product(out: np.ndarray, a: np.ndarray, b: np.ndarray, offset) -> np.ndarray:
    """In place: ``out[p] += a[p + o] * conj(b[p - o])`` where both reads are in bounds."""
    ox, oy = int(offset[0]), int(offset[1])
    h, w = out.shape
    # p + o and p - o must both be inside
    ylo, yhi = abs(oy), h - abs(oy)
    xlo, xhi = abs(ox), w - abs(ox)
    if yhi <= ylo or xhi <= xlo:
        return out
    out[ylo:yhi, xlo:xhi] += a[ylo + oy : yhi + oy, xlo + ox : xhi + ox] * np.conj(
        b[ylo - oy : yhi - oy, xlo - ox : xhi - ox]
    )
    return out


def shifted_product(a, b, offset) -> np.ndarray:
    """``out[p] = a[p + offset] * conj(b[p - offset])``; out-of-bounds reads give 0."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise ParameterError(f"maps must share a 2D shape, got {a.shape} and {b.shape}")
    out = np.zeros(a.shape, dtype=complex)
    return add_shifted_product(out, a, b, offset)


def stencil_offset(d: float, alpha: float) -> tuple[int, int]:
    """Half-stencil vector ``d/2 (cos alpha, sin alpha)`` rounded to whole pixels."""
    return (int(np.rint(0.5 * d * math.cos(alpha))), int(np.rint(0.5 * d * math.sin(alpha))))
