"""Complex Morlet kernels for the stencil ends and 1D Haar kernels for endpoint search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

DEFAULT_WAVELENGTH = 8.0
DEFAULT_SIGMA = 4.0
DEFAULT_SUPPORT = 17


@dataclass(frozen=True)
class WaveletGeometry:
    """Shape shared by every kernel in a sweep (pixels)."""

    wavelength: float = DEFAULT_WAVELENGTH
    sigma: float = DEFAULT_SIGMA
    support: int = DEFAULT_SUPPORT

    def __post_init__(self):
        _check_geometry(self.wavelength, self.sigma, self.support)


@dataclass(frozen=True, eq=False)
class MorletKernel:
    """Zero-mean, unit-energy complex kernel on a ``support x support`` grid.

    ``values[row, col]`` holds the kernel at offset ``(x, y) = (col - h, row - h)``
    with ``h = support // 2``. The carrier's wave vector points along
    ``(cos angle, sin angle)`` in that ``(x, y)`` frame.
    """

    angle: float
    support: int
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class HaarKernel:
    size: int
    values: np.ndarray = field(repr=False)


def _check_geometry(wavelength, sigma, support):
    if not wavelength > 0:
        raise ParameterError(f"wavelength must be positive, got {wavelength}")
    if not sigma > 0:
        raise ParameterError(f"envelope sigma must be positive, got {sigma}")
    if int(support) != support or support < 3 or support % 2 == 0:
        raise ParameterError(f"support must be an odd integer >= 3, got {support}")


def make_morlet(
    angle: float,
    wavelength: float = DEFAULT_WAVELENGTH,
    envelope_sigma: float = DEFAULT_SIGMA,
    support: int = DEFAULT_SUPPORT,
) -> MorletKernel:
    """Build a complex Morlet kernel oriented at ``angle`` radians.

    The kernel is ``C * g(u) * (exp(i k <u, e>) - kappa)`` with an isotropic
    Gaussian envelope ``g``; ``kappa`` removes the envelope-weighted DC term
    and ``C`` scales the result to unit energy.
    """
    _check_geometry(wavelength, envelope_sigma, support)
    support = int(support)
    angle = float(angle) % (2 * math.pi)
    h = support // 2
    y, x = np.mgrid[-h : h + 1, -h : h + 1].astype(float)

    envelope = np.exp(-(x * x + y * y) / (2.0 * envelope_sigma**2))
    phase = (2.0 * math.pi / wavelength) * (x * math.cos(angle) + y * math.sin(angle))
    carrier = np.exp(1j * phase)
    kappa = (envelope * carrier).sum() / envelope.sum()
    psi = envelope * (carrier - kappa)
    # second pass mops up the rounding residue of the first subtraction
    psi -= envelope * (psi.sum() / envelope.sum())
    psi /= math.sqrt(float((psi.real**2 + psi.imag**2).sum()))
    psi.setflags(write=False)
    return MorletKernel(angle=angle, support=support, values=psi)


def make_haar(size: int) -> HaarKernel:
    """``+1/size`` over the first half, ``-1/size`` over the second."""
    if int(size) != size or size < 2 or size % 2:
        raise ParameterError(f"Haar size must be an even integer >= 2, got {size}")
    size = int(size)
    half = size // 2
    values = np.concatenate([np.ones(half), -np.ones(half)]) / size
    values.setflags(write=False)
    return HaarKernel(size=size, values=values)
