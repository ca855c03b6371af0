"""Stencil sweeps: products of mirrored wavelet responses accumulated into
line space ``(rho, delta)`` or into image space (center likelihood).

A line is stored as ``rho`` in ``[0, pi)``, the direction of the line, and
``delta = p . (sin rho, -cos rho)`` for any point ``p = (x, y)`` on it. The
stencil that votes for a line points along its normal, ``alpha = rho - pi/2``.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .conv import BOUNDARIES, add_shifted_product, as_image, convolve, stencil_offset
from .errors import ParameterError
from .wavelets import MorletKernel, WaveletGeometry, make_morlet

TOP_VOTES = 5


@dataclass(frozen=True)
class StencilConfig:
    """One orbiting wavelet pair: outer angle ``alpha``, inner angle ``beta``, distance ``d``."""

    alpha: float
    beta: float
    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise ParameterError(f"stencil distance must be positive, got {self.d}")
        if not 0 <= self.alpha < math.pi:
            raise ParameterError(f"alpha must lie in [0, pi), got {self.alpha}")


def default_distances(shape, d_min=6.0, d_step=4.0, factor=0.8) -> tuple[float, ...]:
    """``d_min, d_min + d_step, ...`` up to ``factor * max(width, height)``."""
    d_max = factor * max(shape)
    if d_max < d_min:
        return (float(d_min),)
    return tuple(float(d) for d in np.arange(d_min, d_max + 1e-9, d_step))


@dataclass(frozen=True)
class SweepParams:
    n_alpha: int = 32
    betas: tuple[float, ...] = (-math.pi / 4, 0.0, math.pi / 4)
    distances: tuple[float, ...] = (6.0,)
    exponent: float = 2.0
    geometry: WaveletGeometry = field(default_factory=WaveletGeometry)
    boundary: str = "symmetric"

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "distances", tuple(float(d) for d in self.distances))
        if int(self.n_alpha) != self.n_alpha or self.n_alpha < 1:
            raise ParameterError(f"n_alpha must be a positive integer, got {self.n_alpha}")
        if not self.betas:
            raise ParameterError("at least one inner angle is required")
        if not self.distances or min(self.distances) <= 0:
            raise ParameterError("distances must be non-empty and strictly positive")
        if list(self.distances) != sorted(self.distances):
            raise ParameterError("distances must be sorted ascending")
        if not self.exponent > 0:
            raise ParameterError(f"exponent must be positive, got {self.exponent}")
        if self.boundary not in BOUNDARIES:
            raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")

    @classmethod
    def for_image(cls, shape, d_min=6.0, d_step=4.0, factor=0.8, **kwargs) -> SweepParams:
        """Symmetry-line defaults with the distance sweep sized to ``shape``."""
        return cls(distances=default_distances(shape, d_min, d_step, factor), **kwargs)

    @classmethod
    def ellipse(cls, distances=(35.0, 40.0, 45.0), n_alpha=32, exponent=1.0, **kwargs) -> SweepParams:
        """Center-likelihood defaults: no inner tilt, distances near expected diameters."""
        return cls(n_alpha=n_alpha, betas=(0.0,), distances=distances, exponent=exponent, **kwargs)

    @property
    def alphas(self) -> np.ndarray:
        return np.arange(self.n_alpha) * (math.pi / self.n_alpha)

    @property
    def n_stencils(self) -> int:
        return len(self.betas) * len(self.distances)


@dataclass(eq=False)
class LineAccumulator:
    """Votes over ``(rho, delta)``: one row per rho value, one column per pixel of delta."""

    votes: np.ndarray
    rho: np.ndarray
    delta_max: int

    @property
    def delta(self) -> np.ndarray:
        return np.arange(-self.delta_max, self.delta_max + 1, dtype=float)

    @property
    def rho_step(self) -> float:
        return math.pi / len(self.rho)

    def delta_index(self, delta: float) -> int:
        return int(np.rint(delta)) + self.delta_max


def stencil_kernels(
    cfg: StencilConfig, geometry: WaveletGeometry | None = None
) -> tuple[MorletKernel, MorletKernel]:
    """Kernels ``(v, w)`` at the two stencil ends.

    ``v`` is tilted by ``+beta`` from the stencil direction ``alpha`` and ``w``
    is its mirror image about the axis perpendicular to the stencil, so a
    mirror-symmetric image gives ``I_v(p_v) = conj(I_w(p_w))`` on the axis.
    """
    g = geometry or WaveletGeometry()
    v_angle, w_angle = _pair_angles(cfg.alpha, cfg.beta)
    v = make_morlet(v_angle, g.wavelength, g.sigma, g.support)
    w = make_morlet(w_angle, g.wavelength, g.sigma, g.support)
    return v, w


def _pair_angles(alpha: float, beta: float) -> tuple[float, float]:
    return alpha + beta, alpha - beta + math.pi


class _ResponseBank:
    """Convolution responses keyed by kernel angle.

    The kernel at ``theta + pi`` is the conjugate of the kernel at ``theta``,
    so for a real image its response is the conjugate response.
    """

    def __init__(self, image: np.ndarray, geometry: WaveletGeometry, boundary: str):
        self.image = image
        self.geometry = geometry
        self.boundary = boundary
        self._maps: dict[float, np.ndarray] = {}

    @staticmethod
    def _key(angle: float) -> float:
        return round(angle % (2 * math.pi), 10) % round(2 * math.pi, 10)

    def get(self, angle: float) -> np.ndarray:
        key = self._key(angle)
        if key in self._maps:
            return self._maps[key]
        partner = self._key(angle + math.pi)
        if partner in self._maps:
            out = np.conj(self._maps[partner])
        else:
            g = self.geometry
            out = convolve(self.image, make_morlet(angle, g.wavelength, g.sigma, g.support), self.boundary)
        self._maps[key] = out
        return out


def stencil_coefficient_map(
    image, cfg: StencilConfig, geometry: WaveletGeometry | None = None, boundary: str = "symmetric"
) -> np.ndarray:
    """Per-pixel coefficient ``I_v(p + o) * conj(I_w(p - o))`` for one stencil.

    ``o`` is ``d/2 (cos alpha, sin alpha)`` rounded to whole pixels.
    """
    img = as_image(image)
    v, w = stencil_kernels(cfg, geometry)
    i_v = convolve(img, v, boundary)
    i_w = convolve(img, w, boundary)
    out = np.zeros(img.shape, dtype=complex)
    return add_shifted_product(out, i_v, i_w, stencil_offset(cfg.d, cfg.alpha))


def line_params(p, alpha: float) -> tuple[float, float]:
    """Line through ``p`` perpendicular to direction ``alpha``, as ``(rho, delta)``."""
    px, py = float(p[0]), float(p[1])
    rho = alpha + math.pi / 2
    delta = px * math.cos(alpha) + py * math.sin(alpha)
    turns = math.floor(rho / math.pi)
    rho -= turns * math.pi
    if turns % 2:
        delta = -delta
    return rho, delta


def _rho_layout(n_alpha: int):
    """Row of each alpha index in the accumulator, the sorted rho values, and wrap flags."""
    shifted = np.arange(n_alpha) + n_alpha / 2
    wrapped = shifted >= n_alpha
    rho_units = np.where(wrapped, shifted - n_alpha, shifted)
    order = np.argsort(rho_units, kind="stable")
    rows = np.empty(n_alpha, dtype=int)
    rows[order] = np.arange(n_alpha)
    return rows, rho_units[order] * (math.pi / n_alpha), wrapped


def _alpha_votes(bank, alpha, params, coherent):
    """Aggregate vote at every pixel for one outer angle.

    Coherent: ``|sum over (beta, d) of coefficients| ** n``.
    Incoherent: ``sum over (beta, d) of |coefficient| ** n``.
    """
    shape = bank.image.shape
    if coherent:
        total = np.zeros(shape, dtype=complex)
        for beta in params.betas:
            v_angle, w_angle = _pair_angles(alpha, beta)
            i_v, i_w = bank.get(v_angle), bank.get(w_angle)
            for d in params.distances:
                add_shifted_product(total, i_v, i_w, stencil_offset(d, alpha))
        return _power(total, params.exponent)
    votes = np.zeros(shape)
    for beta in params.betas:
        v_angle, w_angle = _pair_angles(alpha, beta)
        i_v, i_w = bank.get(v_angle), bank.get(w_angle)
        for d in params.distances:
            one = np.zeros(shape, dtype=complex)
            add_shifted_product(one, i_v, i_w, stencil_offset(d, alpha))
            votes += _power(one, params.exponent)
    return votes


def _power(z: np.ndarray, n: float) -> np.ndarray:
    sq = z.real * z.real + z.imag * z.imag
    if n == 2:
        return sq
    return sq ** (0.5 * n)


def _prime_bank(bank, params):
    for alpha in params.alphas:
        for beta in params.betas:
            for angle in _pair_angles(alpha, beta):
                bank.get(angle)


def accumulate_lines(image, params: SweepParams, coherent: bool = True, workers: int = 1) -> LineAccumulator:
    """Vote every pixel's aggregate symmetry coefficient into ``(rho, delta)`` bins.

    For each outer angle ``alpha`` the coefficients over all ``(beta, d)`` are
    combined per pixel (see ``coherent``) and the result is added to the bin
    of the line through the pixel perpendicular to ``alpha``.
    """
    img = as_image(image)
    h, w = img.shape
    dmax = int(math.ceil(math.hypot(w, h)))
    rows, rho, wrapped = _rho_layout(params.n_alpha)
    bank = _ResponseBank(img, params.geometry, params.boundary)
    _prime_bank(bank, params)
    ys, xs = np.mgrid[0:h, 0:w].astype(float)
    n_delta = 2 * dmax + 1

    def one_row(j):
        alpha = params.alphas[j]
        votes = _alpha_votes(bank, alpha, params, coherent)
        delta = xs * math.cos(alpha) + ys * math.sin(alpha)
        if wrapped[j]:
            delta = -delta
        bins = np.rint(delta).astype(int) + dmax
        return j, np.bincount(bins.ravel(), weights=votes.ravel(), minlength=n_delta)

    acc = np.zeros((params.n_alpha, n_delta))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_row, range(params.n_alpha)))
    else:
        results = [one_row(j) for j in range(params.n_alpha)]
    for j, row in results:
        acc[rows[j]] = row
    return LineAccumulator(votes=acc, rho=rho, delta_max=dmax)


def accumulate_centers(image, params: SweepParams) -> np.ndarray:
    """Center likelihood ``|sum over (alpha, d) of coefficients at p| ** n``, stored at ``p``."""
    if len(params.betas) != 1 or params.betas[0] != 0.0:
        raise ParameterError(f"center accumulation needs betas == (0,), got {params.betas}")
    img = as_image(image)
    bank = _ResponseBank(img, params.geometry, params.boundary)
    total = np.zeros(img.shape, dtype=complex)
    for alpha in params.alphas:
        i_v, i_w = bank.get(alpha), bank.get(alpha + math.pi)
        for d in params.distances:
            add_shifted_product(total, i_v, i_w, stencil_offset(d, alpha))
    return _power(total, params.exponent)


def line_samples(shape, rho: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit-spaced points along a line, clipped to the pixel-center rectangle.

    Returns ``(t, points)``: arc-length positions and ``(x, y)`` points, both
    increasing along ``(cos rho, sin rho)``. Empty if the line misses the image.
    """
    h, w = shape
    u = np.array([math.cos(rho), math.sin(rho)])
    foot = delta * np.array([math.sin(rho), -math.cos(rho)])
    lo, hi = -math.inf, math.inf
    for axis, size in ((0, w), (1, h)):
        if abs(u[axis]) < 1e-12:
            if not -1e-9 <= foot[axis] <= size - 1 + 1e-9:
                return np.empty(0), np.empty((0, 2))
            continue
        t0 = (0 - foot[axis]) / u[axis]
        t1 = (size - 1 - foot[axis]) / u[axis]
        lo, hi = max(lo, min(t0, t1)), min(hi, max(t0, t1))
    if hi < lo:
        return np.empty(0), np.empty((0, 2))
    t = lo + np.arange(int(math.floor(hi - lo + 1e-9)) + 1)
    return t, foot + t[:, None] * u


def _gather(m: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h, w = m.shape
    inside = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    out = np.zeros(xs.shape, dtype=m.dtype)
    out[inside] = m[ys[inside], xs[inside]]
    return out


def _votes_at(bank, points: np.ndarray, alpha: float, params: SweepParams) -> np.ndarray:
    """Coefficient magnitudes, shape ``(len(points), n_stencils)``, for stencils along ``alpha``."""
    px = np.rint(points[:, 0]).astype(int)
    py = np.rint(points[:, 1]).astype(int)
    cols = []
    for beta in params.betas:
        v_angle, w_angle = _pair_angles(alpha, beta)
        i_v, i_w = bank.get(v_angle), bank.get(w_angle)
        for d in params.distances:
            ox, oy = stencil_offset(d, alpha)
            c = _gather(i_v, px + ox, py + oy) * np.conj(_gather(i_w, px - ox, py - oy))
            cols.append(np.abs(c))
    return np.stack(cols, axis=1)


def top_votes_along_line(image, rho: float, delta: float, params: SweepParams, k: int = TOP_VOTES, bank=None):
    """Sum of the ``k`` largest stencil magnitudes at each sample point of a line.

    Returns ``(t, points, values)`` as in :func:`line_samples`.
    """
    img = as_image(image)
    t, points = line_samples(img.shape, rho, delta)
    if len(t) == 0:
        return t, points, np.empty(0)
    if bank is None:
        bank = _ResponseBank(img, params.geometry, params.boundary)
    alpha = (rho - math.pi / 2) % math.pi
    mags = _votes_at(bank, points, alpha, params)
    k = min(k, mags.shape[1])
    top = np.sort(mags, axis=1)[:, -k:]
    return t, points, top.sum(axis=1)


def refine_line_scores(image, lines, params: SweepParams, k: int = TOP_VOTES) -> list:
    """Rescore candidate lines by the robust top-``k`` statistic along each line.

    The new score sums, over the line's sample points, the mean of the ``k``
    largest per-stencil magnitudes. Returns copies of ``lines`` (any dataclass
    with ``rho``, ``delta`` and ``score``) sorted by new score, descending.
    """
    if not lines:
        return []
    img = as_image(image)
    bank = _ResponseBank(img, params.geometry, params.boundary)
    k_used = min(k, params.n_stencils)
    rescored = []
    for line in lines:
        _, _, values = top_votes_along_line(img, line.rho, line.delta, params, k, bank)
        rescored.append(dataclasses.replace(line, score=float(values.sum() / k_used)))
    return sorted(rescored, key=lambda ln: (-ln.score, ln.rho, ln.delta))
