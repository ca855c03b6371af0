"""Peak extraction from accumulators and segment endpoint search along a line."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .conv import as_image
from .errors import NoSupportError, ParameterError
from .symmetry import LineAccumulator, SweepParams, _ResponseBank, top_votes_along_line
from .wavelets import HaarKernel, make_haar

DEFAULT_HAAR_SIZE = 20


@dataclass(frozen=True)
class SymmetryLine:
    rho: float
    delta: float
    score: float

    @property
    def angle(self) -> float:
        return self.rho

    @property
    def normal(self) -> tuple[float, float]:
        return math.sin(self.rho), -math.cos(self.rho)

    def distance_to(self, point) -> float:
        nx, ny = self.normal
        return abs(point[0] * nx + point[1] * ny - self.delta)


@dataclass(frozen=True)
class SymmetrySegment:
    line: SymmetryLine
    endpoint_a: tuple[float, float]
    endpoint_b: tuple[float, float]

    @property
    def center(self) -> tuple[float, float]:
        return (
            0.5 * (self.endpoint_a[0] + self.endpoint_b[0]),
            0.5 * (self.endpoint_a[1] + self.endpoint_b[1]),
        )

    @property
    def length(self) -> float:
        return math.dist(self.endpoint_a, self.endpoint_b)

    @property
    def angle(self) -> float:
        return self.line.rho

    @property
    def score(self) -> float:
        return self.line.score


@dataclass(frozen=True)
class CenterDetection:
    x: float
    y: float
    score: float


@dataclass(frozen=True)
class PeakParams:
    max_detections: int = 5
    nms_rho_window: float = 2 * math.pi / 32
    nms_delta_window: float = 10.0
    threshold_fraction: float = 0.1

    def __post_init__(self):
        if int(self.max_detections) != self.max_detections or self.max_detections < 1:
            raise ParameterError(f"max_detections must be >= 1, got {self.max_detections}")
        if not (self.nms_rho_window > 0 and self.nms_delta_window > 0):
            raise ParameterError("NMS windows must be positive")
        if not 0 < self.threshold_fraction <= 1:
            raise ParameterError(f"threshold_fraction must lie in (0, 1], got {self.threshold_fraction}")


def _line_local_maxima(votes: np.ndarray) -> np.ndarray:
    # rho wraps at pi onto the opposite sign of delta, i.e. the reversed row
    padded = np.vstack([votes[-1:, ::-1], votes, votes[:1, ::-1]])
    padded = np.pad(padded, ((0, 0), (1, 1)), constant_values=-np.inf)
    peak = np.ones(votes.shape, dtype=bool)
    n_r, n_c = votes.shape
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr or dc:
                peak &= votes >= padded[1 + dr : 1 + dr + n_r, 1 + dc : 1 + dc + n_c]
    return peak


def extract_lines(acc: LineAccumulator, pk: PeakParams | None = None) -> list[SymmetryLine]:
    """Greedy non-maximum suppression over local maxima of the line accumulator.

    Ties on score go to the lower rho bin, then the lower delta bin.
    """
    pk = pk or PeakParams()
    votes = acc.votes
    top = votes.max() if votes.size else 0.0
    if not top > 0:
        return []
    keep = _line_local_maxima(votes) & (votes >= pk.threshold_fraction * top) & (votes > 0)
    rows, cols = np.nonzero(keep)
    order = sorted(range(len(rows)), key=lambda i: (-votes[rows[i], cols[i]], rows[i], cols[i]))

    n_rho = votes.shape[0]
    last_col = votes.shape[1] - 1
    w_rho = max(1, int(round(pk.nms_rho_window / acc.rho_step)))
    w_delta = pk.nms_delta_window
    chosen: list[tuple[int, int]] = []
    for i in order:
        r, c = int(rows[i]), int(cols[i])
        clash = False
        for r0, c0 in chosen:
            dr = abs(r - r0)
            if dr <= w_rho and abs(c - c0) <= w_delta:
                clash = True
            elif n_rho - dr <= w_rho and abs(c - (last_col - c0)) <= w_delta:
                clash = True
            if clash:
                break
        if not clash:
            chosen.append((r, c))
            if len(chosen) == pk.max_detections:
                break
    return [
        SymmetryLine(rho=float(acc.rho[r]), delta=float(c - acc.delta_max), score=float(votes[r, c]))
        for r, c in chosen
    ]


def segment_histogram(image, line: SymmetryLine, params: SweepParams) -> np.ndarray:
    """Robust vote profile along ``line``: top-5 stencil magnitudes summed per sample.

    Empty when the line misses the image.
    """
    return top_votes_along_line(image, line.rho, line.delta, params)[2]


def haar_response(histogram, haar: HaarKernel) -> np.ndarray:
    """Haar response at each boundary ``t = 0..len(histogram)``.

    Entry ``t`` is positive when the samples from ``t`` on exceed those before
    ``t``. The ends are extended by repeating the outermost samples.
    """
    h = np.asarray(histogram, dtype=float)
    half = haar.size // 2
    padded = np.pad(h, half, mode="edge")
    return np.convolve(padded, haar.values, mode="valid")


def find_endpoints(histogram, haar: HaarKernel | None = None) -> tuple[int, int]:
    """Boundaries ``a < b`` where the profile rises most and falls most.

    ``a`` is the first sample of the support and ``b`` the first sample past it.
    Raises :class:`NoSupportError` if no rise is followed by a fall.
    """
    haar = haar or make_haar(DEFAULT_HAAR_SIZE)
    h = np.asarray(histogram, dtype=float)
    if h.ndim != 1 or len(h) <= haar.size:
        raise ParameterError(f"histogram length {h.size} must exceed Haar size {haar.size}")
    r = haar_response(h, haar)
    tol = 1e-9 * max(float(np.abs(h).max()), 1e-300)
    a, b = int(np.argmax(r)), int(np.argmin(r))
    if r[a] <= tol or r[b] >= -tol:
        raise NoSupportError("profile has no distinct rise and fall")
    if a < b:
        return a, b

    # the global fall precedes the global rise: best rise-then-fall pair instead
    best, pair = -np.inf, None
    run_idx = 0
    for t in range(1, len(r)):
        if r[t - 1] > r[run_idx]:
            run_idx = t - 1
        if r[run_idx] > tol and r[t] < -tol and r[run_idx] - r[t] > best:
            best, pair = r[run_idx] - r[t], (run_idx, t)
    if pair is None:
        raise NoSupportError("no rise is followed by a fall")
    return pair


def extract_segments(
    image, lines, params: SweepParams, haar: HaarKernel | None = None
) -> list[SymmetrySegment]:
    """Clip each line to the stretch where its vote profile is supported.

    Lines whose profile is too short or has no rise/fall pair are dropped.
    """
    img = as_image(image)
    haar = haar or make_haar(DEFAULT_HAAR_SIZE)
    bank = _ResponseBank(img, params.geometry, params.boundary)
    # coefficients are quadratic in intensity; anything below this is round-off
    floor = 1e-9 * float(np.abs(img).max()) ** 2
    out = []
    for line in lines:
        t, _, values = top_votes_along_line(img, line.rho, line.delta, params, bank=bank)
        if len(values) <= haar.size or not values.max() > floor:
            continue
        try:
            a, b = find_endpoints(values, haar)
        except NoSupportError:
            continue
        # boundary k sits half a sample before sample k
        ta, tb = t[0] + a - 0.5, t[0] + b - 0.5
        u = (math.cos(line.rho), math.sin(line.rho))
        nx, ny = line.normal
        foot = (line.delta * nx, line.delta * ny)
        out.append(
            SymmetrySegment(
                line=line,
                endpoint_a=(foot[0] + ta * u[0], foot[1] + ta * u[1]),
                endpoint_b=(foot[0] + tb * u[0], foot[1] + tb * u[1]),
            )
        )
    return out


def extract_centers(likelihood, pk: PeakParams | None = None) -> list[CenterDetection]:
    """8-neighbour local maxima of a center-likelihood map, thinned by distance."""
    pk = pk or PeakParams()
    m = np.asarray(likelihood, dtype=float)
    top = m.max() if m.size else 0.0
    if not top > 0:
        return []
    is_max = m >= ndimage.maximum_filter(m, size=3, mode="constant", cval=-np.inf)
    keep = is_max & (m >= pk.threshold_fraction * top) & (m > 0)
    ys, xs = np.nonzero(keep)
    order = sorted(range(len(ys)), key=lambda i: (-m[ys[i], xs[i]], ys[i], xs[i]))
    chosen: list[CenterDetection] = []
    for i in order:
        x, y = int(xs[i]), int(ys[i])
        if any(math.hypot(x - c.x, y - c.y) <= pk.nms_delta_window for c in chosen):
            continue
        chosen.append(CenterDetection(x=float(x), y=float(y), score=float(m[y, x])))
        if len(chosen) == pk.max_detections:
            break
    return chosen
