"""Reflection symmetry detection from products of complex wavelet convolutions."""

from .conv import convolve, shifted_product
from .detect import (
    CenterDetection,
    PeakParams,
    SymmetryLine,
    SymmetrySegment,
    extract_centers,
    extract_lines,
    extract_segments,
    find_endpoints,
    segment_histogram,
)
from .errors import GroundTruthError, NoSupportError, ParameterError, SymwaveError
from .evaluation import GroundTruthSegment, MatchResult, PRPoint, is_tp_line, is_tp_segment, load_ground_truth, match, pr_curve
from .symmetry import (
    LineAccumulator,
    StencilConfig,
    SweepParams,
    accumulate_centers,
    accumulate_lines,
    line_params,
    refine_line_scores,
    stencil_coefficient_map,
    stencil_kernels,
)
from .wavelets import HaarKernel, MorletKernel, WaveletGeometry, make_haar, make_morlet

__version__ = "0.1.0"
