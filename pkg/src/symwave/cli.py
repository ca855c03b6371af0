"""Command-line front end.

    symwave --mode segments --input photo.png --out results/
    symwave --mode ellipses --input cells.png --d-min 35 --d-max 45 --d-step 5
    symwave --mode eval --input imgs/*.png --ground-truth gt.csv --out results/
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import detect, evaluation, io, symmetry
from .errors import GroundTruthError, NoSupportError, ParameterError, SymwaveError
from .wavelets import WaveletGeometry, make_haar

log = logging.getLogger("symwave")

MODES = ("lines", "segments", "ellipses", "eval")
EXIT_IO = 3
EXIT_PARAM = 4
EXIT_GROUND_TRUTH = 5
EXIT_OTHER = 1

PR_THRESHOLDS = tuple(round(0.1 * k, 1) for k in range(1, 11))


@dataclass
class RunConfig:
    mode: str
    inputs: list[str]
    out: str = "."
    ground_truth: str | None = None
    eval_target: str = "segments"
    n_alpha: int = 32
    betas: tuple[float, ...] = (-0.7854, 0.0, 0.7854)
    d_min: float | None = None
    d_max: float | None = None
    d_step: float | None = None
    exponent: float | None = None
    haar_size: int = 20
    resize_max: int = 200
    max_detections: int = 5
    threshold: float = 0.1
    nms_delta: float = 10.0
    boundary: str = "symmetric"
    refine: bool = False
    emit_heatmap: bool = False
    jobs: int = 1
    geometry: WaveletGeometry = field(default_factory=WaveletGeometry)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.eval_target not in ("lines", "segments", "ellipses"):
            raise ParameterError(f"unknown eval target {self.eval_target!r}")
        if self.resize_max < 32:
            raise ParameterError(f"resize_max must be >= 32, got {self.resize_max}")
        if not self.inputs:
            raise ParameterError("no input images given")
        if self.mode == "eval" and not self.ground_truth:
            raise ParameterError("eval mode needs --ground-truth")

    @property
    def target(self) -> str:
        return self.eval_target if self.mode == "eval" else self.mode

    def sweep_for(self, shape) -> symmetry.SweepParams:
        if self.target == "ellipses":
            d_min = 35.0 if self.d_min is None else self.d_min
            d_max = 45.0 if self.d_max is None else self.d_max
            d_step = 5.0 if self.d_step is None else self.d_step
            betas = (0.0,)
            exponent = 1.0 if self.exponent is None else self.exponent
        else:
            d_min = 6.0 if self.d_min is None else self.d_min
            d_max = 0.8 * max(shape) if self.d_max is None else self.d_max
            d_step = 4.0 if self.d_step is None else self.d_step
            betas = self.betas
            exponent = 2.0 if self.exponent is None else self.exponent
        if d_step <= 0 or d_max < d_min:
            raise ParameterError(f"bad distance range {d_min}..{d_max} step {d_step}")
        distances = tuple(float(d) for d in np.arange(d_min, d_max + 1e-9, d_step))
        return symmetry.SweepParams(
            n_alpha=self.n_alpha,
            betas=betas,
            distances=distances,
            exponent=exponent,
            geometry=self.geometry,
            boundary=self.boundary,
        )

    @property
    def peaks(self) -> detect.PeakParams:
        return detect.PeakParams(
            max_detections=self.max_detections,
            nms_rho_window=2 * math.pi / self.n_alpha,
            nms_delta_window=self.nms_delta,
            threshold_fraction=self.threshold,
        )


def detect_image(image: np.ndarray, cfg: RunConfig):
    """Run the configured pipeline on one image.

    Returns ``(lines, segments, centers, heatmap)``.
    """
    params = cfg.sweep_for(image.shape)
    lines, segments, centers = [], [], []
    if cfg.target == "ellipses":
        heat = symmetry.accumulate_centers(image, params)
        centers = detect.extract_centers(heat, cfg.peaks)
        return lines, segments, centers, heat
    acc = symmetry.accumulate_lines(image, params)
    lines = detect.extract_lines(acc, cfg.peaks)
    if cfg.refine:
        lines = symmetry.refine_line_scores(image, lines, params)
    if cfg.target == "segments":
        segments = detect.extract_segments(image, lines, params, make_haar(cfg.haar_size))
    return lines, segments, centers, acc.votes


def _out_dir(cfg: RunConfig, path: str) -> str:
    if len(cfg.inputs) == 1:
        return cfg.out
    return os.path.join(cfg.out, os.path.splitext(os.path.basename(path))[0])


def process_one(cfg: RunConfig, path: str):
    image, scale = io.load_image(path, cfg.resize_max)
    lines, segments, centers, heat = detect_image(image, cfg)
    out_dir = _out_dir(cfg, path)
    os.makedirs(out_dir, exist_ok=True)
    payload = io.detections_to_dict(
        os.path.basename(path), cfg.mode, scale, lines=lines, segments=segments, centers=centers
    )
    io.write_detections(os.path.join(out_dir, "detections.json"), payload)
    if cfg.emit_heatmap:
        io.write_pgm16(os.path.join(out_dir, "accumulator.pgm"), heat)
    log.info("%s: %d lines, %d segments, %d centers", path, len(lines), len(segments), len(centers))
    return scale, {"lines": lines, "segments": segments, "ellipses": centers}[cfg.target]


def run(cfg: RunConfig) -> int:
    for path in cfg.inputs:
        if not os.path.isfile(path):
            raise FileNotFoundError(f"input not found: {path}")
    if cfg.ground_truth and not os.path.isfile(cfg.ground_truth):
        raise FileNotFoundError(f"ground truth not found: {cfg.ground_truth}")
    os.makedirs(cfg.out, exist_ok=True)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(lambda p: process_one(cfg, p), cfg.inputs))
    else:
        results = [process_one(cfg, p) for p in cfg.inputs]
    if cfg.mode != "eval":
        return 0

    ids = {}
    for path, (scale, _) in zip(cfg.inputs, results):
        name = os.path.basename(path)
        ids[name] = scale
        ids[os.path.splitext(name)[0]] = scale
    truth = dict(evaluation.load_ground_truth(cfg.ground_truth, scale=ids))
    dataset = []
    for path, (_, dets) in zip(cfg.inputs, results):
        name = os.path.basename(path)
        gts = truth.get(name, truth.get(os.path.splitext(name)[0], []))
        dataset.append((dets, gts))
    points = evaluation.pr_curve(
        dataset, PR_THRESHOLDS, criterion=evaluation.CRITERIA[cfg.target], by="threshold", relative=True
    )
    evaluation.write_pr_csv(os.path.join(cfg.out, "pr.csv"), points)
    return 0


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symwave", description="Reflection symmetry and ellipse-center detection")
    ap.add_argument("--mode", choices=MODES, required=True)
    ap.add_argument("--input", nargs="+", required=True, help="PNG or PGM image(s)")
    ap.add_argument("--ground-truth", help="CSV of image_id,ax,ay,bx,by (eval mode)")
    ap.add_argument("--eval-target", choices=("lines", "segments", "ellipses"), default="segments")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--n-alpha", type=int, default=32)
    ap.add_argument("--betas", type=_floats, default=(-0.7854, 0.0, 0.7854))
    ap.add_argument("--d-min", type=float)
    ap.add_argument("--d-max", type=float)
    ap.add_argument("--d-step", type=float)
    ap.add_argument("--exponent", type=float, help="default 2 for lines/segments, 1 for ellipses")
    ap.add_argument("--haar-size", type=int, default=20)
    ap.add_argument("--resize-max", type=int, default=200)
    ap.add_argument("--max-detections", type=int, default=5)
    ap.add_argument("--threshold", type=float, default=0.1, help="fraction of the accumulator maximum")
    ap.add_argument("--nms-delta", type=float, default=10.0, help="suppression radius in pixels")
    ap.add_argument("--boundary", choices=("symmetric", "zero", "wrap"), default="symmetric")
    ap.add_argument("--refine", action="store_true", help="rescore lines by the top-5 robust statistic")
    ap.add_argument("--emit-heatmap", action="store_true", help="write accumulator.pgm")
    ap.add_argument("--wavelength", type=float, default=8.0)
    ap.add_argument("--sigma", type=float, default=4.0)
    ap.add_argument("--support", type=int, default=17)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = RunConfig(
            mode=args.mode,
            inputs=args.input,
            out=args.out,
            ground_truth=args.ground_truth,
            eval_target=args.eval_target,
            n_alpha=args.n_alpha,
            betas=args.betas,
            d_min=args.d_min,
            d_max=args.d_max,
            d_step=args.d_step,
            exponent=args.exponent,
            haar_size=args.haar_size,
            resize_max=args.resize_max,
            max_detections=args.max_detections,
            threshold=args.threshold,
            nms_delta=args.nms_delta,
            boundary=args.boundary,
            refine=args.refine,
            emit_heatmap=args.emit_heatmap,
            jobs=args.jobs,
            geometry=WaveletGeometry(args.wavelength, args.sigma, args.support),
        )
        return run(cfg)
    except GroundTruthError as exc:
        print(f"symwave: ground truth error: {exc}", file=sys.stderr)
        return EXIT_GROUND_TRUTH
    except ParameterError as exc:
        print(f"symwave: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"symwave: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SymwaveError, NoSupportError) as exc:
        print(f"symwave: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
