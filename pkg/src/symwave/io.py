"""Image loading, heat-map export and the detections JSON format."""

from __future__ import annotations

import json
import os

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .detect import CenterDetection, SymmetryLine, SymmetrySegment
from .errors import ParameterError


def load_image(path, resize_max: int | None = 200) -> tuple[np.ndarray, float]:
    """Read a PNG/PGM as a float grayscale array in ``[0, 1]``.

    Color channels are averaged without weights and alpha is dropped. Images
    larger than ``resize_max`` on their longest side are shrunk, keeping the
    aspect ratio; smaller ones are left alone. Returns ``(image, scale)``.
    """
    path = os.fspath(path)
    if resize_max is not None and resize_max < 32:
        raise ParameterError(f"resize_max must be >= 32, got {resize_max}")
    try:
        with PILImage.open(path) as im:
            im.load()
            arr = _to_gray(im)
    except (FileNotFoundError, IsADirectoryError, PermissionError, UnidentifiedImageError, OSError) as exc:
        raise OSError(f"cannot read image {path}: {exc.__class__.__name__}") from exc

    h, w = arr.shape
    scale = 1.0
    if resize_max is not None and max(w, h) > resize_max:
        scale = resize_max / max(w, h)
        size = (max(1, round(w * scale)), max(1, round(h * scale)))
        resized = PILImage.fromarray(arr.astype(np.float32)).resize(
            size, PILImage.Resampling.BILINEAR
        )
        arr = np.clip(np.asarray(resized, dtype=float), 0.0, 1.0)
    return arr, scale


def _to_gray(im: PILImage.Image) -> np.ndarray:
    if im.mode in ("I;16", "I;16B", "I;16L", "I"):
        raw = np.asarray(im, dtype=float)
        peak = 65535.0 if im.mode.startswith("I;16") or raw.max() > 255 else 255.0
        return np.clip(raw / peak, 0.0, 1.0)
    if im.mode == "F":
        return np.clip(np.asarray(im, dtype=float), 0.0, 1.0)
    if im.mode == "1":
        im = im.convert("L")
    elif im.mode not in ("L", "RGB"):
        im = im.convert("RGBA" if "A" in im.getbands() or im.mode == "P" else "RGB")
    raw = np.asarray(im, dtype=float) / 255.0
    if raw.ndim == 3:
        raw = raw[..., :3].mean(axis=2)
    return raw


def write_pgm16(path, values: np.ndarray) -> None:
    """Binary 16-bit PGM with values rescaled so the maximum maps to 65535."""
    v = np.asarray(values, dtype=float)
    top = v.max() if v.size else 0.0
    scaled = np.zeros(v.shape) if top <= 0 else np.clip(v, 0, None) / top * 65535.0
    data = np.rint(scaled).astype(">u2")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(data.tobytes())


def _r(x: float) -> float:
    return round(float(x), 6) + 0.0


def detections_to_dict(image: str, mode: str, scale: float, lines=(), segments=(), centers=()) -> dict:
    return {
        "image": image,
        "mode": mode,
        "scale": _r(scale),
        "lines": [{"rho": _r(ln.rho), "delta": _r(ln.delta), "score": _r(ln.score)} for ln in lines],
        "segments": [
            {
                "ax": _r(s.endpoint_a[0]),
                "ay": _r(s.endpoint_a[1]),
                "bx": _r(s.endpoint_b[0]),
                "by": _r(s.endpoint_b[1]),
                "rho": _r(s.line.rho),
                "delta": _r(s.line.delta),
                "score": _r(s.score),
            }
            for s in segments
        ],
        "centers": [{"x": _r(c.x), "y": _r(c.y), "score": _r(c.score)} for c in centers],
    }


def write_detections(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_detections(path):
    """Parse a detections file back into ``(payload, lines, segments, centers)``."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    lines = [SymmetryLine(d["rho"], d["delta"], d["score"]) for d in payload.get("lines", [])]
    segments = [
        SymmetrySegment(
            line=SymmetryLine(d["rho"], d["delta"], d["score"]),
            endpoint_a=(d["ax"], d["ay"]),
            endpoint_b=(d["bx"], d["by"]),
        )
        for d in payload.get("segments", [])
    ]
    centers = [CenterDetection(d["x"], d["y"], d["score"]) for d in payload.get("centers", [])]
    return payload, lines, segments, centers
