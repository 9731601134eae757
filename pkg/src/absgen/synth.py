"""Procedural handwriting-style image generation.

Classes are stroke skeletons (polylines and ellipse arcs in the unit
square) rendered with a soft round brush onto dark backgrounds. Each
instance jitters the skeleton with a random affine map, smooth per-point
wobble, stroke width and brightness, giving MNIST-like within-class
variation without any external data. Digit skeletons cover 0-9; glyph
classes draw random skeletons for one-shot episodes over novel patterns.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates

from absgen.datasets import LabeledDataset
from absgen.errors import ContractError

_ARC_STEPS = 80
_POLY_STEPS_PER_SEGMENT = 36


def _poly(*points):
    return ("poly", np.asarray(points, float))


def _arc(cx, cy, rx, ry, start=0.0, stop=2.0 * np.pi):
    return ("arc", np.array([cx, cy, rx, ry, start, stop]))


DIGIT_STROKES = {
    0: [_arc(0.50, 0.50, 0.24, 0.33)],
    1: [_poly((0.35, 0.22), (0.52, 0.10), (0.52, 0.90))],
    2: [_poly((0.28, 0.32), (0.33, 0.15), (0.52, 0.10), (0.68, 0.17),
              (0.72, 0.32), (0.62, 0.50), (0.30, 0.88), (0.75, 0.88))],
    3: [_poly((0.30, 0.15), (0.55, 0.10), (0.70, 0.25), (0.55, 0.45),
              (0.45, 0.47), (0.55, 0.50), (0.72, 0.65), (0.60, 0.85), (0.32, 0.90))],
    4: [_poly((0.58, 0.10), (0.22, 0.58), (0.82, 0.58)),
        _poly((0.66, 0.10), (0.66, 0.90))],
    5: [_poly((0.70, 0.12), (0.32, 0.12), (0.30, 0.45), (0.55, 0.42),
              (0.72, 0.55), (0.70, 0.75), (0.52, 0.88), (0.30, 0.82))],
    6: [_poly((0.62, 0.10), (0.42, 0.25), (0.32, 0.50), (0.33, 0.72)),
        _arc(0.50, 0.68, 0.18, 0.20)],
    7: [_poly((0.25, 0.12), (0.75, 0.12), (0.48, 0.90))],
    8: [_arc(0.50, 0.30, 0.18, 0.17), _arc(0.50, 0.67, 0.21, 0.20)],
    9: [_arc(0.46, 0.33, 0.20, 0.20),
        _poly((0.66, 0.33), (0.63, 0.62), (0.55, 0.90))],
}


DIGIT_VARIANTS = {d: [strokes] for d, strokes in DIGIT_STROKES.items()}
DIGIT_VARIANTS[4] = [
    DIGIT_STROKES[4],
    [_poly((0.30, 0.12), (0.27, 0.55), (0.80, 0.55)),
     _poly((0.63, 0.10), (0.66, 0.90))],
    [_poly((0.52, 0.12), (0.20, 0.62), (0.85, 0.62)),
     _poly((0.60, 0.35), (0.60, 0.92))],
    [_poly((0.28, 0.10), (0.28, 0.48), (0.76, 0.48)),
     _poly((0.70, 0.12), (0.72, 0.88)),
     _poly((0.55, 0.70), (0.88, 0.70))],
]
DIGIT_VARIANTS[9] = [
    DIGIT_STROKES[9],
    [_arc(0.48, 0.30, 0.17, 0.16),
     _poly((0.645, 0.30), (0.68, 0.62), (0.70, 0.90))],
    [_arc(0.50, 0.28, 0.21, 0.17),
     _poly((0.71, 0.28), (0.60, 0.55), (0.38, 0.88))],
    [_arc(0.46, 0.35, 0.16, 0.22),
     _poly((0.62, 0.35), (0.66, 0.66), (0.78, 0.90))],
]


def _sample_stroke(stroke):
    """Dense (M, 2) point trace of one skeleton stroke in unit coordinates."""
    kind, data = stroke
    if kind == "arc":
        cx, cy, rx, ry, start, stop = data
        t = np.linspace(start, stop, _ARC_STEPS)
        return np.stack([cx + rx * np.cos(t), cy + ry * np.sin(t)], axis=1)
    pts = data
    pieces = []
    for p, q in zip(pts, pts[1:]):
        t = np.linspace(0.0, 1.0, _POLY_STEPS_PER_SEGMENT, endpoint=False)[:, None]
        pieces.append(p + t * (q - p))
    pieces.append(pts[-1:])
    return np.concatenate(pieces)


def _jitter(points, rng, strength: float = 0.0):
    """Random affine about the center plus smooth low-frequency wobble.

    ``strength`` widens every distortion range; 0 keeps the mild default.
    """
    s = strength
    theta = rng.normal(0.0, np.deg2rad(5.0 + 7.0 * s))
    sx, sy = rng.uniform(0.82 - 0.07 * s, 1.06 + 0.06 * s, 2)
    shear = rng.normal(0.0, 0.08 + 0.07 * s)
    shift = rng.uniform(-1.0, 1.0, 2) * (0.05 + 0.03 * s)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    mat = rot @ np.array([[sx, shear * sx], [0.0, sy]])
    out = (points - 0.5) @ mat.T + 0.5 + shift
    phase = rng.uniform(0.0, 2.0 * np.pi, 2)
    amp = rng.uniform(0.0, 0.015 + 0.02 * s, 2)
    t = np.linspace(0.0, 2.0 * np.pi, len(points))
    out[:, 0] += amp[0] * np.sin(2.0 * t + phase[0])
    out[:, 1] += amp[1] * np.sin(3.0 * t + phase[1])
    return out


def _elastic_warp(img, rng, alpha, sigma=4.0):
    """Smooth random displacement field, at most ``alpha`` pixels."""
    if alpha <= 0.0:
        return img
    dx = gaussian_filter(rng.uniform(-1.0, 1.0, img.shape), sigma)
    dy = gaussian_filter(rng.uniform(-1.0, 1.0, img.shape), sigma)
    dx *= alpha / (np.abs(dx).max() + 1e-9)
    dy *= alpha / (np.abs(dy).max() + 1e-9)
    h, w = img.shape
    r, c = np.meshgrid(np.arange(h, dtype=float), np.arange(w, dtype=float),
                       indexing="ij")
    warped = map_coordinates(img, [r + dy, c + dx], order=1, mode="constant")
    return np.clip(warped, 0.0, 1.0)


def _render(traces, size, width, intensity):
    """Max-composite Gaussian brush splats of every trace point."""
    grid = np.arange(size, dtype=float)
    gx, gy = np.meshgrid(grid, grid, indexing="xy")
    img = np.zeros((size, size))
    sigma = width * (size - 1)
    for trace in traces:
        pts = trace * (size - 1)
        d2 = (gx[None] - pts[:, 0, None, None]) ** 2 + (gy[None] - pts[:, 1, None, None]) ** 2
        img = np.maximum(img, np.exp(-d2 / (2.0 * sigma * sigma)).max(axis=0))
    return np.clip(img * intensity, 0.0, 1.0)


def render_instance(strokes, rng, size: int = 28) -> np.ndarray:
    width = rng.uniform(0.028, 0.042)
    intensity = rng.uniform(0.85, 1.0)
    traces = [_jitter(_sample_stroke(s), rng) for s in strokes]
    return _render(traces, size, width, intensity)


def make_digit_dataset(digits, n_per_class: int, seed: int, size: int = 28,
                       split: str = "train", style: str = "plain") -> LabeledDataset:
    """Render ``n_per_class`` instances of each requested digit.

    Labels are re-indexed 0..len(digits)-1 in the order given, with the
    digit characters kept as class names. Style "plain" draws one thin
    canonical skeleton per digit; "varied" mixes alternative skeletons
    per digit with wider strokes, stronger jitter and a smooth elastic
    warp, which makes within-class variation closer to real handwriting.
    """
    digits = list(digits)
    if not digits:
        raise ContractError("make_digit_dataset needs at least one digit")
    for d in digits:
        if d not in DIGIT_STROKES:
            raise ContractError(f"unknown digit {d!r}; supported: 0-9")
    if n_per_class < 1:
        raise ContractError(f"n_per_class must be >= 1, got {n_per_class}")
    if style not in ("plain", "varied"):
        raise ContractError(f"style must be 'plain' or 'varied', got {style!r}")
    rng = np.random.default_rng(np.random.SeedSequence([0xD161, seed]))
    samples, labels = [], []
    for label, digit in enumerate(digits):
        for _ in range(n_per_class):
            if style == "plain":
                samples.append(render_instance(DIGIT_STROKES[digit], rng, size))
            else:
                options = DIGIT_VARIANTS[digit]
                strokes = options[rng.integers(len(options))]
                width = rng.uniform(0.11, 0.17)
                intensity = rng.uniform(0.70, 1.0)
                traces = [_jitter(_sample_stroke(s), rng, strength=0.45)
                          for s in strokes]
                img = _render(traces, size, width, intensity)
                samples.append(_elastic_warp(img, rng, alpha=1.54 * size / 28.0))
            labels.append(label)
    return LabeledDataset(np.stack(samples), np.array(labels), split=split,
                          class_names=[str(d) for d in digits])


def _random_skeleton(rng):
    """A novel glyph class: a few random smoothed polylines."""
    strokes = []
    for _ in range(rng.integers(2, 5)):
        pts = rng.uniform(0.15, 0.85, (int(rng.integers(3, 6)), 2))
        for _ in range(2):  # corner-cutting smooths the random walk
            mid = 0.5 * (pts[:-1] + pts[1:])
            quarter = 0.75 * pts[:-1] + 0.25 * pts[1:]
            pts = np.concatenate([pts[:1], np.stack([quarter, mid], axis=1).reshape(-1, 2), pts[-1:]])
        strokes.append(_poly(*pts))
    return strokes


def make_glyph_dataset(n_classes: int, n_per_class: int, seed: int, size: int = 28,
                       split: str = "probe") -> LabeledDataset:
    """Render novel glyph classes for one-shot episodes."""
    if n_classes < 2:
        raise ContractError(f"n_classes must be >= 2, got {n_classes}")
    if n_per_class < 1:
        raise ContractError(f"n_per_class must be >= 1, got {n_per_class}")
    rng = np.random.default_rng(np.random.SeedSequence([0x617F, seed]))
    samples, labels = [], []
    for label in range(n_classes):
        strokes = _random_skeleton(rng)
        for _ in range(n_per_class):
            samples.append(render_instance(strokes, rng, size))
            labels.append(label)
    return LabeledDataset(np.stack(samples), np.array(labels), split=split,
                          class_names=[f"glyph{c:03d}" for c in range(n_classes)])
