"""Probe-set corruptions and the sliding-window SSIM similarity measure.

Every corruption maps images in [0, 1] to images in [0, 1] of the same
shape and is deterministic given its RNG. ``PROBE_SET`` lists the ten
standard probe variants: raw data plus nine corruptions.
"""

from __future__ import annotations

import numpy as np

from absgen.errors import ContractError, DimensionError

BACKGROUND_THRESHOLD = 0.1
STYLE1_PERIOD = 8
STYLE2_BLOCK = 4


def _check_range(x, name):
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ContractError(f"{name} expects values in [0, 1]")


def flip_colors(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, float)
    _check_range(x, "flip_colors")
    return 1.0 - x


def salt_pepper(x: np.ndarray, density: float, rng) -> np.ndarray:
    x = np.asarray(x, float)
    if not 0.0 <= density <= 1.0:
        raise ContractError(f"salt_pepper density must lie in [0, 1], got {density}")
    corrupted = rng.random(x.shape) < density
    values = (rng.random(x.shape) < 0.5).astype(float)
    return np.where(corrupted, values, x)


def gaussian_noise(x: np.ndarray, variance: float, rng, clip: bool = True) -> np.ndarray:
    """Additive N(0, variance) noise, clamped to [0, 1].

    ``clip=False`` exposes the pre-clamp values so the zero-mean property
    of the raw noise stays testable.
    """
    x = np.asarray(x, float)
    if variance < 0.0:
        raise ContractError(f"gaussian_noise variance must be >= 0, got {variance}")
    noisy = x + rng.normal(0.0, np.sqrt(variance), x.shape)
    return np.clip(noisy, 0.0, 1.0) if clip else noisy


def background_mask(x: np.ndarray, threshold: float = BACKGROUND_THRESHOLD) -> np.ndarray:
    if not 0.0 < threshold < 1.0:
        raise ContractError(f"background threshold must lie in (0, 1), got {threshold}")
    return np.asarray(x, float) < threshold


def style_background(x: np.ndarray, style: str, rng,
                     threshold: float = BACKGROUND_THRESHOLD) -> np.ndarray:
    """Replace background pixels (value < threshold) with a procedural texture.

    style1 is a fixed diagonal sinusoidal grating; style2 draws one random
    checkerboard of 4x4 blocks per image with block values in [0.2, 0.8].
    Foreground pixels pass through untouched.
    """
    x = np.asarray(x, float)
    _check_range(x, "style_background")
    if style not in ("style1", "style2"):
        raise ContractError(f"unknown style {style!r}, expected style1 or style2")
    mask = background_mask(x, threshold)
    h, w = x.shape[-2], x.shape[-1]
    if style == "style1":
        r, c = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
        texture = 0.5 + 0.4 * np.sin(2.0 * np.pi * (r + c) / STYLE1_PERIOD)
        texture = np.broadcast_to(texture, x.shape)
    else:
        bh = (h + STYLE2_BLOCK - 1) // STYLE2_BLOCK
        bw = (w + STYLE2_BLOCK - 1) // STYLE2_BLOCK
        lead = x.shape[:-2]
        blocks = rng.uniform(0.2, 0.8, lead + (bh, bw))
        texture = np.repeat(np.repeat(blocks, STYLE2_BLOCK, axis=-2),
                            STYLE2_BLOCK, axis=-1)[..., :h, :w]
    return np.where(mask, texture, x)


def apply_corruption(x: np.ndarray, name: str, rng, **kwargs) -> np.ndarray:
    """Apply one named probe corruption to a batch or single image."""
    if name == "raw":
        return np.asarray(x, float).copy()
    if name == "flipped":
        return flip_colors(x)
    if name.startswith("salt_pepper_"):
        return salt_pepper(x, float(name.rsplit("_", 1)[1]), rng)
    if name.startswith("gaussian_"):
        return gaussian_noise(x, float(name.rsplit("_", 1)[1]), rng)
    if name in ("style1", "style2"):
        return style_background(x, name, rng, **kwargs)
    raise ContractError(f"unknown corruption {name!r}; known: {PROBE_SET}")


PROBE_SET = (
    "raw",
    "flipped",
    "salt_pepper_0.2",
    "salt_pepper_0.5",
    "salt_pepper_0.9",
    "gaussian_0.5",
    "gaussian_0.9",
    "gaussian_1.5",
    "style1",
    "style2",
)


# -- SSIM ------------------------------------------------------------------

SSIM_WINDOW = 8
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


def ssim(a: np.ndarray, b: np.ndarray, window: int = SSIM_WINDOW,
         c1: float = SSIM_C1, c2: float = SSIM_C2) -> float:
    """Mean structural similarity over all stride-1 sliding windows."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape != b.shape:
        raise DimensionError(f"ssim shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise DimensionError(f"ssim expects 2-D images, got shape {a.shape}")
    h, w = a.shape
    if window > min(h, w):
        raise DimensionError(f"ssim window {window} exceeds image size {a.shape}")
    wa = np.lib.stride_tricks.sliding_window_view(a, (window, window))
    wb = np.lib.stride_tricks.sliding_window_view(b, (window, window))
    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    # raw-moment form keeps var and cov on one code path, so identical
    # inputs give a bit-identical numerator and denominator (self-SSIM 1.0)
    var_a = (wa * wa).mean(axis=(-2, -1)) - mu_a * mu_a
    var_b = (wb * wb).mean(axis=(-2, -1)) - mu_b * mu_b
    cov = (wa * wb).mean(axis=(-2, -1)) - mu_a * mu_b
    score = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    )
    return float(score.mean())
