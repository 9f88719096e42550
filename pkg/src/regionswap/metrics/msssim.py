"""Multi-scale structural similarity, from scratch on numpy in float64.

Per scale: 11x11 Gaussian window (sigma 1.5), valid convolution, constants
K1=0.01 and K2=0.03 on a unit data range. Between scales the image is
padded at the bottom/right edge to even size (edge replication) and
2x2-average-pooled. Each scale contributes its mean contrast-structure
term (clamped at zero), the last scale its full similarity; the score is
the weighted geometric mean across scales, averaged over channels.

Color images are reduced to BT.601 luma by default (``luma=False`` scores
the RGB channels independently and averages them).

The canonical five scale weights are used; when the image is too small
for five scales the trailing weights are dropped and the rest renormalized
to sum to one. A scale is usable while the downsampled image still fits
the 11-pixel window, so the coarsest level keeps min(H, W) / 2^(L-1) >= 11.

Identical inputs score exactly 1.0: every similarity map is a ratio of
bitwise-equal numerator and denominator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
LUMA_WEIGHTS = (0.299, 0.587, 0.114)
WINDOW = 11
SIGMA = 1.5
K1 = 0.01
K2 = 0.03

_coords = np.arange(WINDOW, dtype=np.float64) - (WINDOW - 1) / 2.0
_g = np.exp(-(_coords ** 2) / (2.0 * SIGMA * SIGMA))
_g /= _g.sum()
_KERNEL = np.outer(_g, _g)


@dataclass(frozen=True)
class MsssimResult:
    value: float
    levels: int
    weights: tuple[float, ...]

    def __float__(self) -> float:
        return self.value


def usable_levels(min_dim: int, max_levels: int = len(DEFAULT_WEIGHTS)) -> int:
    levels = 0
    while levels < max_levels and (min_dim >> levels) >= WINDOW:
        levels += 1
    return levels


def _filter_valid(img: np.ndarray) -> np.ndarray:
    win = np.lib.stride_tricks.sliding_window_view(img, (WINDOW, WINDOW), axis=(0, 1))
    return np.tensordot(win, _KERNEL, axes=([3, 4], [0, 1]))


def _ssim_cs(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c1 = K1 * K1
    c2 = K2 * K2
    mu_a = _filter_valid(a)
    mu_b = _filter_valid(b)
    var_a = _filter_valid(a * a) - mu_a * mu_a
    var_b = _filter_valid(b * b) - mu_b * mu_b
    cov = _filter_valid(a * b) - mu_a * mu_b
    cs_map = (2.0 * cov + c2) / (var_a + var_b + c2)
    lum_map = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    ssim_map = lum_map * cs_map
    return ssim_map.mean(axis=(0, 1)), cs_map.mean(axis=(0, 1))


def _downsample(img: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    img = np.pad(img, ((0, h % 2), (0, w % 2), (0, 0)), mode="edge")
    return (
        img[0::2, 0::2] + img[1::2, 0::2] + img[0::2, 1::2] + img[1::2, 1::2]
    ) / 4.0


def to_luma(img: np.ndarray) -> np.ndarray:
    """BT.601 luma of an HW3 array (HW arrays pass through)."""
    if img.ndim == 3 and img.shape[2] == 3:
        return img @ np.asarray(LUMA_WEIGHTS, dtype=np.float64)
    return img


def msssim(a: np.ndarray, b: np.ndarray, weights=None, luma: bool = True) -> MsssimResult:
    """Score two [0, 1] images, HWC or HW, identical shapes."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if luma:
        x = to_luma(x)
        y = to_luma(y)
    if x.ndim == 2:
        x = x[..., None]
        y = y[..., None]
    if x.ndim != 3:
        raise ValueError("images must be HWC or HW arrays")

    if weights is None:
        levels = usable_levels(min(x.shape[0], x.shape[1]))
        if levels == 0:
            raise ValueError(
                f"images of size {x.shape[:2]} are smaller than the {WINDOW}px window"
            )
        kept = np.array(DEFAULT_WEIGHTS[:levels], dtype=np.float64)
        kept /= kept.sum()
    else:
        kept = np.asarray(weights, dtype=np.float64)
        levels = len(kept)
        if (min(x.shape[0], x.shape[1]) >> (levels - 1)) < WINDOW:
            raise ValueError(f"images too small for {levels} scales")

    factors = []
    last_ssim = None
    for level in range(levels):
        ssim_pc, cs_pc = _ssim_cs(x, y)
        last_ssim = ssim_pc
        if level < levels - 1:
            factors.append(np.maximum(cs_pc, 0.0))
            x = _downsample(x)
            y = _downsample(y)
    factors.append(np.maximum(last_ssim, 0.0))

    per_channel = np.ones_like(factors[0])
    for factor, weight in zip(factors, kept):
        per_channel = per_channel * np.power(factor, weight)
    return MsssimResult(
        value=float(per_channel.mean()), levels=levels, weights=tuple(kept.tolist())
    )
