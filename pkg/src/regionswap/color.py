"""Color helpers: HSV conversion and circular hue statistics.

Hue lives on the unit circle, stored in [0, 1). Averages and distances
must respect wrap-around, so means go through sin/cos.
"""
from __future__ import annotations

import numpy as np
from matplotlib.colors import hsv_to_rgb as _hsv_to_rgb
from matplotlib.colors import rgb_to_hsv as _rgb_to_hsv


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """RGB in [0,1], shape (..., 3) -> HSV in [0,1]."""
    return _rgb_to_hsv(np.clip(rgb, 0.0, 1.0))


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    return _hsv_to_rgb(hsv)


def circular_hue_mean(hue: np.ndarray, weights: np.ndarray | None = None) -> float:
    """Mean hue in [0,1) of a sample of hues, optionally weighted."""
    angles = np.asarray(hue, dtype=np.float64) * (2.0 * np.pi)
    if weights is None:
        s, c = np.mean(np.sin(angles)), np.mean(np.cos(angles))
    else:
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        s = float((np.sin(angles) * w).sum() / total)
        c = float((np.cos(angles) * w).sum() / total)
    return float(np.arctan2(s, c) / (2.0 * np.pi)) % 1.0


def hue_delta_deg(a: float, b: float) -> float:
    """Shortest angular distance between two hues, in degrees [0, 180]."""
    d = abs(a - b) % 1.0
    return 360.0 * min(d, 1.0 - d)


def hue_bin(hue: float, n_bins: int) -> int:
    """Index of the hue bin; bins are equal arcs starting at hue 0."""
    return int(np.floor((hue % 1.0) * n_bins)) % n_bins


def bin_center_hue(index: int, n_bins: int) -> float:
    return (index + 0.5) / n_bins


def one_hot(index: int, n: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.float32)
    v[index] = 1.0
    return v
