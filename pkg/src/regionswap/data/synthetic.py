"""Two-factor synthetic corpus for fast controlled experiments.

Each sample is a hair disk with a face ellipse drawn over it on a black
background. The two generative factors are the face hue and the hair hue;
each region's hue is exactly constant, so region hue can be measured with
zero ambiguity. Geometry jitters slightly, but fixed probe regions (a
small disk at the image center for the face, an annulus for the hair) lie
inside the correct region for every possible jitter, so measurements
never need segmentation.

Attributes are one-hot hue bins for the two regions, concatenated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..color import circular_hue_mean, hsv_to_rgb, one_hot, rgb_to_hsv
from ..images import unit_to_model
from .dataset import TensorDataset

FACE_BINS = 6
HAIR_BINS = 6


@dataclass
class ToyParams:
    resolution: int = 32
    n_samples: int = 512
    seed: int = 0


def attr_names() -> list[str]:
    return [f"face_hue_{i}" for i in range(FACE_BINS)] + [
        f"hair_hue_{i}" for i in range(HAIR_BINS)
    ]


def _grid(s: int) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0:s, 0:s]
    return yy.astype(np.float64) + 0.5, xx.astype(np.float64) + 0.5


def face_probe_mask(resolution: int) -> np.ndarray:
    """Disk of radius 3 (at 32 px) around the center; inside the face
    ellipse for every jitter the sampler can produce."""
    scale = resolution / 32.0
    yy, xx = _grid(resolution)
    center = resolution / 2.0
    r2 = (yy - center) ** 2 + (xx - center) ** 2
    return r2 <= (3.0 * scale) ** 2


def hair_probe_mask(resolution: int) -> np.ndarray:
    """Annulus between radii 10.5 and 12.5 (at 32 px): always outside the
    face ellipse and inside the hair disk."""
    scale = resolution / 32.0
    yy, xx = _grid(resolution)
    center = resolution / 2.0
    r2 = (yy - center) ** 2 + (xx - center) ** 2
    return ((10.5 * scale) ** 2 <= r2) & (r2 <= (12.5 * scale) ** 2)


def _hue_in_bin(rng: np.random.Generator, bin_index: int, n_bins: int) -> float:
    # keep away from bin edges so the one-hot labels are unambiguous
    lo = (bin_index + 0.1) / n_bins
    hi = (bin_index + 0.9) / n_bins
    return float(rng.uniform(lo, hi))


def render_sample(
    resolution: int,
    face_hue: float,
    hair_hue: float,
    face_value: float = 0.95,
    hair_value: float = 0.8,
    face_center: tuple[float, float] = (0.0, 0.0),
    face_axes: tuple[float, float] = (6.0, 6.0),
    hair_center: tuple[float, float] = (0.0, 0.0),
    hair_radius: float = 14.0,
) -> dict[str, np.ndarray]:
    """Rasterize one sample; offsets and sizes are in 32-px units."""
    s = resolution
    scale = s / 32.0
    yy, xx = _grid(s)
    c = s / 2.0

    hy, hx = (c + hair_center[0] * scale, c + hair_center[1] * scale)
    hair_mask = (yy - hy) ** 2 + (xx - hx) ** 2 <= (hair_radius * scale) ** 2
    fy, fx = (c + face_center[0] * scale, c + face_center[1] * scale)
    ax, ay = face_axes[0] * scale, face_axes[1] * scale
    face_mask = ((xx - fx) / ax) ** 2 + ((yy - fy) / ay) ** 2 <= 1.0

    face_rgb = hsv_to_rgb(np.array([face_hue, 0.85, face_value]))
    hair_rgb = hsv_to_rgb(np.array([hair_hue, 0.85, hair_value]))

    x = np.zeros((s, s, 3), dtype=np.float32)
    x[hair_mask] = hair_rgb
    x[face_mask] = face_rgb
    x_f = np.zeros_like(x)
    x_f[face_mask] = face_rgb
    x_h = x.copy()
    x_h[face_mask] = 0.0
    m_bg = (~(hair_mask | face_mask)).astype(np.float32)
    return {"x": x, "x_f": x_f, "x_h": x_h, "m_bg": m_bg,
            "face_mask": face_mask, "hair_mask": hair_mask}


def draw_sample(rng: np.random.Generator, resolution: int) -> tuple[dict, np.ndarray, float, float]:
    face_bin = int(rng.integers(0, FACE_BINS))
    hair_bin = int(rng.integers(0, HAIR_BINS))
    face_hue = _hue_in_bin(rng, face_bin, FACE_BINS)
    hair_hue = _hue_in_bin(rng, hair_bin, HAIR_BINS)
    sample = render_sample(
        resolution,
        face_hue=face_hue,
        hair_hue=hair_hue,
        face_value=float(rng.uniform(0.9, 1.0)),
        hair_value=float(rng.uniform(0.75, 0.85)),
        face_center=(float(rng.uniform(-1.5, 1.5)), float(rng.uniform(-1.5, 1.5))),
        face_axes=(float(rng.uniform(5.0, 7.5)), float(rng.uniform(5.0, 7.5))),
        hair_center=(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-0.5, 0.5))),
        hair_radius=float(rng.uniform(13.5, 15.0)),
    )
    c = np.concatenate([one_hot(face_bin, FACE_BINS), one_hot(hair_bin, HAIR_BINS)])
    return sample, c, face_hue, hair_hue


def make_toy_dataset(params: ToyParams) -> TensorDataset:
    rng = np.random.default_rng(params.seed)
    xs, xfs, xhs, mbgs, cs = [], [], [], [], []
    for _ in range(params.n_samples):
        sample, c, _, _ = draw_sample(rng, params.resolution)
        xs.append(unit_to_model(sample["x"]))
        xfs.append(unit_to_model(sample["x_f"]))
        xhs.append(unit_to_model(sample["x_h"]))
        mbgs.append(torch.from_numpy(sample["m_bg"]).unsqueeze(0))
        cs.append(torch.from_numpy(c))
    return TensorDataset(
        x=torch.stack(xs), x_f=torch.stack(xfs), x_h=torch.stack(xhs),
        m_bg=torch.stack(mbgs), c=torch.stack(cs), attr_names=attr_names(),
    )


def measure_region_hues(img01: np.ndarray) -> tuple[float, float]:
    """Circular-mean hue over the fixed face and hair probes of a [0,1]
    HWC image; saturation-weighted so near-gray pixels barely vote."""
    resolution = img01.shape[0]
    hsv = rgb_to_hsv(img01)
    result = []
    for probe in (face_probe_mask(resolution), hair_probe_mask(resolution)):
        hues = hsv[..., 0][probe]
        weights = hsv[..., 1][probe] * hsv[..., 2][probe] + 1e-6
        result.append(circular_hue_mean(hues, weights))
    return result[0], result[1]
