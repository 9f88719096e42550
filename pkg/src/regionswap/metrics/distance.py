"""Pixel distance and identity embeddings.

Identity preservation is the squared Euclidean distance between feature
vectors. The shipped probe embedder measures color statistics of the
fixed face probe region, which is what identity means in the synthetic
domain; real face embeddings come from an external extractor invoked as
a subprocess (one PNG path in, whitespace-separated floats out).
"""
from __future__ import annotations

import subprocess
import tempfile
from pathlib import Path

import numpy as np

from ..color import rgb_to_hsv
from ..data.synthetic import face_probe_mask
from ..images import save_png


def abs_error(a01: np.ndarray, b01: np.ndarray) -> float:
    return float(np.mean(np.abs(np.asarray(a01, np.float64) - np.asarray(b01, np.float64))))


def identity_distance(e1: np.ndarray, e2: np.ndarray) -> float:
    diff = np.asarray(e1, np.float64) - np.asarray(e2, np.float64)
    return float(np.dot(diff, diff))


class ProbeEmbedder:
    """Face-probe color statistics: mean RGB plus a saturation-weighted
    hue histogram."""

    name = "Probe"

    def __init__(self, n_hue_bins: int = 8):
        self.n_hue_bins = n_hue_bins

    def __call__(self, img01: np.ndarray) -> np.ndarray:
        probe = face_probe_mask(img01.shape[0])
        pixels = img01[probe]
        hsv = rgb_to_hsv(pixels)
        weights = hsv[:, 1] * hsv[:, 2] + 1e-9
        hist, _ = np.histogram(
            hsv[:, 0], bins=self.n_hue_bins, range=(0.0, 1.0), weights=weights
        )
        hist = hist / weights.sum()
        return np.concatenate([pixels.mean(axis=0), hist]).astype(np.float64)


class ExternalEmbedder:
    """Adapter for an external feature extractor binary."""

    def __init__(self, command: list[str] | str, name: str = "OpenFace"):
        self.command = command.split() if isinstance(command, str) else list(command)
        self.name = name

    def __call__(self, img01: np.ndarray) -> np.ndarray:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "frame.png"
            save_png(img01, path)
            result = subprocess.run(
                [*self.command, str(path)], capture_output=True, text=True, check=True
            )
        values = [float(v) for v in result.stdout.split()]
        if not values:
            raise RuntimeError(f"{self.command[0]} produced no embedding values")
        return np.asarray(values, dtype=np.float64)
