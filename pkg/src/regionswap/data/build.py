"""Dataset construction from photographs, landmarks and person masks."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..images import load_image
from .geometry import build_sample
from .landmarks import read_attributes, read_landmarks
from .manifest import write_manifest, write_sample
from .synthetic import ToyParams, attr_names, draw_sample

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass
class BuildReport:
    total: int = 0
    built: int = 0
    skipped_no_landmarks: int = 0
    skipped_no_mask: int = 0
    skipped_no_attrs: int = 0
    train: list[str] = field(default_factory=list)
    test: list[str] = field(default_factory=list)


def build_photo_dataset(
    images_dir: str | Path,
    landmarks_path: str | Path,
    out_dir: str | Path,
    resolution: int,
    masks_dir: str | Path | None = None,
    attrs_path: str | Path | None = None,
    train_count: int | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> BuildReport:
    """Process every photograph with usable annotations.

    Images without a landmark row are skipped (landmark extraction does
    not succeed on every photograph). Without a mask directory the
    foreground is assumed to cover the frame, so the background mask is
    empty and background down-weighting is a no-op. Without an attribute
    file every sample gets a single constant pseudo-attribute so the
    classifier path stays well-formed.
    """
    images_dir = Path(images_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    landmark_table = read_landmarks(landmarks_path)
    if attrs_path is not None:
        names, attr_table = read_attributes(attrs_path)
    else:
        names, attr_table = ["subject"], None

    report = BuildReport()
    files = sorted(
        p for p in images_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    report.total = len(files)
    built_names: list[str] = []
    for i, path in enumerate(files):
        if progress:
            progress(i, len(files))
        lms = landmark_table.get(path.name)
        if lms is None:
            report.skipped_no_landmarks += 1
            continue
        if attr_table is not None:
            c = attr_table.get(path.name)
            if c is None:
                report.skipped_no_attrs += 1
                continue
        else:
            c = np.ones(1, dtype=np.float32)
        image = load_image(path)
        if masks_dir is not None:
            mask_path = Path(masks_dir) / f"{path.stem}.png"
            if not mask_path.exists():
                report.skipped_no_mask += 1
                continue
            fg = np.asarray(load_image(mask_path)[..., 0] > 0.5, dtype=np.float32)
        else:
            fg = np.ones(image.shape[:2], dtype=np.float32)
        sample = build_sample(image, lms, fg, resolution)
        write_sample(
            out_dir, path.stem, sample["x"], sample["x_f"], sample["x_h"],
            sample["m_bg"], c,
        )
        built_names.append(path.stem)

    report.built = len(built_names)
    if train_count is None:
        train_count = int(round(report.built * 0.92))
    train_count = max(0, min(train_count, report.built))
    report.train = built_names[:train_count]
    report.test = built_names[train_count:]
    write_manifest(out_dir, resolution, names, report.train, report.test)
    return report


def build_synthetic_dataset(
    out_dir: str | Path,
    resolution: int = 32,
    n_samples: int = 512,
    seed: int = 0,
    train_count: int | None = None,
) -> BuildReport:
    """Write the two-factor synthetic corpus in the same directory format."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    names = []
    for i in range(n_samples):
        sample, c, _, _ = draw_sample(rng, resolution)
        name = f"toy{i:06d}"
        write_sample(
            out_dir, name, sample["x"], sample["x_f"], sample["x_h"],
            sample["m_bg"], c,
        )
        names.append(name)
    if train_count is None:
        train_count = int(round(n_samples * 0.92))
    train_count = max(0, min(train_count, n_samples))
    report = BuildReport(total=n_samples, built=n_samples)
    report.train = names[:train_count]
    report.test = names[train_count:]
    write_manifest(out_dir, resolution, attr_names(), report.train, report.test)
    return report


__all__ = ["BuildReport", "build_photo_dataset", "build_synthetic_dataset", "ToyParams"]
