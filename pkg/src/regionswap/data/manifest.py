"""On-disk dataset directory.

    <root>/manifest.json      format marker, resolution, attribute names,
                              ordered train and test sample lists
    <root>/samples/<name>.npz x, x_f, x_h as (S, S, 3) uint8; m_bg as
                              (S, S) uint8; c as float32

Images are stored in display range and converted to model range when
batched. Sample loading is a pure function of the name, so training runs
that replay the same indices read identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from ..images import to_u8, to_unit, unit_to_model
from .dataset import Batch

DATASET_FORMAT = "regionswap-dataset"
DATASET_VERSION = 1


def write_manifest(
    root: str | Path, resolution: int, attr_names: list[str],
    train: list[str], test: list[str],
) -> None:
    doc = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "resolution": resolution,
        "attr_names": list(attr_names),
        "train": list(train),
        "test": list(test),
    }
    Path(root, "manifest.json").write_text(json.dumps(doc, indent=1))


def write_sample(
    root: str | Path, name: str, x: np.ndarray, x_f: np.ndarray,
    x_h: np.ndarray, m_bg: np.ndarray, c: np.ndarray,
) -> None:
    samples = Path(root, "samples")
    samples.mkdir(parents=True, exist_ok=True)
    np.savez(
        samples / f"{name}.npz",
        x=to_u8(x), x_f=to_u8(x_f), x_h=to_u8(x_h),
        m_bg=(np.asarray(m_bg) > 0.5).astype(np.uint8),
        c=np.asarray(c, dtype=np.float32),
    )


def read_manifest(root: str | Path) -> dict:
    doc = json.loads(Path(root, "manifest.json").read_text())
    if doc.get("format") != DATASET_FORMAT:
        raise ValueError(f"{root} is not a {DATASET_FORMAT} directory")
    if doc.get("version") != DATASET_VERSION:
        raise ValueError(f"dataset version {doc.get('version')} unsupported")
    return doc


class DiskDataset:
    """Lazy reader over a dataset directory split."""

    def __init__(self, root: str | Path, split: str = "train"):
        self.root = Path(root)
        doc = read_manifest(self.root)
        if split not in ("train", "test"):
            raise ValueError("split must be 'train' or 'test'")
        self.names: list[str] = doc[split]
        self.attr_names: list[str] = doc["attr_names"]
        self.resolution: int = doc["resolution"]

    def __len__(self) -> int:
        return len(self.names)

    @property
    def n_attr(self) -> int:
        return len(self.attr_names)

    def load(self, name: str) -> dict[str, np.ndarray]:
        with np.load(self.root / "samples" / f"{name}.npz") as z:
            return {key: z[key] for key in z.files}

    def batch(self, idx: torch.Tensor) -> Batch:
        xs, xfs, xhs, mbgs, cs = [], [], [], [], []
        for i in idx.tolist():
            raw = self.load(self.names[i])
            xs.append(unit_to_model(to_unit(raw["x"])))
            xfs.append(unit_to_model(to_unit(raw["x_f"])))
            xhs.append(unit_to_model(to_unit(raw["x_h"])))
            mbgs.append(torch.from_numpy(raw["m_bg"].astype(np.float32)).unsqueeze(0))
            cs.append(torch.from_numpy(raw["c"]))
        return Batch(
            x=torch.stack(xs), x_f=torch.stack(xfs), x_h=torch.stack(xhs),
            m_bg=torch.stack(mbgs), c=torch.stack(cs),
        )
