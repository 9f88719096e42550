"""Readers for landmark and attribute annotation files.

Landmark files are plain text: one image per line, the file name followed
by 136 numbers (x0 y0 x1 y1 ... x67 y67). Blank lines and '#' comments
are skipped.

Attribute files follow the common celebrity-faces layout: an optional
first line holding the row count, a header line of attribute names, then
one row per image of +1/-1 flags, which map to 1/0.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import N_LANDMARKS


def read_landmarks(path: str | Path) -> dict[str, np.ndarray]:
    table: dict[str, np.ndarray] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 1 + 2 * N_LANDMARKS:
            raise ValueError(
                f"{path}:{lineno}: expected name + {2 * N_LANDMARKS} numbers, "
                f"got {len(fields)} fields"
            )
        coords = np.array([float(v) for v in fields[1:]], dtype=np.float64)
        table[fields[0]] = coords.reshape(N_LANDMARKS, 2)
    return table


def write_landmarks(path: str | Path, table: dict[str, np.ndarray]) -> None:
    lines = []
    for name in sorted(table):
        flat = np.asarray(table[name], dtype=np.float64).reshape(-1)
        lines.append(name + " " + " ".join(f"{v:.3f}" for v in flat))
    Path(path).write_text("\n".join(lines) + "\n")


def read_attributes(path: str | Path) -> tuple[list[str], dict[str, np.ndarray]]:
    lines = [l for l in Path(path).read_text().splitlines() if l.strip()]
    start = 0
    if len(lines[0].split()) == 1 and lines[0].strip().isdigit():
        start = 1  # row-count preamble
    names = lines[start].split()
    table: dict[str, np.ndarray] = {}
    for raw in lines[start + 1 :]:
        fields = raw.split()
        if len(fields) != 1 + len(names):
            raise ValueError(f"attribute row has {len(fields)} fields, expected {1 + len(names)}")
        flags = np.array([1.0 if float(v) > 0 else 0.0 for v in fields[1:]], dtype=np.float32)
        table[fields[0]] = flags
    return names, table
