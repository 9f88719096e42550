"""Swap-consistency benchmark.

For each sampled pair (x1, x2) the faces are swapped both ways, then
swapped back:

    y1 = swapper(x2, x1)      x1's context with x2's face
    y2 = swapper(x1, x2)      x2's context with x1's face
    x1'' = swapper(y2, y1)    both swaps undone
    x2'' = swapper(y1, y2)

A swapper that returns its target unchanged, and one that returns its
source, both make the round trip exact. Reported columns follow the
identity / absolute-error / multi-scale-similarity layout with Avg. and
Std. rows.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distance import abs_error, identity_distance
from .msssim import msssim

Swapper = Callable[[np.ndarray, np.ndarray], np.ndarray]

METRIC_KEYS = ("id_swap", "abs_recon", "abs_swap2", "msssim_recon", "msssim_swap2")
METRIC_LABELS = {
    "id_swap": ("{embedder}", "Swap"),
    "abs_recon": ("Abs. Errors", "Recon."),
    "abs_swap2": ("Abs. Errors", "Swap x2"),
    "msssim_recon": ("MS-SSIM", "Recon."),
    "msssim_swap2": ("MS-SSIM", "Swap x2"),
}


class Welford:
    """Streaming mean and (population) standard deviation with merging."""

    def __init__(self) -> None:
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (value - self.mean)

    def merge(self, other: "Welford") -> "Welford":
        merged = Welford()
        merged.count = self.count + other.count
        if merged.count == 0:
            return merged
        delta = other.mean - self.mean
        merged.mean = self.mean + delta * other.count / merged.count
        merged._m2 = self._m2 + other._m2 + delta * delta * self.count * other.count / merged.count
        return merged

    @property
    def std(self) -> float:
        if self.count == 0:
            return float("nan")
        return math.sqrt(self._m2 / self.count)


def swap_twice(swapper: Swapper, x1: np.ndarray, x2: np.ndarray) -> dict[str, np.ndarray]:
    y1 = swapper(x2, x1)
    y2 = swapper(x1, x2)
    return {
        "y1": y1,
        "y2": y2,
        "x1_back": swapper(y2, y1),
        "x2_back": swapper(y1, y2),
    }


@dataclass
class MetricReport:
    method: str
    embedder: str
    n_pairs: int
    msssim_levels: int
    msssim_weights: tuple[float, ...] = ()
    skipped: int = 0
    values: dict[str, list[float]] = field(default_factory=dict)

    def stats(self, key: str) -> tuple[float, float]:
        acc = Welford()
        for v in self.values[key]:
            acc.add(v)
        return acc.mean, acc.std

    def median(self, key: str) -> float:
        return float(np.median(self.values[key]))

    def to_json(self) -> str:
        doc = {
            "method": self.method,
            "embedder": self.embedder,
            "n_pairs": self.n_pairs,
            "msssim_levels": self.msssim_levels,
            "msssim_weights": list(self.msssim_weights),
            "skipped": self.skipped,
            "metrics": {},
        }
        for key in METRIC_KEYS:
            avg, std = self.stats(key)
            doc["metrics"][key] = {
                "avg": avg, "std": std, "median": self.median(key),
                "values": self.values[key],
            }
        return json.dumps(doc, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["pair", *METRIC_KEYS])
        for i in range(self.n_pairs):
            writer.writerow([i, *(f"{self.values[k][i]:.6f}" for k in METRIC_KEYS)])
        return buf.getvalue()

    def to_text(self) -> str:
        groups: list[str] = []
        subs: list[str] = []
        for key in METRIC_KEYS:
            group, sub = METRIC_LABELS[key]
            groups.append(group.format(embedder=self.embedder))
            subs.append(sub)
        header_top = ["", ""]
        header_sub = ["", ""]
        previous = None
        for group, sub in zip(groups, subs):
            header_top.append("" if group == previous else group)
            previous = group
            header_sub.append(sub)
        avg_row = [self.method, "Avg."]
        std_row = ["", "Std."]
        for key in METRIC_KEYS:
            avg, std = self.stats(key)
            avg_row.append(f"{avg:.3f}")
            std_row.append(f"{std:.3f}")
        rows = [header_top, header_sub, avg_row, std_row]
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = [
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
            for row in rows
        ]
        lines.append(
            f"({self.n_pairs} pairs, {self.skipped} skipped, "
            f"{self.msssim_levels} similarity scales)"
        )
        return "\n".join(lines)


def run_benchmark(
    swapper: Swapper,
    reconstructor: Callable[[np.ndarray], np.ndarray],
    embedder: Callable[[np.ndarray], np.ndarray],
    images: Sequence[np.ndarray],
    n_pairs: int,
    seed: int = 0,
    method: str = "model",
) -> MetricReport:
    """Evaluate over random image pairs drawn from a held-out set.

    A pair whose swap or embedding raises is skipped and counted, not
    fatal; the report's ``n_pairs`` is the number actually evaluated.
    """
    if n_pairs < 1:
        raise ValueError("need at least one pair")
    if len(images) < 2:
        raise ValueError("need at least two images to form pairs")
    if n_pairs > len(images) * (len(images) - 1):
        raise ValueError("more pairs requested than distinct ordered pairs available")
    rng = np.random.default_rng(seed)
    values: dict[str, list[float]] = {key: [] for key in METRIC_KEYS}
    levels = 0
    weights: tuple[float, ...] = ()
    skipped = 0
    for _ in range(n_pairs):
        i, j = rng.choice(len(images), size=2, replace=False)
        x1, x2 = images[int(i)], images[int(j)]
        try:
            swapped = swap_twice(swapper, x1, x2)
            recon = reconstructor(x1)
            id_dist = identity_distance(embedder(x1), embedder(swapped["y2"]))
        except Exception:
            skipped += 1
            continue
        values["id_swap"].append(id_dist)
        values["abs_recon"].append(abs_error(x1, recon))
        values["abs_swap2"].append(abs_error(x1, swapped["x1_back"]))
        recon_score = msssim(x1, recon)
        values["msssim_recon"].append(recon_score.value)
        values["msssim_swap2"].append(msssim(x1, swapped["x1_back"]).value)
        levels, weights = recon_score.levels, recon_score.weights
    embedder_name = getattr(embedder, "name", embedder.__class__.__name__)
    return MetricReport(
        method=method, embedder=embedder_name, n_pairs=len(values["id_swap"]),
        msssim_levels=levels, msssim_weights=weights, skipped=skipped, values=values,
    )
