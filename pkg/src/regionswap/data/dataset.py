"""Training batches and the in-memory dataset container."""
from __future__ import annotations

from dataclasses import dataclass

import torch


@dataclass
class Batch:
    """One training batch, everything in model ranges.

    ``x`` full image, ``x_f`` face region on black, ``x_h`` image with the
    face region blanked, all (B, 3, S, S) in [-1, 1]; ``m_bg`` (B, 1, S, S)
    background mask (1 = background); ``c`` (B, A) attribute targets in
    [0, 1].
    """

    x: torch.Tensor
    x_f: torch.Tensor
    x_h: torch.Tensor
    m_bg: torch.Tensor
    c: torch.Tensor

    def to(self, device: torch.device | str) -> "Batch":
        return Batch(*(t.to(device) for t in (self.x, self.x_f, self.x_h, self.m_bg, self.c)))


class TensorDataset:
    """All samples resident in memory; indexing is pure, so resumed runs
    that replay the same indices see the same bytes."""

    def __init__(
        self,
        x: torch.Tensor,
        x_f: torch.Tensor,
        x_h: torch.Tensor,
        m_bg: torch.Tensor,
        c: torch.Tensor,
        attr_names: list[str],
    ):
        n = x.shape[0]
        for t in (x_f, x_h, m_bg, c):
            if t.shape[0] != n:
                raise ValueError("all tensors must share the sample dimension")
        self.x, self.x_f, self.x_h, self.m_bg, self.c = x, x_f, x_h, m_bg, c
        self.attr_names = list(attr_names)
        if c.shape[1] != len(self.attr_names):
            raise ValueError("attr_names must match the attribute dimension")

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def n_attr(self) -> int:
        return self.c.shape[1]

    def batch(self, idx: torch.Tensor) -> Batch:
        return Batch(
            x=self.x[idx], x_f=self.x_f[idx], x_h=self.x_h[idx],
            m_bg=self.m_bg[idx], c=self.c[idx],
        )
