"""Shared building blocks.

SiLU activations keep every path smooth, which the finite-difference
gradient checks rely on; GroupNorm keeps each sample's statistics
independent of the rest of the batch.
"""
from __future__ import annotations

import torch
from torch import nn


def norm(channels: int, groups: int) -> nn.GroupNorm:
    if channels % groups != 0:
        raise ValueError(f"{channels} channels not divisible into {groups} groups")
    return nn.GroupNorm(groups, channels)


class ConvDown(nn.Module):
    """4x4 stride-2 conv halving the spatial size."""

    def __init__(self, c_in: int, c_out: int, groups: int, normed: bool = True):
        super().__init__()
        layers: list[nn.Module] = [nn.Conv2d(c_in, c_out, 4, stride=2, padding=1)]
        if normed:
            layers.append(norm(c_out, groups))
        layers.append(nn.SiLU())
        self.body = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(x)


class ConvUp(nn.Module):
    """Nearest 2x upsample followed by a 3x3 conv."""

    def __init__(self, c_in: int, c_out: int, groups: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="nearest"),
            nn.Conv2d(c_in, c_out, 3, padding=1),
            norm(c_out, groups),
            nn.SiLU(),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(x)


def broadcast_attrs(c: torch.Tensor, size: int) -> torch.Tensor:
    """(B, A) attribute vector -> (B, A, size, size) constant planes."""
    return c[:, :, None, None].expand(-1, -1, size, size)


def channel_schedule(width: int, max_width: int, stages: int) -> list[int]:
    """Widths after the stem and each downsampling stage."""
    return [min(width * (2 ** k), max_width) for k in range(stages + 1)]
