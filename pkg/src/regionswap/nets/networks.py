"""The ten trainable blocks.

Image tensors are NCHW in [-1, 1]; attribute vectors are (B, A) in [0, 1]
and condition convolutional nets as broadcast constant channels.
Probability heads end in sigmoid, image heads in tanh.
"""
from __future__ import annotations

import math

import torch
from torch import nn

from ..config import ModelConfig
from .blocks import ConvDown, ConvUp, broadcast_attrs, channel_schedule, norm


def _stages(resolution: int) -> int:
    return int(math.log2(resolution // 4))


class ImageEncoder(nn.Module):
    """Region image + attributes -> (mu, log_var) of a Gaussian posterior."""

    def __init__(self, cfg: ModelConfig, z_dim: int):
        super().__init__()
        stages = _stages(cfg.resolution)
        chs = channel_schedule(cfg.width, cfg.max_width, stages)
        self.resolution = cfg.resolution
        self.stem = nn.Sequential(
            nn.Conv2d(3 + cfg.n_attr, chs[0], 3, padding=1),
            norm(chs[0], cfg.groups),
            nn.SiLU(),
        )
        self.down = nn.Sequential(
            *[ConvDown(chs[k], chs[k + 1], cfg.groups) for k in range(stages)]
        )
        flat = chs[-1] * 16
        self.head_mu = nn.Linear(flat, z_dim)
        self.head_log_var = nn.Linear(flat, z_dim)

    def forward(self, x: torch.Tensor, c: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = torch.cat([x, broadcast_attrs(c, self.resolution)], dim=1)
        h = self.down(self.stem(h)).flatten(1)
        return self.head_mu(h), self.head_log_var(h)


class AttrEncoder(nn.Module):
    """Attribute vector -> (mu, log_var)."""

    def __init__(self, cfg: ModelConfig, z_dim: int):
        super().__init__()
        hidden = max(32, 4 * z_dim)
        self.body = nn.Sequential(
            nn.Linear(cfg.n_attr, hidden),
            nn.SiLU(),
            nn.Linear(hidden, hidden),
            nn.SiLU(),
        )
        self.head_mu = nn.Linear(hidden, z_dim)
        self.head_log_var = nn.Linear(hidden, z_dim)

    def forward(self, c: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.body(c)
        return self.head_mu(h), self.head_log_var(h)


class Decoder(nn.Module):
    """Region latents (image latent, attribute latent) -> region image."""

    def __init__(self, cfg: ModelConfig, z_img: int, z_attr: int):
        super().__init__()
        stages = _stages(cfg.resolution)
        chs = channel_schedule(cfg.width, cfg.max_width, stages)[::-1]
        self.top_ch = chs[0]
        self.stem = nn.Linear(z_img + z_attr, self.top_ch * 16)
        self.up = nn.Sequential(
            *[ConvUp(chs[k], chs[k + 1], cfg.groups) for k in range(stages)]
        )
        self.head = nn.Conv2d(chs[-1], 3, 3, padding=1)

    def forward(self, z_img: torch.Tensor, z_attr: torch.Tensor) -> torch.Tensor:
        h = self.stem(torch.cat([z_img, z_attr], dim=1))
        h = h.view(-1, self.top_ch, 4, 4)
        return torch.tanh(self.head(self.up(h)))


class Composer(nn.Module):
    """Four latents -> full image.

    The two face latents are re-injected halfway up so face identity
    survives to the output even though the hair latents dominate the
    low-resolution layout.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        stages = _stages(cfg.resolution)
        chs = channel_schedule(cfg.width, cfg.max_width, stages)[::-1]
        z_total = cfg.z_face + cfg.z_attr_face + cfg.z_hair + cfg.z_attr_hair
        self.top_ch = chs[0]
        self.stem = nn.Linear(z_total, self.top_ch * 16)
        self.mid = stages // 2
        self.pre = nn.Sequential(
            *[ConvUp(chs[k], chs[k + 1], cfg.groups) for k in range(self.mid)]
        )
        mid_ch = chs[self.mid]
        self.face_proj = nn.Linear(cfg.z_face + cfg.z_attr_face, mid_ch)
        self.merge = nn.Sequential(
            nn.Conv2d(2 * mid_ch, mid_ch, 3, padding=1),
            norm(mid_ch, cfg.groups),
            nn.SiLU(),
        )
        self.post = nn.Sequential(
            *[ConvUp(chs[k], chs[k + 1], cfg.groups) for k in range(self.mid, stages)]
        )
        self.head = nn.Conv2d(chs[-1], 3, 3, padding=1)

    def forward(
        self,
        z_xf: torch.Tensor,
        z_cf: torch.Tensor,
        z_xh: torch.Tensor,
        z_ch: torch.Tensor,
    ) -> torch.Tensor:
        h = self.stem(torch.cat([z_xf, z_cf, z_xh, z_ch], dim=1))
        h = self.pre(h.view(-1, self.top_ch, 4, 4))
        face = self.face_proj(torch.cat([z_xf, z_cf], dim=1))
        face = face[:, :, None, None].expand(-1, -1, h.shape[2], h.shape[3])
        h = self.merge(torch.cat([h, face], dim=1))
        return torch.tanh(self.head(self.post(h)))


class GlobalDiscriminator(nn.Module):
    """Whole image -> real probability, shape (B,)."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        stages = _stages(cfg.resolution)
        chs = channel_schedule(cfg.width, cfg.max_width, stages)
        downs: list[nn.Module] = [ConvDown(3, chs[1], cfg.groups, normed=False)]
        downs += [ConvDown(chs[k], chs[k + 1], cfg.groups) for k in range(1, stages)]
        self.down = nn.Sequential(*downs)
        self.head = nn.Linear(chs[-1] * 16, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.down(x).flatten(1)
        return torch.sigmoid(self.head(h)).squeeze(-1)


class PatchDiscriminator(nn.Module):
    """Whole image -> per-patch real probabilities, shape (B, P).

    ``patch_stages`` stride-2 convs shrink the image to a
    (resolution / 2**patch_stages)^2 grid; two stride-1 convs score each
    cell from its local receptive field.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        chs = channel_schedule(cfg.width, cfg.max_width, cfg.patch_stages)
        downs: list[nn.Module] = [ConvDown(3, chs[1], cfg.groups, normed=False)]
        downs += [ConvDown(chs[k], chs[k + 1], cfg.groups) for k in range(1, cfg.patch_stages)]
        self.down = nn.Sequential(*downs)
        self.head = nn.Sequential(
            nn.Conv2d(chs[-1], chs[-1], 3, padding=1),
            norm(chs[-1], cfg.groups),
            nn.SiLU(),
            nn.Conv2d(chs[-1], 1, 3, padding=1),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.head(self.down(x))
        return torch.sigmoid(h).flatten(1)


class Classifier(nn.Module):
    """Whole image -> attribute probabilities, shape (B, A)."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        stages = _stages(cfg.resolution)
        chs = channel_schedule(cfg.width, cfg.max_width, stages)
        downs: list[nn.Module] = [ConvDown(3, chs[1], cfg.groups, normed=False)]
        downs += [ConvDown(chs[k], chs[k + 1], cfg.groups) for k in range(1, stages)]
        self.down = nn.Sequential(*downs)
        self.head = nn.Linear(chs[-1] * 16, cfg.n_attr)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.down(x).flatten(1)
        return torch.sigmoid(self.head(h))
