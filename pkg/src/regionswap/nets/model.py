"""Container tying the ten blocks together."""
from __future__ import annotations

import torch
from torch import nn

from ..config import ModelConfig
from .networks import (
    AttrEncoder,
    Classifier,
    Composer,
    Decoder,
    GlobalDiscriminator,
    ImageEncoder,
    PatchDiscriminator,
)

GROUP_NAMES = (
    "enc_xf",
    "enc_xh",
    "enc_cf",
    "enc_ch",
    "dec_f",
    "dec_h",
    "composer",
    "disc_g",
    "disc_p",
    "classifier",
)


def reparameterize(
    mu: torch.Tensor, log_var: torch.Tensor, generator: torch.Generator | None = None
) -> torch.Tensor:
    """z = mu + eps * exp(log_var / 2) with eps ~ N(0, I)."""
    eps = torch.randn(mu.shape, generator=generator, dtype=mu.dtype, device=mu.device)
    return mu + eps * torch.exp(0.5 * log_var)


class RegionModel(nn.Module):
    """Four encoders, two decoders, composer, two discriminators, classifier."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.enc_xf = ImageEncoder(cfg, cfg.z_face)
        self.enc_xh = ImageEncoder(cfg, cfg.z_hair)
        self.enc_cf = AttrEncoder(cfg, cfg.z_attr_face)
        self.enc_ch = AttrEncoder(cfg, cfg.z_attr_hair)
        self.dec_f = Decoder(cfg, cfg.z_face, cfg.z_attr_face)
        self.dec_h = Decoder(cfg, cfg.z_hair, cfg.z_attr_hair)
        self.composer = Composer(cfg)
        self.disc_g = GlobalDiscriminator(cfg)
        self.disc_p = PatchDiscriminator(cfg)
        self.classifier = Classifier(cfg)

    def param_groups(self) -> dict[str, list[nn.Parameter]]:
        return {name: list(getattr(self, name).parameters()) for name in GROUP_NAMES}

    def encode(
        self, x_f: torch.Tensor, x_h: torch.Tensor, c: torch.Tensor
    ) -> dict[str, tuple[torch.Tensor, torch.Tensor]]:
        """Posterior (mu, log_var) for each of the four latents."""
        return {
            "xf": self.enc_xf(x_f, c),
            "xh": self.enc_xh(x_h, c),
            "cf": self.enc_cf(c),
            "ch": self.enc_ch(c),
        }

    def compose(
        self,
        z_xf: torch.Tensor,
        z_cf: torch.Tensor,
        z_xh: torch.Tensor,
        z_ch: torch.Tensor,
    ) -> torch.Tensor:
        return self.composer(z_xf, z_cf, z_xh, z_ch)

    def classify(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(x)

    @property
    def latent_dims(self) -> dict[str, int]:
        return {
            "xf": self.cfg.z_face,
            "cf": self.cfg.z_attr_face,
            "xh": self.cfg.z_hair,
            "ch": self.cfg.z_attr_hair,
        }
