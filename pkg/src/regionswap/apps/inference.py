"""Inference: encoding, swapping, editing, sampling, interpolation.

Encoders are deterministic at inference time: latents are the posterior
means, never samples. All public image interfaces use [0, 1] HWC arrays
at the model resolution; raw context images are split into face and hair
regions by a configurable splitter when explicit regions are unavailable.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..checkpoint import load_model
from ..config import Config
from ..data.geometry import face_window_in_hair_frame
from ..images import model_to_unit, unit_to_model
from ..nets import RegionModel
from .blending import poisson_composite

LATENT_KEYS = ("xf", "cf", "xh", "ch")


@dataclass
class Codes:
    """Latent means for one image plus its estimated attributes."""

    z: dict[str, torch.Tensor]
    c_star: torch.Tensor

    def to_json(self) -> dict:
        out = {f"z_{key}": self.z[key].squeeze(0).tolist() for key in LATENT_KEYS}
        out["c_star"] = self.c_star.squeeze(0).tolist()
        return out

    @staticmethod
    def from_json(doc: dict) -> "Codes":
        z = {
            key: torch.tensor(doc[f"z_{key}"], dtype=torch.float32).unsqueeze(0)
            for key in LATENT_KEYS
        }
        c_star = torch.tensor(doc["c_star"], dtype=torch.float32).unsqueeze(0)
        return Codes(z=z, c_star=c_star)


def _disk_mask(resolution: int, radius_frac: float = 9.0 / 32.0) -> np.ndarray:
    yy, xx = np.mgrid[0:resolution, 0:resolution].astype(np.float64) + 0.5
    center = resolution / 2.0
    r2 = (yy - center) ** 2 + (xx - center) ** 2
    return ((r2 <= (radius_frac * resolution) ** 2)).astype(np.float32)


def _window_mask(resolution: int) -> np.ndarray:
    left, top, side = face_window_in_hair_frame(resolution)
    mask = np.zeros((resolution, resolution), dtype=np.float32)
    li, ti = int(round(left)), int(round(top))
    si = int(round(side))
    mask[ti : ti + si, li : li + si] = 1.0
    return mask


class Engine:
    """Read-only wrapper around a trained model; safe to share across
    threads (every entry point is pure given its inputs)."""

    def __init__(
        self,
        model: RegionModel,
        config: Config,
        attr_names: list[str],
        splitter: str = "auto",
    ):
        self.model = model.eval()
        self.config = config
        self.attr_names = list(attr_names)
        if splitter == "auto":
            toyish = all(n.startswith(("face_hue_", "hair_hue_")) for n in attr_names)
            splitter = "disk" if toyish else "window"
        if splitter not in ("disk", "window"):
            raise ValueError(f"unknown splitter {splitter!r}")
        self.splitter = splitter

    @classmethod
    def from_checkpoint(cls, path: str | Path, splitter: str = "auto") -> "Engine":
        model, config, attr_names = load_model(path)
        return cls(model, config, attr_names, splitter=splitter)

    @property
    def resolution(self) -> int:
        return self.config.model.resolution

    # -- region splitting ------------------------------------------------

    def face_region_mask(self) -> np.ndarray:
        if self.splitter == "disk":
            return _disk_mask(self.resolution)
        return _window_mask(self.resolution)

    def split_regions(self, x01: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Context image -> (x_f, x_h) estimates when explicit regions are
        not available. The disk splitter keeps the face in place; the
        window splitter magnifies the face box the way the dataset does."""
        s = self.resolution
        if x01.shape != (s, s, 3):
            raise ValueError(f"expected ({s}, {s}, 3) image, got {x01.shape}")
        mask = self.face_region_mask()
        x_h = x01 * (1.0 - mask)[..., None]
        if self.splitter == "disk":
            x_f = x01 * mask[..., None]
        else:
            from ..images import resize_image

            left, top, side = face_window_in_hair_frame(self.resolution)
            li, ti, si = int(round(left)), int(round(top)), int(round(side))
            x_f = resize_image(x01[ti : ti + si, li : li + si], self.resolution)
        return x_f.astype(np.float32), x_h.astype(np.float32)

    # -- encoding ---------------------------------------------------------

    def _check(self, img01: np.ndarray) -> torch.Tensor:
        s = self.resolution
        if img01.shape != (s, s, 3):
            raise ValueError(f"expected ({s}, {s}, 3) image, got {img01.shape}")
        return unit_to_model(img01).unsqueeze(0)

    @torch.no_grad()
    def estimate_attributes(self, x01: np.ndarray) -> np.ndarray:
        probs = self.model.classify(self._check(x01))
        return probs.squeeze(0).numpy()

    @torch.no_grad()
    def encode_regions(
        self, x01: np.ndarray, x_f01: np.ndarray, x_h01: np.ndarray
    ) -> Codes:
        c_star = self.model.classify(self._check(x01))
        posteriors = self.model.encode(self._check(x_f01), self._check(x_h01), c_star)
        z = {key: mu for key, (mu, _) in posteriors.items()}
        return Codes(z=z, c_star=c_star)

    def encode(self, x01: np.ndarray) -> Codes:
        x_f, x_h = self.split_regions(x01)
        return self.encode_regions(x01, x_f, x_h)

    def encode_sample(self, sample: dict[str, np.ndarray]) -> Codes:
        return self.encode_regions(sample["x"], sample["x_f"], sample["x_h"])

    # -- generation --------------------------------------------------------

    @torch.no_grad()
    def compose(self, z: dict[str, torch.Tensor]) -> np.ndarray:
        img = self.model.compose(z["xf"], z["cf"], z["xh"], z["ch"])
        return model_to_unit(img.squeeze(0))

    def reconstruct(self, x01: np.ndarray) -> np.ndarray:
        return self.compose(self.encode(x01).z)

    def reconstruct_sample(self, sample: dict[str, np.ndarray]) -> np.ndarray:
        return self.compose(self.encode_sample(sample).z)

    def swap_codes(self, source: Codes, target: Codes) -> dict[str, torch.Tensor]:
        return {
            "xf": source.z["xf"], "cf": source.z["cf"],
            "xh": target.z["xh"], "ch": target.z["ch"],
        }

    def swap(self, source01: np.ndarray, target01: np.ndarray) -> np.ndarray:
        """Source's face in the target's hair and background."""
        return self.compose(self.swap_codes(self.encode(source01), self.encode(target01)))

    def swap_samples(self, source: dict, target: dict) -> np.ndarray:
        return self.compose(
            self.swap_codes(self.encode_sample(source), self.encode_sample(target))
        )

    def swap_gd(
        self,
        source01: np.ndarray,
        target01: np.ndarray,
        mask: np.ndarray | None = None,
    ) -> np.ndarray:
        """Swap, then composite the swapped face region into the target in
        the gradient domain, so everything outside the mask is the target
        photograph itself."""
        swapped = self.swap(source01, target01)
        if mask is None:
            mask = self.face_region_mask()
        out = poisson_composite(swapped.astype(np.float64), target01.astype(np.float64), mask)
        return np.clip(out, 0.0, 1.0).astype(np.float32)

    def edit(
        self, x01: np.ndarray, updates: dict[str, float], region: str = "both"
    ) -> np.ndarray:
        """Re-render with chosen attribute entries overridden in [0, 1];
        appearance latents stay fixed, attribute latents are re-encoded
        for the chosen region (face, hair or both)."""
        if region not in ("face", "hair", "both"):
            raise ValueError("region must be 'face', 'hair' or 'both'")
        unknown = set(updates) - set(self.attr_names)
        if unknown:
            raise ValueError(f"unknown attributes: {sorted(unknown)}")
        codes = self.encode(x01)
        c_edit = codes.c_star.clone()
        for name, value in updates.items():
            if not 0.0 <= float(value) <= 1.0:
                raise ValueError(f"attribute {name} must be in [0, 1]")
            c_edit[0, self.attr_names.index(name)] = float(value)
        z = dict(codes.z)
        with torch.no_grad():
            if region in ("face", "both"):
                z["cf"], _ = self.model.enc_cf(c_edit)
            if region in ("hair", "both"):
                z["ch"], _ = self.model.enc_ch(c_edit)
        return self.compose(z)

    def sample_parts(
        self,
        n: int,
        seed: int,
        vary: str = "both",
        base01: np.ndarray | None = None,
    ) -> list[np.ndarray]:
        """Draw latents from the prior for the varied parts; the rest come
        from the base image (or the prior too when no base is given)."""
        if vary not in ("face", "hair", "both"):
            raise ValueError("vary must be 'face', 'hair' or 'both'")
        gen = torch.Generator().manual_seed(seed)
        base = self.encode(base01).z if base01 is not None else None
        dims = self.model.latent_dims
        outputs = []
        varied = {
            "face": ("xf", "cf"), "hair": ("xh", "ch"), "both": LATENT_KEYS,
        }[vary]
        for _ in range(n):
            z = {}
            for key in LATENT_KEYS:
                if key in varied or base is None:
                    z[key] = torch.randn(1, dims[key], generator=gen)
                else:
                    z[key] = base[key]
            outputs.append(self.compose(z))
        return outputs

    def interpolate_at(
        self, a01: np.ndarray, b01: np.ndarray, t: float, vary: str = "both"
    ) -> np.ndarray:
        """One point on the latent line from a (t=0) to b (t=1); un-varied
        parts stay at a's latents."""
        if not 0.0 <= t <= 1.0:
            raise ValueError("t must be in [0, 1]")
        if vary not in ("face", "hair", "both"):
            raise ValueError("vary must be 'face', 'hair' or 'both'")
        za, zb = self.encode(a01).z, self.encode(b01).z
        varied = {
            "face": ("xf", "cf"), "hair": ("xh", "ch"), "both": LATENT_KEYS,
        }[vary]
        z = {
            key: (1.0 - t) * za[key] + t * zb[key] if key in varied else za[key]
            for key in LATENT_KEYS
        }
        return self.compose(z)

    def interpolate(
        self, a01: np.ndarray, b01: np.ndarray, steps: int, vary: str = "both"
    ) -> list[np.ndarray]:
        """Latent-space walk from a to b inclusive."""
        if steps < 2:
            raise ValueError("need at least two steps")
        return [
            self.interpolate_at(a01, b01, i / (steps - 1), vary) for i in range(steps)
        ]
