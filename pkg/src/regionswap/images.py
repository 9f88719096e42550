"""Image IO and range conversion.

Arrays are float32 HWC RGB in [0, 1] at the package boundary; the model
consumes CHW tensors in [-1, 1]. PNG encoding is kept byte-stable: 8-bit
RGB, no interlacing, default zlib settings, no ancillary chunks.
"""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import torch
from PIL import Image


def to_unit(img_u8: np.ndarray) -> np.ndarray:
    return (img_u8.astype(np.float32)) / 255.0


def to_u8(img01: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.asarray(img01) * 255.0), 0, 255).astype(np.uint8)


def unit_to_model(img01: torch.Tensor | np.ndarray) -> torch.Tensor:
    """[0,1] HWC (or batched NHWC) array -> [-1,1] CHW (NCHW) float tensor."""
    t = torch.as_tensor(np.asarray(img01), dtype=torch.float32)
    t = t.movedim(-1, -3)
    return t * 2.0 - 1.0


def model_to_unit(t: torch.Tensor) -> np.ndarray:
    """[-1,1] CHW (NCHW) tensor -> [0,1] HWC (NHWC) float32 array."""
    arr = t.detach().movedim(-3, -1).clamp(-1.0, 1.0).cpu().numpy()
    return ((arr + 1.0) * 0.5).astype(np.float32)


def load_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return to_unit(np.asarray(im.convert("RGB")))


def png_bytes(img01: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(to_u8(img01), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_png(img01: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(png_bytes(img01))


def decode_image(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        return to_unit(np.asarray(im.convert("RGB")))


def resize_image(img01: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resize of an HWC [0,1] image to size x size."""
    if img01.shape[0] == size and img01.shape[1] == size:
        return img01.astype(np.float32)
    t = torch.as_tensor(img01, dtype=torch.float32).movedim(-1, -3).unsqueeze(0)
    out = torch.nn.functional.interpolate(
        t, size=(size, size), mode="bilinear", align_corners=False
    )
    return out.squeeze(0).movedim(0, -1).clamp(0.0, 1.0).numpy()


def resize_mask(mask: np.ndarray, size: int) -> np.ndarray:
    """Nearest resize of an HW {0,1} mask, re-thresholded at 0.5."""
    if mask.shape[0] == size and mask.shape[1] == size:
        return (mask > 0.5).astype(np.float32)
    t = torch.as_tensor(mask, dtype=torch.float32).unsqueeze(0).unsqueeze(0)
    out = torch.nn.functional.interpolate(t, size=(size, size), mode="nearest")
    return (out.squeeze(0).squeeze(0).numpy() > 0.5).astype(np.float32)
