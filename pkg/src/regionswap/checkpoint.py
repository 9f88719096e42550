"""Checkpoint archive: a deterministic zip of raw tensor blobs.

Layout (all entries stored uncompressed, fixed order, epoch timestamps,
so identical states produce identical bytes):

    meta.json    format name, schema version, step, config, attr names
    index.json   arcname -> {dtype, shape} for every blob
    model/<state_dict key>.bin            little-endian raw tensor data
    opt/<group>/<param index>.step.bin    Adam step counters
    opt/<group>/<param index>.exp_avg.bin
    opt/<group>/<param index>.exp_avg_sq.bin
    rng.bin      torch.Generator state

A schema version mismatch raises instead of guessing.
"""
from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .config import Config, config_from_dict, config_to_dict
from .nets import GROUP_NAMES, RegionModel

FORMAT_NAME = "regionswap-checkpoint"
SCHEMA_VERSION = 1

_DTYPES = {
    torch.float32: "<f4",
    torch.float64: "<f8",
    torch.int64: "<i8",
    torch.uint8: "|u1",
}
_TORCH_DTYPES = {v: k for k, v in _DTYPES.items()}


@dataclass
class TrainState:
    """Everything needed to resume training bit-for-bit."""

    model: RegionModel
    optimizers: dict[str, torch.optim.Adam]
    generator: torch.Generator
    config: Config
    step: int = 0
    attr_names: list[str] = field(default_factory=list)


def make_optimizers(model: RegionModel, cfg: Config) -> dict[str, torch.optim.Adam]:
    """One Adam per block so each group steps on its own objective only."""
    return {
        name: torch.optim.Adam(
            params, lr=cfg.train.lr, betas=(cfg.train.beta1, cfg.train.beta2)
        )
        for name, params in model.param_groups().items()
    }


def _tensor_bytes(t: torch.Tensor) -> tuple[bytes, str, list[int]]:
    t = t.detach().cpu().contiguous()
    code = _DTYPES[t.dtype]
    return t.numpy().astype(code, copy=False).tobytes(), code, list(t.shape)


def _tensor_from(blob: bytes, code: str, shape: list[int]) -> torch.Tensor:
    arr = np.frombuffer(blob, dtype=np.dtype(code)).reshape(shape).copy()
    return torch.from_numpy(arr).to(_TORCH_DTYPES[code])


def save_checkpoint(path: str | Path, state: TrainState) -> None:
    blobs: list[tuple[str, bytes]] = []
    index: dict[str, dict] = {}

    def add(arcname: str, tensor: torch.Tensor) -> None:
        data, code, shape = _tensor_bytes(tensor)
        blobs.append((arcname, data))
        index[arcname] = {"dtype": code, "shape": shape}

    for key, tensor in state.model.state_dict().items():
        add(f"model/{key}.bin", tensor)

    params_by_group = state.model.param_groups()
    for group in GROUP_NAMES:
        adam = state.optimizers[group]
        for i, p in enumerate(params_by_group[group]):
            slot = adam.state.get(p)
            if not slot:
                continue  # group never stepped; nothing to record
            add(f"opt/{group}/{i}.step.bin", torch.as_tensor(slot["step"]))
            add(f"opt/{group}/{i}.exp_avg.bin", slot["exp_avg"])
            add(f"opt/{group}/{i}.exp_avg_sq.bin", slot["exp_avg_sq"])

    add("rng.bin", state.generator.get_state())

    meta = {
        "format": FORMAT_NAME,
        "schema_version": SCHEMA_VERSION,
        "step": state.step,
        "config": config_to_dict(state.config),
        "attr_names": list(state.attr_names),
    }
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
        entries = [
            ("meta.json", json.dumps(meta, sort_keys=True, indent=1).encode()),
            ("index.json", json.dumps(index, sort_keys=True, indent=1).encode()),
            *blobs,
        ]
        for arcname, data in entries:
            info = zipfile.ZipInfo(arcname, date_time=(1980, 1, 1, 0, 0, 0))
            info.external_attr = 0o600 << 16
            zf.writestr(info, data)
    Path(path).write_bytes(buf.getvalue())


def _read_meta(zf: zipfile.ZipFile) -> dict:
    meta = json.loads(zf.read("meta.json"))
    if meta.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} archive")
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(
            f"checkpoint schema {meta.get('schema_version')} unsupported; "
            f"this build reads schema {SCHEMA_VERSION}"
        )
    return meta


def load_checkpoint(path: str | Path) -> TrainState:
    with zipfile.ZipFile(path) as zf:
        meta = _read_meta(zf)
        index = json.loads(zf.read("index.json"))

        def read(arcname: str) -> torch.Tensor:
            entry = index[arcname]
            return _tensor_from(zf.read(arcname), entry["dtype"], entry["shape"])

        cfg = config_from_dict(meta["config"])
        model = RegionModel(cfg.model)
        sd = {
            key: read(f"model/{key}.bin") for key in model.state_dict()
        }
        model.load_state_dict(sd)

        optimizers = make_optimizers(model, cfg)
        params_by_group = model.param_groups()
        for group in GROUP_NAMES:
            adam = optimizers[group]
            for i, p in enumerate(params_by_group[group]):
                arc = f"opt/{group}/{i}.step.bin"
                if arc not in index:
                    continue
                adam.state[p] = {
                    "step": read(arc).reshape(()),
                    "exp_avg": read(f"opt/{group}/{i}.exp_avg.bin"),
                    "exp_avg_sq": read(f"opt/{group}/{i}.exp_avg_sq.bin"),
                }

        generator = torch.Generator()
        generator.set_state(read("rng.bin"))

    return TrainState(
        model=model,
        optimizers=optimizers,
        generator=generator,
        config=cfg,
        step=int(meta["step"]),
        attr_names=list(meta["attr_names"]),
    )


def load_model(path: str | Path) -> tuple[RegionModel, Config, list[str]]:
    """Inference-side load: model in eval mode, no optimizer state."""
    state = load_checkpoint(path)
    state.model.eval()
    for p in state.model.parameters():
        p.requires_grad_(False)
    return state.model, state.config, state.attr_names
