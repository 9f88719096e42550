"""Configuration dataclasses and TOML round-trip.

A full configuration is three flat tables: [model] for network shapes,
[loss] for objective weights, [train] for the optimization schedule.
Presets shipped with the package live under ``regionswap/presets``.
"""
from __future__ import annotations

import dataclasses
import importlib.resources
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib


@dataclass
class ModelConfig:
    """Shapes of the ten network blocks.

    ``resolution`` must be a power of two, at least 16. Latent sizes are
    free choices; the defaults scale down for the synthetic experiment via
    presets. ``patch_stages`` is the number of stride-2 convolutions in the
    patch discriminator, so its score grid is (resolution/2**patch_stages)^2.
    """

    resolution: int = 128
    n_attr: int = 40
    z_face: int = 256
    z_hair: int = 256
    z_attr_face: int = 64
    z_attr_hair: int = 64
    width: int = 64
    max_width: int = 256
    patch_stages: int = 3
    groups: int = 4

    def __post_init__(self) -> None:
        s = self.resolution
        if s < 16 or (s & (s - 1)) != 0:
            raise ValueError(f"resolution must be a power of two >= 16, got {s}")
        if self.n_attr < 1:
            raise ValueError("n_attr must be positive")
        if self.width % self.groups != 0:
            raise ValueError("width must be divisible by groups")
        if 2 ** self.patch_stages >= s:
            raise ValueError("patch_stages too deep for resolution")

    @property
    def patch_grid(self) -> int:
        """Side length of the patch discriminator score grid."""
        return self.resolution // (2 ** self.patch_stages)


@dataclass
class LossWeights:
    """Objective weights and the two scalar loss constants.

    ``beta`` down-weights background pixels in the masked reconstruction
    terms; ``eps`` clamps probabilities before every log.
    """

    rec: float = 4000.0
    kl: float = 1.0
    adv_g: float = 20.0
    adv_p: float = 30.0
    cls: float = 1.0
    gc: float = 50.0
    beta: float = 0.5
    eps: float = 1e-7


@dataclass
class TrainConfig:
    """Optimization schedule. One Adam instance per network block."""

    steps: int = 300_000
    batch_size: int = 50
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    seed: int = 0
    kl_standard: bool = False
    clip_norm: float = 0.0  # per-block gradient norm cap; 0 disables
    log_every: int = 100
    checkpoint_every: int = 5000

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must be in [0, 1)")
        if self.clip_norm < 0:
            raise ValueError("clip_norm must be non-negative")
        if self.log_every < 1 or self.checkpoint_every < 1:
            raise ValueError("log_every and checkpoint_every must be positive")


@dataclass
class Config:
    model: ModelConfig = field(default_factory=ModelConfig)
    loss: LossWeights = field(default_factory=LossWeights)
    train: TrainConfig = field(default_factory=TrainConfig)


_SECTIONS = {"model": ModelConfig, "loss": LossWeights, "train": TrainConfig}


def _build_section(cls: type, table: dict[str, Any], name: str) -> Any:
    known = {f.name: f.type for f in fields(cls)}
    unknown = set(table) - set(known)
    if unknown:
        raise ValueError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return cls(**table)


def config_from_dict(data: dict[str, Any]) -> Config:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    parts = {
        name: _build_section(cls, data.get(name, {}), name)
        for name, cls in _SECTIONS.items()
    }
    return Config(**parts)


def config_to_dict(cfg: Config) -> dict[str, Any]:
    return {name: dataclasses.asdict(getattr(cfg, name)) for name in _SECTIONS}


def load_config(path: str | Path) -> Config:
    with open(path, "rb") as fh:
        return config_from_dict(tomllib.load(fh))


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = repr(value)
        return text if any(c in text for c in ".eE") else text + ".0"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"unsupported TOML value: {value!r}")


def dump_config(cfg: Config) -> str:
    """Serialize to TOML. Only flat tables of scalars are needed here."""
    lines: list[str] = []
    for name, table in config_to_dict(cfg).items():
        lines.append(f"[{name}]")
        for key, value in table.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def preset_names() -> list[str]:
    root = importlib.resources.files("regionswap") / "presets"
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))


def load_preset(name: str) -> Config:
    root = importlib.resources.files("regionswap") / "presets"
    res = root / f"{name}.toml"
    if not res.is_file():
        raise FileNotFoundError(f"no preset named {name!r}; available: {preset_names()}")
    return config_from_dict(tomllib.loads(res.read_text()))
