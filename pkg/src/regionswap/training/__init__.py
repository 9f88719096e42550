import torch

from ..checkpoint import TrainState, make_optimizers
from ..config import Config
from ..nets import RegionModel
from .trainer import Trainer

__all__ = ["Trainer", "initialize", "TrainState"]


def initialize(config: Config, attr_names: list[str]) -> TrainState:
    """Fresh training state; both weight init and the run RNG derive from
    the configured seed."""
    if len(attr_names) != config.model.n_attr:
        raise ValueError("attr_names must match model.n_attr")
    torch.manual_seed(config.train.seed)
    model = RegionModel(config.model)
    generator = torch.Generator().manual_seed(config.train.seed)
    return TrainState(
        model=model,
        optimizers=make_optimizers(model, config),
        generator=generator,
        config=config,
        attr_names=list(attr_names),
    )
