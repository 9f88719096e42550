"""Region-separative face image model.

Face and hair regions of a photograph are encoded into separate latent
spaces by four variational encoders; a composer network renders any
combination of the latents back into a full image. This enables face
swapping, attribute editing, random parts synthesis and latent
interpolation from a single trained model.
"""
from .config import Config, LossWeights, ModelConfig, TrainConfig, load_config, load_preset
from .nets import GROUP_NAMES, RegionModel, reparameterize

__all__ = [
    "Config",
    "LossWeights",
    "ModelConfig",
    "TrainConfig",
    "load_config",
    "load_preset",
    "GROUP_NAMES",
    "RegionModel",
    "reparameterize",
]

__version__ = "0.1.0"
