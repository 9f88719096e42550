from .model import GROUP_NAMES, RegionModel, reparameterize

__all__ = ["GROUP_NAMES", "RegionModel", "reparameterize"]
