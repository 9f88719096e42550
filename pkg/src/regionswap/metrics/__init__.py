from .distance import ExternalEmbedder, ProbeEmbedder, abs_error, identity_distance
from .harness import MetricReport, Welford, run_benchmark, swap_twice
from .msssim import MsssimResult, msssim

__all__ = [
    "ExternalEmbedder",
    "ProbeEmbedder",
    "abs_error",
    "identity_distance",
    "MetricReport",
    "Welford",
    "run_benchmark",
    "swap_twice",
    "MsssimResult",
    "msssim",
]
