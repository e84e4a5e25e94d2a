"""Leakage of quantum embeddings of classical two-party primitives."""

__version__ = "0.1.0"

from .embeddings import build_regular, canonical, leakage_general, leakage_regular  # noqa: E402
from .optimize import OptimizerConfig, minimize_leakage  # noqa: E402
from .probdist import JointDistribution  # noqa: E402

__all__ = [
    "JointDistribution",
    "OptimizerConfig",
    "build_regular",
    "canonical",
    "leakage_general",
    "leakage_regular",
    "minimize_leakage",
]
