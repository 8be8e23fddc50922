"""Inverse optimization: recover optimization-model parameters from observed decisions."""

__version__ = "0.1.0"

from . import classical, datadriven, model, online, oracles, solve  # noqa: E402
from .model import (  # noqa: E402
    ConvexForwardModel,
    Dataset,
    EstimationResult,
    LinearForwardModel,
    Observation,
    ParameterSpace,
)
from .solve import solve_forward  # noqa: E402

__all__ = [
    "ConvexForwardModel",
    "Dataset",
    "EstimationResult",
    "LinearForwardModel",
    "Observation",
    "ParameterSpace",
    "__version__",
    "classical",
    "datadriven",
    "model",
    "online",
    "oracles",
    "solve",
    "solve_forward",
]
