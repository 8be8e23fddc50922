"""Data-driven inverse optimization: losses, risk measures and estimators."""

from .distance import delta_net, distance_p, estimate_distance, estimate_var
from .estimators import estimate_aso, estimate_kkt, estimate_rso, estimate_vi
from .losses import (
    LossSpec,
    RiskSpec,
    aggregate_risk,
    distance_to_optimal_set,
    eval_loss,
    kkt_residual,
    optimal_face,
)

__all__ = [
    "LossSpec",
    "RiskSpec",
    "aggregate_risk",
    "delta_net",
    "distance_p",
    "distance_to_optimal_set",
    "estimate_aso",
    "estimate_distance",
    "estimate_kkt",
    "estimate_rso",
    "estimate_var",
    "estimate_vi",
    "eval_loss",
    "kkt_residual",
    "optimal_face",
]
