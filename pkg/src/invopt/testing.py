"""Brute-force oracles for verifying estimators (re-exported from :mod:`invopt.oracles`)."""

from .oracles import (
    brute_force_optimal_set,
    enumerate_vertices,
    extreme_rays,
    grid_min_loss,
    grid_points,
    integer_points,
    mdp_value_iteration,
    policy_value,
    verify_inverse_feasible,
)

__all__ = [
    "brute_force_optimal_set",
    "enumerate_vertices",
    "extreme_rays",
    "grid_min_loss",
    "grid_points",
    "integer_points",
    "mdp_value_iteration",
    "policy_value",
    "verify_inverse_feasible",
]
