"""Classical inverse optimization: inverse feasibility as a hard constraint."""

from .constraints import estimate_constraint_matrix, estimate_constraints_feasibility
from .cutting_plane import estimate_milp_cutting_plane
from .kkt import estimate_convex_objective_kkt
from .lp import (
    default_joint_space,
    estimate_inverse_optimal_value,
    estimate_lp_joint,
    estimate_lp_objective,
    estimate_partial_lp,
)
from .mdp import estimate_mdp_rewards

__all__ = [
    "default_joint_space",
    "estimate_constraint_matrix",
    "estimate_constraints_feasibility",
    "estimate_convex_objective_kkt",
    "estimate_inverse_optimal_value",
    "estimate_lp_joint",
    "estimate_lp_objective",
    "estimate_mdp_rewards",
    "estimate_milp_cutting_plane",
    "estimate_partial_lp",
]
