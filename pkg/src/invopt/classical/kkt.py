"""KKT-based inverse for convex objectives over a fixed polyhedron."""

from __future__ import annotations

import numpy as np

from .. import config as _config
from ..errors import InverseInfeasible
from ..model.data import EstimationResult
from ..model.forward import canonicalize
from ._common import Timer, check_observation, solve_pieces


def estimate_convex_objective_kkt(model, x_hat, space, config=None):
    """Parameter closest to the prior satisfying the KKT conditions at ``x_hat``.

    With ``grad f(x_hat, theta) = J theta + g0`` the stationarity condition
    ``J theta + g0 = A' lambda`` is linear; rows inactive at ``x_hat``
    (slack above the activity tolerance) get ``lambda = 0``.

    Raises
    ------
    ObservationInfeasible, InverseInfeasible
    """
    x_hat = check_observation(model, x_hat)
    can = canonicalize(model)
    J, g0 = can.objective.grad_affine(x_hat)
    act_tol = _config.get(config, "activity.tol")
    slack = can.A @ x_hat - can.b
    inactive = slack > act_tol * (1 + np.abs(can.b))
    ub = np.where(inactive, 0.0, np.inf)

    def build(b, theta, _):
        lam = b.var("lam", can.m, lb=0.0, ub=ub)
        b.rows([(theta, J), (lam, -can.A.T)], "=", -g0)
        space.add_h(b, theta)

    with Timer() as tm:
        k, sol = solve_pieces(space, build, config)
    if k is None:
        raise InverseInfeasible("no admissible parameter satisfies the KKT conditions at the observation")
    theta, lam = sol["theta"], sol["lam"]
    resid = J @ theta + g0 - can.A.T @ lam
    return EstimationResult(
        theta_star=theta,
        objective_value=space.h_value(theta),
        per_obs_loss=np.zeros(1),
        duals=[lam],
        diagnostics={
            "piece": k,
            "stationarity_residual": float(np.abs(resid).max(initial=0.0)),
            "complementarity_residual": float(np.abs(lam * slack).max(initial=0.0)),
            "runtime": tm.elapsed,
        },
    )
