"""Cutting-plane inverse optimization for mixed-integer forwards."""

from __future__ import annotations

import numpy as np

from .. import config as _config
from ..errors import InverseInfeasible, IterationLimit
from ..model.data import EstimationResult
from ..solve import solve_forward
from ._common import Timer, check_observation, solve_pieces

STOP_TOL = 1e-7


def estimate_milp_cutting_plane(model, x_hat, space, max_cuts=None, config=None):
    """Cost closest to the prior under which ``x_hat`` is optimal for a MILP.

    The master problem minimizes ``h`` subject to one cut per generated
    forward solution ``x``: ``theta' x_hat <= theta' x`` for minimization
    (``>=`` for maximization).  Each round solves the forward at the master
    solution; the loop stops once the forward solution is no better than
    ``x_hat`` by more than 1e-7.

    Raises
    ------
    ObservationInfeasible, InverseInfeasible, IterationLimit
    """
    x_hat = check_observation(model, x_hat)
    sign = -1.0 if model.sense == "max" else 1.0
    cap = int(_config.get(config, "cuts.max") if max_cuts is None else max_cuts)
    cuts = []

    def build(b, theta, _):
        for x in cuts:
            b.row([(theta, sign * (x - x_hat))], ">=", 0.0)
        space.add_h(b, theta)

    with Timer() as tm:
        forward_solves = 0
        while True:
            k, sol = solve_pieces(space, build, config)
            if k is None:
                raise InverseInfeasible("the master problem became infeasible")
            theta = sol["theta"]
            rep = solve_forward(model, theta=theta, config=config)
            forward_solves += 1
            x_new = rep.primal
            improvement = sign * float(theta @ (x_hat - x_new))
            if improvement <= STOP_TOL:
                break
            if len(cuts) >= cap:
                raise IterationLimit(f"cut limit {cap} reached")
            cuts.append(x_new)
    return EstimationResult(
        theta_star=theta,
        objective_value=space.h_value(theta),
        per_obs_loss=np.zeros(1),
        diagnostics={
            "cuts": len(cuts),
            "forward_solves": forward_solves,
            "forward_gap": max(improvement, 0.0),
            "piece": k,
            "runtime": tm.elapsed,
        },
        extras={"cuts": np.array(cuts).reshape(-1, model.n)},
    )
