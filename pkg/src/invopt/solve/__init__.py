"""Embedded solver stack: simplex LP, branch-and-bound MILP, Frank-Wolfe, active-set QP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import config as _config
from ..errors import Infeasible, IterationLimit, Unbounded
from .frank_wolfe import frank_wolfe
from .lpbuilder import LPBuilder
from .milp import branch_and_bound
from .qp import project, solve_qp
from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, LPResult, linprog

_STATUS = {
    OPTIMAL: "Optimal",
    INFEASIBLE: "Infeasible",
    UNBOUNDED: "Unbounded",
    ITERATION_LIMIT: "IterationLimit",
}
_ERRORS = {"Infeasible": Infeasible, "Unbounded": Unbounded, "IterationLimit": IterationLimit}


@dataclass
class SolveReport:
    """Primal/dual solution of a forward solve.

    Duals refer to the rows of the canonical (``min``, all ``>=``) form of
    the model and are nonnegative.  ``objective`` is reported in the
    model's own sense.
    """

    status: str
    primal: np.ndarray | None = None
    dual: np.ndarray | None = None
    objective: float = float("nan")
    residuals: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == "Optimal"

    def raise_for_status(self):
        if not self.ok:
            raise _ERRORS[self.status](f"forward solve ended with status {self.status}")
        return self


def _finish(report, check):
    return report.raise_for_status() if check else report


def solve_lp(model, config=None, check=True):
    """Solve a continuous linear forward model with dual certificates.

    Raises
    ------
    Infeasible, Unbounded, IterationLimit
        When ``check`` is true and the solve does not end optimal.
    """
    from ..model.forward import canonicalize

    can = canonicalize(model)
    res = linprog(can.c, can.A, can.b, ">=", tol=_config.get(config, "lp.tol"))
    if not res.ok:
        return _finish(SolveReport(_STATUS[res.status], info={"iterations": res.iterations}), check)
    x, y = res.x, res.row_duals
    obj = float(can.c @ x)
    residuals = {
        "primal": float(max(0.0, np.max(can.b - can.A @ x, initial=0.0))),
        "dual": float(max(0.0, -np.min(y, initial=0.0)) + np.abs(can.c - can.A.T @ y).max(initial=0.0)),
        "gap": float(abs(obj - can.b @ y)),
    }
    sign = -1.0 if model.sense == "max" else 1.0
    return SolveReport("Optimal", x, y, sign * obj, residuals, {"iterations": res.iterations})


def solve_milp(model, config=None, check=True):
    """Solve a mixed-integer linear forward model by branch and bound.

    ``info['relaxation']`` is the root LP bound in the canonical ``min``
    sense, so ``relaxation <= objective`` for minimization.
    """
    from ..model.forward import canonicalize

    can = canonicalize(model)
    res = branch_and_bound(
        can.c, can.A, can.b, [">="] * can.m, None, None, can.integer,
        tol=_config.get(config, "lp.tol"), node_cap=int(_config.get(config, "milp.node_cap")),
    )
    info = dict(res.info)
    if not res.ok:
        return _finish(SolveReport(_STATUS[res.status], info=info), check)
    x = res.x
    residuals = {
        "primal": float(max(0.0, np.max(can.b - can.A @ x, initial=0.0))),
        "integrality": float(np.max(np.abs(x[can.integer] - np.round(x[can.integer])), initial=0.0)),
    }
    sign = -1.0 if model.sense == "max" else 1.0
    return SolveReport("Optimal", x, None, sign * float(can.c @ x), residuals, info)


def solve_convex(model, tol=None, max_iter=None, config=None, check=True, theta=None):
    """Minimize a convex forward model by away-step Frank-Wolfe.

    Quadratic and linear objectives use exact line search; other
    objectives bisect on the directional derivative.
    """
    from ..model.forward import canonicalize

    can = canonicalize(model)
    obj = can.objective
    tol = _config.get(config, "fw.tol") if tol is None else tol
    max_iter = int(_config.get(config, "fw.max_iter") if max_iter is None else max_iter)
    curvature = None
    if obj.quadratic:
        def curvature(x, d):
            return obj.curvature(x, d, theta)
    res = frank_wolfe(
        lambda x: obj.value(x, theta),
        lambda x: obj.grad(x, theta),
        can.A, can.b, ">=", tol=tol, max_iter=max_iter, curvature=curvature,
    )
    info = {"iterations": res.iterations, **{k: v for k, v in res.info.items() if k != "values"}}
    if res.x is None:
        return _finish(SolveReport(_STATUS[res.status], info=info), check)
    residuals = {
        "primal": float(max(0.0, np.max(can.b - can.A @ res.x, initial=0.0))),
        "fw_gap": float(res.info.get("gap", np.nan)),
    }
    report = SolveReport(_STATUS[res.status], res.x, None, float(obj.value(res.x, theta)), residuals, info)
    report.info["values"] = res.info.get("values", [])
    return _finish(report, check)


def solve_forward(model, theta=None, config=None, check=True):
    """Dispatch on the model class, optionally overriding its parameter."""
    from ..model.forward import ConvexForwardModel
    from ..model.objectives import Quadratic

    if isinstance(model, ConvexForwardModel):
        if isinstance(model.objective, Quadratic) and model.objective.strictly_convex:
            return _solve_quadratic(model, theta, config, check)
        return solve_convex(model, config=config, check=check, theta=theta)
    if theta is not None:
        model = model.with_cost(theta)
    if model.is_integer:
        return solve_milp(model, config, check)
    return solve_lp(model, config, check)


def _solve_quadratic(model, theta, config, check):
    from ..model.forward import canonicalize

    can = canonicalize(model)
    obj = can.objective
    th = obj.theta if theta is None else np.asarray(theta, dtype=float)
    res = solve_qp(obj.Phi, obj.psi - th, can.A, can.b, ">=")
    if not res.ok:
        return _finish(SolveReport(_STATUS[res.status]), check)
    residuals = {"primal": float(max(0.0, np.max(can.b - can.A @ res.x, initial=0.0)))}
    return SolveReport("Optimal", res.x, res.info["multipliers"][: can.m], float(obj.value(res.x, th)), residuals)


__all__ = [
    "LPBuilder",
    "LPResult",
    "SolveReport",
    "branch_and_bound",
    "frank_wolfe",
    "linprog",
    "project",
    "solve_convex",
    "solve_forward",
    "solve_lp",
    "solve_milp",
    "solve_qp",
]
