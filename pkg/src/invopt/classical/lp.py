"""Inverse linear programs: objective, joint objective/right-hand side,
optimal value and partial observation."""

from __future__ import annotations

import numpy as np

from .. import config as _config
from ..errors import CompletionInfeasible, InverseInfeasible, TargetUnattainable, UnsupportedCombination
from ..model.data import EstimationResult
from ..model.space import ParameterSpace
from ..oracles import enumerate_vertices
from ..solve import LPBuilder, linprog
from ._common import (
    Timer,
    canonical_with_sign,
    check_observation,
    forward_gap,
    run_big_m,
    solve_pieces,
)


LAM_WEIGHT = 1e-9


def _require_continuous(model):
    if model.is_integer:
        raise UnsupportedCombination("integer forwards need the cutting-plane estimator")


def estimate_lp_objective(model, x_hat, space, mode="SD", config=None):
    """Cost vector closest to the prior that makes ``x_hat`` optimal.

    Parameters
    ----------
    model : LinearForwardModel
        ``model.c`` is ignored; the cost is the unknown.
    x_hat : (n,) array
        Observed decision; must be feasible.
    space : ParameterSpace
        Admissible costs and the objective ``h``.
    mode : {'SD', 'CS'}
        Certify optimality by strong duality (``theta' x_hat = b' lambda``)
        or by complementary slackness (``(A x_hat - b)' lambda = 0``).

    Returns
    -------
    EstimationResult
        ``duals[0]`` is the certifying multiplier on the canonical rows.

    Raises
    ------
    ObservationInfeasible, InverseInfeasible
    """
    mode = mode.upper()
    if mode not in ("SD", "CS"):
        raise ValueError("mode must be 'SD' or 'CS'")
    _require_continuous(model)
    x_hat = check_observation(model, x_hat)
    can, sign = canonical_with_sign(model)
    act_tol = _config.get(config, "activity.tol")
    slack = can.A @ x_hat - can.b
    slack = np.where(slack <= act_tol * (1 + np.abs(can.b)), 0.0, slack)

    def build(b, theta, _):
        lam = b.var("lam", can.m, lb=0.0)
        b.rows([(lam, can.A.T), (theta, -sign * np.eye(can.n))], "=", np.zeros(can.n))
        if mode == "SD":
            b.row([(theta, sign * x_hat), (lam, -can.b)], "=", 0.0)
        else:
            b.row([(lam, slack)], "=", 0.0)
        space.add_h(b, theta)

    with Timer() as tm:
        best = solve_pieces(space, build, config)
    if best[0] is None:
        raise InverseInfeasible("no admissible cost renders the observation optimal")
    k, sol = best
    theta = sol["theta"]
    return EstimationResult(
        theta_star=theta,
        objective_value=space.h_value(theta),
        per_obs_loss=np.zeros(1),
        duals=[sol["lam"]],
        diagnostics={
            "mode": mode,
            "piece": k,
            "pieces": len(space.pieces()),
            "forward_gap": forward_gap(model, theta, x_hat, config),
            "runtime": tm.elapsed,
        },
    )


def estimate_lp_joint(model, x_hat, space, big_m=None, config=None):
    """Jointly estimate the cost ``theta`` and right-hand side ``psi``.

    Complementary slackness between the multipliers and the slacks
    ``A x_hat - psi`` is linearized with binaries ``z`` and a big-M
    constant.  ``space`` lives on the stacked vector ``(theta, psi)``.

    Raises
    ------
    ObservationInfeasible, InverseInfeasible, BigMViolation
    """
    _require_continuous(model)
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    can, sign = canonical_with_sign(model)
    if not model.is_canonical:
        raise UnsupportedCombination("joint estimation expects a model already in min / >= form")
    n, m = can.n, can.m
    if space.dim != n + m:
        raise ValueError(f"joint space must have {n + m} components (theta then psi)")
    Ax = can.A @ x_hat
    tol = _config.get(config, "lp.tol")
    cap = int(_config.get(config, "milp.node_cap"))
    pieces = space.pieces()

    def attempt(M):
        best = None
        for k, piece in enumerate(pieces):
            b = LPBuilder()
            tp = piece.add_to(b, "tp")
            lam = b.var("lam", m, lb=0.0, ub=M)
            z = b.var("z", m, lb=0.0, ub=1.0, integer=True)
            sel_t = np.hstack([np.eye(n), np.zeros((n, m))])
            sel_p = np.hstack([np.zeros((m, n)), np.eye(m)])
            b.rows([(lam, can.A.T), (tp, -sign * sel_t)], "=", np.zeros(n))
            # psi <= A x_hat
            b.rows([(tp, -sel_p)], ">=", -Ax)
            b.rows([(lam, -np.eye(m)), (z, M * np.eye(m))], ">=", np.zeros(m))
            # A x_hat - psi <= M (1 - z)
            b.rows([(tp, sel_p), (z, -M * np.eye(m))], ">=", Ax - M)
            space.add_h(b, tp)
            # opposite rows made active together admit unbounded multipliers; prefer small ones
            b.minimize(lam, np.full(m, LAM_WEIGHT))
            sol = b.solve(tol=tol, node_cap=cap)
            if sol.ok and (best is None or sol.objective < best[1].objective - 1e-9):
                best = (k, sol)
        if best is None:
            return None
        tp = best[1]["tp"]
        slack = Ax - tp[n:]
        return best, np.concatenate([best[1]["lam"], slack])

    with Timer() as tm:
        (k, sol), M = run_big_m(attempt, big_m, config, "observation")
    tp = sol["tp"]
    theta, psi = tp[:n], tp[n:]
    refit = model.__class__(theta, can.A, psi, None, can.integer, "min")
    return EstimationResult(
        theta_star=tp,
        objective_value=space.h_value(tp),
        per_obs_loss=np.zeros(1),
        duals=[sol["lam"]],
        diagnostics={
            "piece": k,
            "big_m": M,
            "forward_gap": forward_gap(refit, theta, x_hat, config),
            "runtime": tm.elapsed,
        },
        extras={"theta": theta, "psi": psi, "z": np.round(sol["z"])},
    )


def estimate_inverse_optimal_value(model, z_hat, space, config=None):
    """Cost closest to the prior whose optimal value equals ``z_hat``.

    Dual feasibility with ``b' lambda = z_hat`` bounds the optimal value
    from below; requiring ``theta' v = z_hat`` at some vertex ``v`` bounds it
    from above.  One program is solved per vertex and admissible piece; the
    forward region is enumerated, so this is a desk-scale method.  Ties in
    ``h`` go to the lexicographically smallest cost.

    Raises
    ------
    TargetUnattainable
        With ``gap`` the smallest achievable ``|min value - z_hat|``.
    """
    _require_continuous(model)
    can, sign = canonical_with_sign(model)
    z_can = sign * float(z_hat)
    verts = enumerate_vertices(can.A, can.b)
    if verts.size == 0:
        raise TargetUnattainable("the forward region has no vertices", gap=float("inf"))

    def dual_system(b, theta, v):
        lam = b.var("lam", can.m, lb=0.0)
        b.rows([(lam, can.A.T), (theta, -sign * np.eye(can.n))], "=", np.zeros(can.n))
        return lam

    with Timer() as tm:
        best = None
        for v in verts:
            def build(b, theta, _, v=v):
                lam = dual_system(b, theta, v)
                b.row([(lam, can.b)], "=", z_can)
                b.row([(theta, sign * v)], "=", z_can)
                space.add_h(b, theta)

            k, sol = solve_pieces(space, build, config, tie="lex")
            if k is None:
                continue
            if best is None or sol.objective < best[1].objective - 1e-9 or (
                abs(sol.objective - best[1].objective) <= 1e-9
                and tuple(np.round(sol["theta"], 9)) < tuple(np.round(best[1]["theta"], 9))
            ):
                best = (k, sol)
    if best is None:
        gap = _optimal_value_gap(can, sign, z_can, verts, space, config)
        raise TargetUnattainable(f"no admissible cost attains optimal value {z_hat:g} (gap {gap:.6g})", gap=gap)
    k, sol = best
    theta = sol["theta"]
    value = float(np.min(verts @ (sign * theta)) * sign)
    return EstimationResult(
        theta_star=theta,
        objective_value=space.h_value(theta),
        per_obs_loss=np.zeros(1),
        duals=[sol["lam"]],
        diagnostics={"piece": k, "vertices": len(verts), "value_error": abs(value - z_hat), "runtime": tm.elapsed},
    )


def _optimal_value_gap(can, sign, z_can, verts, space, config):
    best = np.inf
    for v in verts:
        def build(b, theta, _, v=v):
            lam = b.var("lam", can.m, lb=0.0)
            b.rows([(lam, can.A.T), (theta, -sign * np.eye(can.n))], "=", np.zeros(can.n))
            t = b.var("t", 1, lb=0.0)
            b.row([(t, [1.0]), (lam, -can.b)], ">=", -z_can)
            b.row([(t, [1.0]), (lam, can.b)], ">=", z_can)
            b.row([(t, [1.0]), (theta, -sign * v)], ">=", -z_can)
            b.row([(t, [1.0]), (theta, sign * v)], ">=", z_can)
            b.minimize(t, [1.0])

        k, sol = solve_pieces(space, build, config)
        if k is not None:
            best = min(best, float(sol["t"][0]))
    return best


def estimate_partial_lp(model, fixed, space, big_m=None, config=None):
    """Recover a cost and a completion from a partially observed decision.

    Parameters
    ----------
    fixed : dict[int, float]
        Observed components of the decision.

    Returns
    -------
    EstimationResult
        ``extras['x']`` holds the completed decision.

    Raises
    ------
    CompletionInfeasible, BigMViolation
    """
    _require_continuous(model)
    can, sign = canonical_with_sign(model)
    n, m = can.n, can.m
    idx = np.array(sorted(fixed), dtype=int)
    vals = np.array([fixed[i] for i in idx], dtype=float)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError("fixed component index out of range")
    sel = np.eye(n)[idx]
    check = linprog(np.zeros(n), np.vstack([can.A, sel]), np.concatenate([can.b, vals]),
                    [">="] * m + ["="] * idx.size)
    if not check.ok:
        raise CompletionInfeasible("no feasible decision matches the fixed components")
    tol = _config.get(config, "lp.tol")
    cap = int(_config.get(config, "milp.node_cap"))
    pieces = space.pieces()

    def attempt(M):
        best = None
        for k, piece in enumerate(pieces):
            b = LPBuilder()
            theta = piece.add_to(b, "theta")
            x = b.var("x", n)
            lam = b.var("lam", m, lb=0.0, ub=M)
            z = b.var("z", m, lb=0.0, ub=1.0, integer=True)
            b.rows([(x, can.A)], ">=", can.b)
            if idx.size:
                b.rows([(x, sel)], "=", vals)
            b.rows([(lam, can.A.T), (theta, -sign * np.eye(n))], "=", np.zeros(n))
            b.rows([(lam, -np.eye(m)), (z, M * np.eye(m))], ">=", np.zeros(m))
            # A x - b <= M (1 - z)
            b.rows([(x, -can.A), (z, -M * np.eye(m))], ">=", -can.b - M)
            space.add_h(b, theta)
            sol = b.solve(tol=tol, node_cap=cap)
            if sol.ok and (best is None or sol.objective < best[1].objective - 1e-9):
                best = (k, sol)
        if best is None:
            return None
        x = best[1]["x"]
        return best, np.concatenate([best[1]["lam"], can.A @ x - can.b])

    with Timer() as tm:
        (k, sol), M = run_big_m(attempt, big_m, config, "partial observation")
    theta, x = sol["theta"], sol["x"]
    return EstimationResult(
        theta_star=theta,
        objective_value=space.h_value(theta),
        per_obs_loss=np.zeros(1),
        duals=[sol["lam"]],
        diagnostics={"piece": k, "big_m": M, "forward_gap": forward_gap(model, theta, x, config),
                     "runtime": tm.elapsed},
        extras={"x": x},
    )


def default_joint_space(model, prior_theta, prior_psi, p=1, **kw):
    """Admissible set over ``(theta, psi)`` with a norm-to-prior objective."""
    from ..model.space import NormToPrior

    prior = np.concatenate([np.asarray(prior_theta, float), np.asarray(prior_psi, float)])
    return ParameterSpace(prior.size, prior=prior, objective_mode=NormToPrior(p), **kw)
