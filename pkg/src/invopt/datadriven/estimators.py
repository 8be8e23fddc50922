"""Loss-minimizing estimators with LP reformulations (ASO, RSO, VI, KKT)."""

from __future__ import annotations

import warnings

import numpy as np

from .. import config as _config
from ..classical._common import Timer, solve_pieces
from ..errors import (
    DegenerateThetaWarning,
    InfeasibleTheta,
    NormalizationRequired,
    UnsupportedCombination,
    UnsupportedObjective,
)
from ..model.data import DEGENERATE, OPTIMAL, EstimationResult
from ..model.forward import ConvexForwardModel, LinearForwardModel, canonicalize
from ..model.objectives import Basis, Linear, Quadratic
from .losses import LossSpec, RiskSpec, aggregate_risk, eval_loss


def _risk(risk):
    if risk is None:
        return RiskSpec()
    return RiskSpec.parse(risk) if isinstance(risk, str) else risk


def _linear_instances(dataset):
    out = []
    for model in dataset.models:
        if not isinstance(model, LinearForwardModel) or model.is_integer:
            raise UnsupportedCombination("this estimator needs continuous linear forwards")
        sign = -1.0 if model.sense == "max" else 1.0
        out.append((canonicalize(model), sign))
    return out


def _warn_degenerate(space, allow_degenerate):
    if not space.excludes_zero and not allow_degenerate:
        warnings.warn(
            "the admissible set contains theta = 0, which makes every observation optimal; "
            "add a normalization or pass allow_degenerate=True",
            DegenerateThetaWarning,
            stacklevel=3,
        )


def _add_risk(b, loss_terms, weights, risk):
    """Add the aggregated risk of affine losses to the objective.

    ``loss_terms[i]`` is a list of ``(block, coef)`` pairs plus a constant,
    representing an upper bound on observation ``i``'s loss.
    """
    w = np.asarray(weights, dtype=float)
    p = w / w.sum()
    if risk.kind == "expected":
        for (terms, const), pi in zip(loss_terms, p):
            for block, coef in terms:
                b.minimize(block, pi * np.asarray(coef, dtype=float))
            b.obj_const += pi * const
        return
    if risk.kind != "cvar":
        raise UnsupportedCombination("quantile risk is only available through estimate_var")
    tau = b.var("tau", 1)
    u = b.var("u", len(loss_terms), lb=0.0)
    eye = np.eye(len(loss_terms))
    for i, (terms, const) in enumerate(loss_terms):
        # u_i >= loss_i - tau
        b.row([(u, eye[i]), (tau, [1.0])] + [(blk, -np.asarray(c, float)) for blk, c in terms], ">=", const)
    b.minimize(tau, [1.0])
    b.minimize(u, p / risk.level)


def _finish(theta, per_obs, weights, risk, space, k, tm, extra_diag=None, duals=None, lp_losses=None):
    value = aggregate_risk(per_obs, weights, risk)
    diag = {"piece": k, "risk": risk.kind, "risk_level": risk.level, "runtime": tm.elapsed}
    if lp_losses is not None:
        diag["reformulation_gap"] = float(np.max(np.abs(np.asarray(lp_losses) - per_obs), initial=0.0))
    if extra_diag:
        diag.update(extra_diag)
    status = DEGENERATE if np.allclose(theta, 0.0, atol=1e-9) else OPTIMAL
    return EstimationResult(theta, value, status, np.asarray(per_obs, dtype=float), duals or [], diag)


def estimate_aso(dataset, space, risk=None, allow_degenerate=False, config=None):
    """Minimize the absolute sub-optimality risk over linear forwards.

    Each observation gets a dual vector ``lambda_i`` with
    ``A_i' lambda_i = theta``; its loss is bounded by
    ``|theta' x_i - b_i' lambda_i|``.  When every observation is feasible the
    absolute value is dropped (weak duality makes the term nonnegative) and,
    on a shared region, a single dual vector serves every observation.
    Reported losses are re-evaluated by forward solves.

    Parameters
    ----------
    dataset : Dataset
    space : ParameterSpace
        Should exclude ``theta = 0``; otherwise a
        :class:`DegenerateThetaWarning` is issued.
    risk : RiskSpec or str, optional
        ``expected`` (default) or ``cvar:A``.

    Raises
    ------
    InfeasibleTheta
    """
    risk = _risk(risk)
    _warn_degenerate(space, allow_degenerate)
    inst = _linear_instances(dataset)
    obs = dataset.observations
    feasible = all(dataset.models[o.instance].feasible(o.x) for o in obs)
    shared = dataset.shared_region and feasible

    def build(b, theta, _):
        terms = []
        if shared:
            can, sign = inst[0]
            lam = b.var("lam0", can.m, lb=0.0)
            b.rows([(lam, can.A.T), (theta, -sign * np.eye(can.n))], "=", np.zeros(can.n))
            for o in obs:
                terms.append(([(theta, sign * o.x), (lam, -can.b)], 0.0))
        else:
            for i, o in enumerate(obs):
                can, sign = inst[o.instance]
                lam = b.var(f"lam{i}", can.m, lb=0.0)
                b.rows([(lam, can.A.T), (theta, -sign * np.eye(can.n))], "=", np.zeros(can.n))
                if feasible:
                    terms.append(([(theta, sign * o.x), (lam, -can.b)], 0.0))
                else:
                    e = b.var(f"abs{i}", 1, lb=0.0)
                    b.row([(e, [1.0]), (theta, -sign * o.x), (lam, can.b)], ">=", 0.0)
                    b.row([(e, [1.0]), (theta, sign * o.x), (lam, -can.b)], ">=", 0.0)
                    terms.append(([(e, [1.0])], 0.0))
        _add_risk(b, terms, dataset.weights, risk)

    with Timer() as tm:
        k, sol = solve_pieces(space, build, config)
        if k is None:
            raise InfeasibleTheta("no admissible parameter admits dual-feasible multipliers")
        theta = sol["theta"]
        per_obs = np.array([eval_loss("aso", theta, o.x, m) for o, m in dataset])
    duals = [sol["lam0"]] if shared else [sol[f"lam{i}"] for i in range(len(obs))]
    lp_losses = []
    for i, (o, _) in enumerate(dataset):
        can, sign = inst[o.instance]
        lam = duals[0] if shared else duals[i]
        lp_losses.append(abs(sign * theta @ o.x - can.b @ lam))
    return _finish(theta, per_obs, dataset.weights, risk, space, k, tm,
                   {"shared_dual": shared}, duals, lp_losses)


def estimate_rso(dataset, space, risk=None, config=None):
    """Minimize the relative sub-optimality risk (scale-invariant objectives).

    Every dual vector is normalized by ``b_i' lambda_i = 1``, which fixes the
    optimal value at one, so the loss becomes ``|theta' x_i - 1|``.

    Raises
    ------
    NormalizationRequired
        If some right-hand side is not strictly positive.
    """
    risk = _risk(risk)
    inst = _linear_instances(dataset)
    for can, sign in inst:
        if sign < 0 or np.any(can.b <= 0):
            raise NormalizationRequired(
                "the relative loss needs minimization forwards with strictly positive right-hand sides"
            )
    obs = dataset.observations

    def build(b, theta, _):
        terms = []
        for i, o in enumerate(obs):
            can, _s = inst[o.instance]
            lam = b.var(f"lam{i}", can.m, lb=0.0)
            b.rows([(lam, can.A.T), (theta, -np.eye(can.n))], "=", np.zeros(can.n))
            b.row([(lam, can.b)], "=", 1.0)
            e = b.var(f"abs{i}", 1, lb=0.0)
            b.row([(e, [1.0]), (theta, -o.x)], ">=", -1.0)
            b.row([(e, [1.0]), (theta, o.x)], ">=", 1.0)
            terms.append(([(e, [1.0])], 0.0))
        _add_risk(b, terms, dataset.weights, risk)

    with Timer() as tm:
        k, sol = solve_pieces(space, build, config)
        if k is None:
            raise InfeasibleTheta("no admissible parameter admits normalized dual multipliers")
        theta = sol["theta"]
        lp_losses = np.array([abs(theta @ o.x - 1.0) for o in obs])
        direct = np.array([eval_loss("rso", theta, o.x, m) for o, m in dataset])
    result = _finish(theta, lp_losses, dataset.weights, risk, space, k, tm,
                     {"max_ratio_mismatch": float(np.max(np.abs(direct - lp_losses)))},
                     [sol[f"lam{i}"] for i in range(len(obs))])
    result.extras["direct_losses"] = direct
    return result


def _affine_gradient(model, x_hat):
    """``(J, g0, A, b)`` with ``grad = J theta + g0`` on canonical rows."""
    if isinstance(model, LinearForwardModel):
        can = canonicalize(model)
        sign = -1.0 if model.sense == "max" else 1.0
        return sign * np.eye(can.n), np.zeros(can.n), can
    if not isinstance(model, ConvexForwardModel):
        raise UnsupportedCombination("unknown forward model")
    if not isinstance(model.objective, (Linear, Quadratic, Basis)):
        raise UnsupportedObjective("the gradient must be affine in the parameter")
    can = canonicalize(model)
    J, g0 = can.objective.grad_affine(x_hat)
    return J, g0, can


def _gradient_degenerate(dataset, space, allow_degenerate):
    zero_offset = all(
        not np.any(_affine_gradient(m, o.x)[1]) for o, m in dataset
    )
    if zero_offset:
        _warn_degenerate(space, allow_degenerate)


def estimate_vi(dataset, space, risk=None, allow_degenerate=False, config=None):
    """Minimize the variational-inequality loss for affine-gradient objectives.

    With ``g_i(theta) = J_i theta + g0_i`` the gradient at ``x_i``, the loss
    ``g_i' x_i - min_{x in X_i} g_i' x`` is written through its dual:
    ``A_i' lambda_i = g_i(theta)``, ``lambda_i >= 0``, loss bound
    ``|g_i' x_i - b_i' lambda_i|``.  The product ``g_i' x_i`` is affine in
    theta because ``x_i`` is data.

    Raises
    ------
    UnsupportedObjective, InfeasibleTheta
    """
    risk = _risk(risk)
    _gradient_degenerate(dataset, space, allow_degenerate)
    data = [_affine_gradient(m, o.x) for o, m in dataset]
    obs = dataset.observations
    feasible = all(m.feasible(o.x) for o, m in dataset)

    def build(b, theta, _):
        terms = []
        for i, (o, (J, g0, can)) in enumerate(zip(obs, data)):
            lam = b.var(f"lam{i}", can.m, lb=0.0)
            b.rows([(lam, can.A.T), (theta, -J)], "=", g0)
            gx = J.T @ o.x
            const = float(g0 @ o.x)
            if feasible:
                terms.append(([(theta, gx), (lam, -can.b)], const))
            else:
                e = b.var(f"abs{i}", 1, lb=0.0)
                b.row([(e, [1.0]), (theta, -gx), (lam, can.b)], ">=", const)
                b.row([(e, [1.0]), (theta, gx), (lam, -can.b)], ">=", -const)
                terms.append(([(e, [1.0])], 0.0))
        _add_risk(b, terms, dataset.weights, risk)

    with Timer() as tm:
        k, sol = solve_pieces(space, build, config)
        if k is None:
            raise InfeasibleTheta("no admissible parameter admits dual-feasible multipliers")
        theta = sol["theta"]
        per_obs = np.array([eval_loss("vi", theta, o.x, m) for o, m in dataset])
    duals = [sol[f"lam{i}"] for i in range(len(obs))]
    lp_losses = [abs((J @ theta + g0) @ o.x - can.b @ lam) for o, (J, g0, can), lam in zip(obs, data, duals)]
    return _finish(theta, per_obs, dataset.weights, risk, space, k, tm, None, duals, lp_losses)


def estimate_kkt(dataset, space, risk=None, kkt_norm=1, allow_degenerate=False, config=None):
    """Minimize the KKT-residual loss jointly over theta and the multipliers.

    Observation ``i`` contributes ``||J_i theta + g0_i - A_i' lambda_i||_1``
    plus the complementarity term ``||lambda_i * |s_i| ||_p`` where ``s_i`` is
    the slack of ``x_i``; both are LP-representable for ``p`` in {1, inf}.

    Raises
    ------
    UnsupportedObjective, InfeasibleTheta
    """
    risk = _risk(risk)
    if kkt_norm not in (1, np.inf):
        raise ValueError("kkt_norm must be 1 or inf")
    data = [_affine_gradient(m, o.x) for o, m in dataset]
    obs = dataset.observations
    zero_offset = all(not np.any(g0) for _, g0, _ in data)
    if zero_offset:
        _warn_degenerate(space, allow_degenerate)

    def build(b, theta, _):
        terms = []
        for i, (o, (J, g0, can)) in enumerate(zip(obs, data)):
            n, m = can.n, can.m
            s = np.abs(can.A @ o.x - can.b)
            lam = b.var(f"lam{i}", m, lb=0.0)
            t = b.var(f"st{i}", n, lb=0.0)
            # t >= +-(J theta + g0 - A' lambda)
            b.rows([(t, np.eye(n)), (theta, -J), (lam, can.A.T)], ">=", g0)
            b.rows([(t, np.eye(n)), (theta, J), (lam, -can.A.T)], ">=", -g0)
            if kkt_norm == 1:
                terms.append(([(t, np.ones(n)), (lam, s)], 0.0))
            else:
                u = b.var(f"cs{i}", 1, lb=0.0)
                b.rows([(u, np.ones((m, 1))), (lam, -np.diag(s))], ">=", np.zeros(m))
                terms.append(([(t, np.ones(n)), (u, [1.0])], 0.0))
        _add_risk(b, terms, dataset.weights, risk)

    with Timer() as tm:
        k, sol = solve_pieces(space, build, config)
        if k is None:
            raise InfeasibleTheta("the admissible set is empty")
        theta = sol["theta"]
        loss = LossSpec("kkt", kkt_norm=kkt_norm)
        per_obs = np.array([eval_loss(loss, theta, o.x, m) for o, m in dataset])
    if zero_offset and np.allclose(theta, 0.0, atol=1e-9) and not allow_degenerate:
        warnings.warn("the estimate is the trivial parameter theta = 0", DegenerateThetaWarning, stacklevel=2)
    duals = [sol[f"lam{i}"] for i in range(len(obs))]
    return _finish(theta, per_obs, dataset.weights, risk, space, k, tm, {"kkt_norm": kkt_norm}, duals)
