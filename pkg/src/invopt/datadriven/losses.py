"""Loss functions penalizing inverse infeasibility, and risk aggregators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NormalizationRequired, UnsupportedCombination, UnsupportedObjective
from ..model.forward import LinearForwardModel, canonicalize
from ..model.objectives import Basis, Linear, Quadratic
from ..solve import LPBuilder, linprog, solve_forward, solve_qp

KINDS = ("aso", "rso", "distance", "vi", "kkt")


@dataclass(frozen=True)
class LossSpec:
    """Which loss to use.

    Parameters
    ----------
    kind : {'aso', 'rso', 'distance', 'vi', 'kkt'}
    epsilon : float
        Relaxation of the optimal set for the distance loss.
    kkt_norm : {1, inf}
        Norm on the complementarity residual of the KKT loss.
    """

    kind: str = "aso"
    epsilon: float = 0.0
    kkt_norm: float = 1

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in KINDS:
            raise ValueError(f"unknown loss {self.kind!r}; expected one of {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.kkt_norm not in (1, np.inf):
            raise ValueError("kkt_norm must be 1 or inf")


@dataclass(frozen=True)
class RiskSpec:
    """``expected``, ``cvar`` (level ``alpha``) or ``var`` (level ``chi``)."""

    kind: str = "expected"
    level: float = 1.0
    big_m: float | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("expected", "cvar", "var"):
            raise ValueError(f"unknown risk {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not 0 < self.level <= 1:
            raise ValueError("risk level must lie in (0, 1]")

    @classmethod
    def parse(cls, text):
        """Parse ``expected``, ``cvar:A`` or ``var:X``."""
        name, _, level = text.partition(":")
        return cls(name, float(level) if level else 1.0)


def _value(model, theta, x):
    if isinstance(model, LinearForwardModel):
        return float(np.asarray(theta, dtype=float) @ x)
    return model.objective.value(x, theta)


def _aso(theta, x_hat, model):
    rep = solve_forward(model, theta=theta)
    return abs(_value(model, theta, x_hat) - rep.objective)


def _rso(theta, x_hat, model):
    if not isinstance(model, LinearForwardModel):
        raise UnsupportedCombination("the relative loss needs a linear forward")
    can = canonicalize(model)
    if np.any(can.b <= 0):
        raise NormalizationRequired("the relative loss needs a strictly positive right-hand side")
    rep = solve_forward(model, theta=theta)
    z = rep.objective
    if abs(z) <= 1e-12:
        return math.inf
    return abs(_value(model, theta, x_hat) / z - 1.0)


def optimal_face(model, theta, epsilon=0.0):
    """Rows ``(G, g)`` with ``G x >= g`` describing the (relaxed) optimal set."""
    if not isinstance(model, LinearForwardModel):
        raise UnsupportedCombination("the distance loss needs a linear forward")
    can = canonicalize(model)
    sign = -1.0 if model.sense == "max" else 1.0
    cost = sign * np.asarray(theta, dtype=float)
    rep = solve_forward(can.with_cost(cost))
    z = rep.objective
    slack = epsilon + 1e-12 * max(1.0, abs(z))
    G = np.vstack([can.A, -cost])
    g = np.concatenate([can.b, [-(z + slack)]])
    return G, g


def distance_to_optimal_set(theta, x_hat, model, epsilon=0.0):
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    G, g = optimal_face(model, theta, epsilon)
    res = solve_qp(np.eye(x_hat.size), -x_hat, G, g, ">=")
    if not res.ok:
        raise RuntimeError(f"projection onto the optimal set failed ({res.status})")
    return float(np.linalg.norm(res.x - x_hat)), res.x


def _gradient_data(theta, x_hat, model):
    """Canonical rows and the objective gradient at ``x_hat``."""
    can = canonicalize(model)
    if isinstance(model, LinearForwardModel):
        sign = -1.0 if model.sense == "max" else 1.0
        return can, sign * np.asarray(theta, dtype=float)
    return can, _grad(can, theta, x_hat)


def _vi(theta, x_hat, model):
    can, grad = _gradient_data(theta, x_hat, model)
    res = linprog(grad, can.A, can.b, ">=")
    if not res.ok:
        raise RuntimeError(f"linear subproblem of the VI loss ended {res.status}")
    return abs(float(grad @ x_hat) - res.objective)


def _grad(can, theta, x_hat):
    obj = can.objective
    if not isinstance(obj, (Linear, Quadratic, Basis)):
        raise UnsupportedObjective("the gradient must be affine in the parameter")
    J, g0 = obj.grad_affine(x_hat)
    return J @ np.asarray(theta, dtype=float) + g0


def kkt_residual(theta, x_hat, model, norm=1):
    """``min_{lambda >= 0} ||grad - A' lambda||_1 + ||lambda * |slack| ||_norm``."""
    can, grad = _gradient_data(theta, x_hat, model)
    s = np.abs(can.A @ x_hat - can.b)
    n, m = can.n, can.m
    b = LPBuilder()
    lam = b.var("lam", m, lb=0.0)
    t = b.var("t", n, lb=0.0)
    b.rows([(t, np.eye(n)), (lam, can.A.T)], ">=", grad)
    b.rows([(t, np.eye(n)), (lam, -can.A.T)], ">=", -grad)
    b.minimize(t, np.ones(n))
    if norm == 1:
        b.minimize(lam, s)
    else:
        u = b.var("u", 1, lb=0.0)
        b.rows([(u, np.ones((m, 1))), (lam, -np.diag(s))], ">=", np.zeros(m))
        b.minimize(u, [1.0])
    sol = b.solve()
    if not sol.ok:
        raise RuntimeError(f"KKT residual LP ended {sol.status}")
    return max(float(sol.objective), 0.0)


def eval_loss(loss, theta, x_hat, model):
    """Loss of a single observation under ``theta``.

    Parameters
    ----------
    loss : LossSpec or str
    theta : array
    x_hat : (n,) array or Observation
    model : forward model of the observation

    Returns
    -------
    float
        Nonnegative; zero exactly when ``x_hat`` is optimal under ``theta``
        (for the relative loss, when the ratio equals one).
    """
    if isinstance(loss, str):
        loss = LossSpec(loss)
    x_hat = np.asarray(getattr(x_hat, "x", x_hat), dtype=float).ravel()
    theta = np.asarray(theta, dtype=float).ravel()
    if loss.kind == "aso":
        return _aso(theta, x_hat, model)
    if loss.kind == "rso":
        return _rso(theta, x_hat, model)
    if loss.kind == "distance":
        return distance_to_optimal_set(theta, x_hat, model, loss.epsilon)[0]
    if loss.kind == "vi":
        return _vi(theta, x_hat, model)
    return kkt_residual(theta, x_hat, model, loss.kkt_norm)


def aggregate_risk(losses, weights=None, risk=None):
    """Aggregate per-observation losses.

    ``expected`` is the weighted mean; ``cvar`` at level ``alpha`` is
    ``min_tau tau + E[(l - tau)_+] / alpha``, evaluated exactly at the loss
    values; ``var`` at level ``chi`` is the lower weighted quantile
    ``min {l : P(L <= l) >= chi}``.
    """
    losses = np.asarray(losses, dtype=float).ravel()
    w = np.ones(losses.size) if weights is None else np.asarray(weights, dtype=float).ravel()
    if losses.size == 0:
        return 0.0
    risk = RiskSpec() if risk is None else (RiskSpec.parse(risk) if isinstance(risk, str) else risk)
    p = w / w.sum()
    if risk.kind == "expected":
        return float(p @ losses)
    if risk.kind == "cvar":
        taus = np.unique(losses)
        vals = [t + p @ np.maximum(losses - t, 0.0) / risk.level for t in taus]
        return float(min(vals))
    order = np.argsort(losses, kind="stable")
    cdf = np.cumsum(p[order])
    k = int(np.searchsorted(cdf, risk.level - 1e-12))
    return float(losses[order][min(k, losses.size - 1)])
