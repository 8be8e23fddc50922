"""Online inverse optimization: MWU, OGD and implicit (proximal) updates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedObjective
from .model.data import Dataset, Observation
from .model.forward import ConvexForwardModel, LinearForwardModel, canonicalize
from .model.objectives import Quadratic
from .model.space import L1Sphere
from .solve import linprog, solve_forward, solve_qp

RULES = ("mwu", "ogd", "implicit")


@dataclass
class OnlineState:
    """State of an online estimator.

    Parameters
    ----------
    theta : array
        Current estimate ``theta_t`` (always admissible).
    space : ParameterSpace
    eta0 : float
    schedule : {'sqrt', 'constant'}
        ``eta_t = eta0 / sqrt(t)`` or ``eta_t = eta0``.
    t : int
        Observations processed so far.
    """

    theta: np.ndarray
    space: object
    eta0: float = 1.0
    schedule: str = "sqrt"
    t: int = 0
    cumulative_loss: float = 0.0
    history: list = field(default_factory=list)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).ravel().copy()
        if self.schedule not in ("sqrt", "constant"):
            raise ValueError("schedule must be 'sqrt' or 'constant'")
        if self.eta0 < 0:
            raise ValueError("eta0 must be nonnegative")

    def next_eta(self):
        """Step size of the upcoming round ``t + 1``."""
        if self.schedule == "constant":
            return self.eta0
        return self.eta0 / math.sqrt(self.t + 1)


def _is_simplex(space):
    return (
        isinstance(space.normalization, L1Sphere)
        and len(space.norm_dims) == space.dim
        and np.all(space.lb == 0)
        and np.all(np.isinf(space.ub))
        and space.G.shape[0] == 0
        and space.E.shape[0] == 0
    )


def project_simplex(v):
    """Euclidean projection onto ``{theta >= 0, sum theta = 1}`` (sort-based)."""
    v = np.asarray(v, dtype=float).ravel()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / idx > 0)[-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def project_to_space(point, space):
    """Euclidean projection onto the admissible set.

    Closed form on the probability simplex; otherwise one QP per convex
    piece, keeping the nearest (ties to the lowest piece index).
    """
    point = np.asarray(point, dtype=float).ravel()
    if _is_simplex(space):
        return project_simplex(point)
    if space.contains(point, tol=1e-12):
        return point.copy()
    best, best_d = None, np.inf
    for piece in space.pieces():
        A, b, senses, lb, ub = piece.linprog_args()
        res = solve_qp(np.eye(point.size), -point, A, b, senses, lb, ub)
        if not res.ok:
            continue
        d = float(np.linalg.norm(res.x - point))
        if d < best_d - 1e-12:
            best, best_d = res.x, d
    if best is None:
        raise ValueError("the admissible set is empty")
    return best


def _sense_sign(model):
    return 1.0 if getattr(model, "sense", "min") == "max" else -1.0


def mwu_update(theta, eta, x_star, x_hat, sense="max"):
    """Multiplicative step before projection.

    For a maximization forward this is ``theta - eta * theta * (x* - x_hat)``;
    for minimization the innovation changes sign so that the step still
    descends on the sub-optimality loss.
    """
    s = 1.0 if sense == "max" else -1.0
    theta = np.asarray(theta, dtype=float)
    return theta - eta * theta * s * (np.asarray(x_star, dtype=float) - np.asarray(x_hat, dtype=float))


def ogd_update(theta, eta, x_star, x_hat, sense="max"):
    """Additive step ``theta - eta (x* - x_hat)`` (sign flipped for minimization)."""
    s = 1.0 if sense == "max" else -1.0
    return np.asarray(theta, dtype=float) - eta * s * (np.asarray(x_star, dtype=float) - np.asarray(x_hat, dtype=float))


def _linear_round(state, x_hat, model, update):
    if not isinstance(model, LinearForwardModel):
        raise UnsupportedObjective("MWU and OGD need a linear forward objective")
    x_hat = np.asarray(getattr(x_hat, "x", x_hat), dtype=float).ravel()
    rep = solve_forward(model, theta=state.theta)
    x_star = rep.primal
    loss = abs(float(state.theta @ x_hat) - rep.objective)
    if loss <= 1e-9 * max(1.0, abs(rep.objective)):
        # x_hat is itself optimal; taking it as x* leaves theta in place
        x_star = x_hat
    eta = state.next_eta()
    raw = update(state.theta, eta, x_star, x_hat, model.sense)
    return _advance(state, project_to_space(raw, state.space), loss, eta)


def _advance(state, theta, loss, eta):
    record = {"t": state.t + 1, "theta": state.theta.copy(), "loss": loss, "eta": eta}
    new = OnlineState(theta, state.space, state.eta0, state.schedule, state.t + 1,
                      state.cumulative_loss + loss, state.history + [record])
    return new


def step_mwu(state, x_hat, model):
    """One multiplicative-weights round; returns the new state.

    The history record of round ``t`` stores ``theta_t`` (the estimate used
    for that observation) and its sub-optimality loss.
    """
    return _linear_round(state, x_hat, model, mwu_update)


def step_ogd(state, x_hat, model):
    """One projected online-gradient round; returns the new state."""
    return _linear_round(state, x_hat, model, ogd_update)


def _require_strict(model):
    if not (
        isinstance(model, ConvexForwardModel)
        and isinstance(model.objective, Quadratic)
        and model.objective.strictly_convex
    ):
        raise UnsupportedObjective("the implicit rule needs a strictly convex quadratic forward")


def response_distance(theta, x_hat, model):
    """``||x_hat - x*(theta)||_2`` for a strictly convex forward."""
    rep = solve_forward(model, theta=theta)
    return float(np.linalg.norm(rep.primal - x_hat))


def _pattern_search(fun, x0, space, step, tol=1e-7):
    """Compass search with projection onto the admissible set."""
    x, fx = x0.copy(), fun(x0)
    d = x0.size
    dirs = np.vstack([np.eye(d), -np.eye(d)])
    while step > tol:
        improved = False
        for e in dirs:
            y = project_to_space(x + step * e, space)
            fy = fun(y)
            if fy < fx - 1e-15:
                x, fx, improved = y, fy, True
                break
        if not improved:
            step *= 0.5
    return x, fx


def implicit_update(theta, eta, x_hat, model, space, grid=11):
    """``argmin ||theta' - theta||^2 + eta * distance(theta')`` by box grid plus pattern search.

    Any improvement over staying put lies within ``sqrt(eta * loss)`` of
    ``theta``; that box is gridded (projected onto the admissible set) and
    the best point refined by compass search.  The returned value never
    exceeds the objective of ``theta`` itself.
    """
    theta = np.asarray(theta, dtype=float)
    loss0 = response_distance(theta, x_hat, model)
    if eta <= 0 or loss0 <= 1e-12:
        return theta.copy(), eta * loss0

    def fun(th):
        return float(np.sum((th - theta) ** 2) + eta * response_distance(th, x_hat, model))

    radius = math.sqrt(eta * loss0)
    best, best_f = theta.copy(), eta * loss0
    if theta.size <= 3:
        axis = np.linspace(-radius, radius, grid)
        for off in np.stack(np.meshgrid(*[axis] * theta.size, indexing="ij"), -1).reshape(-1, theta.size):
            cand = project_to_space(theta + off, space)
            f = fun(cand)
            if f < best_f - 1e-15:
                best, best_f = cand, f
    return _pattern_search(fun, best, space, radius / max(grid - 1, 1))


def step_implicit(state, x_hat, model):
    """One implicit (proximal) round on the distance loss."""
    _require_strict(model)
    x_hat = np.asarray(getattr(x_hat, "x", x_hat), dtype=float).ravel()
    eta = state.next_eta()
    loss = response_distance(state.theta, x_hat, model)
    theta, _ = implicit_update(state.theta, eta, x_hat, model, state.space)
    return _advance(state, theta, loss, eta)


STEPS = {"mwu": step_mwu, "ogd": step_ogd, "implicit": step_implicit}


def region_diameter(model):
    """Diagonal of the bounding box of the feasible region (1 if unbounded)."""
    can = canonicalize(model)
    lo, hi = np.empty(can.n), np.empty(can.n)
    for i in range(can.n):
        e = np.zeros(can.n)
        e[i] = 1.0
        r1 = linprog(e, can.A, can.b, ">=")
        r2 = linprog(-e, can.A, can.b, ">=")
        if not (r1.ok and r2.ok):
            return 1.0
        lo[i], hi[i] = r1.objective, -r2.objective
    diam = float(np.linalg.norm(hi - lo))
    return diam if diam > 0 else 1.0


def initial_theta(space):
    """Projected prior, or the projection of the uniform vector."""
    start = space.prior if space.prior is not None else np.full(space.dim, 1.0 / space.dim)
    return project_to_space(start, space)


def _as_stream(stream):
    if isinstance(stream, Dataset):
        return [(o.x, m) for o, m in stream]
    return [(np.asarray(getattr(x, "x", x), dtype=float), m) for x, m in stream]


def _stream_dataset(items):
    models, index, obs = [], {}, []
    for x, m in items:
        k = index.setdefault(id(m), len(models))
        if k == len(models):
            models.append(m)
        obs.append(Observation(x, k))
    return Dataset(tuple(obs), tuple(models))


def batch_minimum(items, space, rule, delta=0.05):
    """Best cumulative loss in hindsight for the loss the rule optimizes."""
    import warnings

    from .datadriven import estimate_aso
    from .datadriven.distance import delta_net
    from .errors import DegenerateThetaWarning

    ds = _stream_dataset(items)
    if rule in ("mwu", "ogd"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateThetaWarning)
            res = estimate_aso(ds, space, allow_degenerate=True)
        return float(res.objective_value) * len(items), res.theta_star

    def total(th):
        return sum(response_distance(th, x, m) for x, m in items)

    net = delta_net(space, delta)
    vals = [total(th) for th in net]
    k = int(np.argmin(vals))
    theta, val = _pattern_search(total, net[k], space, delta)
    return val, theta


def run_stream(stream, space, rule="ogd", eta0=None, schedule="sqrt", theta0=None, checkpoints=None):
    """Process a stream and track the average regret.

    Parameters
    ----------
    stream : Dataset or sequence of ``(x_hat, model)``
    space : ParameterSpace
    rule : {'mwu', 'ogd', 'implicit'}
    eta0 : float, optional
        Defaults to ``1 / diameter`` of the first forward region.
    checkpoints : sequence of int, optional
        Rounds at which the average regret
        ``(sum_t loss_t(theta_t) - min_theta sum_t loss_t(theta)) / T`` is
        computed; the final round by default.

    Returns
    -------
    state : OnlineState
    regret : dict
        ``{T: average regret}``.
    """
    if rule not in STEPS:
        raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")
    items = _as_stream(stream)
    if not items:
        raise ValueError("empty stream")
    if eta0 is None:
        eta0 = 1.0 / region_diameter(items[0][1])
    theta = initial_theta(space) if theta0 is None else project_to_space(theta0, space)
    state = OnlineState(theta, space, eta0, schedule)
    T = len(items)
    marks = sorted({int(c) for c in (checkpoints or [T]) if 1 <= int(c) <= T})
    step = STEPS[rule]
    regret = {}
    for x, m in items:
        state = step(state, x, m)
        if state.t in marks:
            best, _ = batch_minimum(items[: state.t], space, rule)
            regret[state.t] = (state.cumulative_loss - best) / state.t
            state.history[-1]["avg_regret"] = regret[state.t]
    return state, regret
