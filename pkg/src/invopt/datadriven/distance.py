"""Distance-loss estimation: row search, delta-net enumeration and the VaR MILP."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import config as _config
from ..classical._common import Timer, run_big_m
from ..errors import EmptyNet, TooLarge, UnsupportedCombination
from ..model.data import OPTIMAL, EstimationResult
from ..model.forward import LinearForwardModel, canonicalize
from ..model.space import FixedComponent, L1Sphere, LInfSphere
from ..oracles import grid_points
from ..solve import LPBuilder, linprog, solve_qp
from .losses import RiskSpec, aggregate_risk, distance_to_optimal_set, optimal_face

MAX_NET = 100_000
TIE_TOL = 1e-9


def _check_linear(dataset):
    for model in dataset.models:
        if not isinstance(model, LinearForwardModel) or model.is_integer:
            raise UnsupportedCombination("the distance loss needs continuous linear forwards")


def _map(fn, items, config):
    threads = int(_config.get(config, "threads"))
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _piece_box(piece):
    """Coordinate-wise bounds of a polyhedron (``None`` if empty or unbounded)."""
    A, b, senses, lb, ub = piece.linprog_args()
    lo, hi = np.empty(piece.dim), np.empty(piece.dim)
    for i in range(piece.dim):
        e = np.zeros(piece.dim)
        e[i] = 1.0
        r_lo = linprog(e, A, b, senses, lb, ub)
        r_hi = linprog(-e, A, b, senses, lb, ub)
        if not (r_lo.ok and r_hi.ok):
            return None
        lo[i], hi[i] = r_lo.objective, -r_hi.objective
    return lo, hi


def delta_net(space, delta=0.05):
    """Points of the admissible set such that every admissible point lies near one.

    Up to three parameters a lattice of spacing ``delta`` is laid on each
    normalized piece; above that, a box lattice of each piece is projected
    onto it and de-duplicated.

    Raises
    ------
    EmptyNet
        If no lattice point is admissible (``delta`` too coarse).
    TooLarge
        If the net would exceed ``MAX_NET`` points or a piece is unbounded.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    d = space.dim
    if d <= 3:
        pts = grid_points(space, delta)
    else:
        found = []
        for piece in space.pieces():
            box = _piece_box(piece)
            if box is None:
                raise TooLarge("the delta-net needs a compact parameter set")
            lo, hi = box
            counts = np.maximum(np.round((hi - lo) / delta).astype(int), 0) + 1
            if np.prod(counts.astype(float)) > MAX_NET:
                raise TooLarge(f"delta-net would need {int(np.prod(counts.astype(float)))} points")
            axes = [np.linspace(l, h, c) for l, h, c in zip(lo, hi, counts)]
            A, b, senses, lb, ub = piece.linprog_args()
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
            for p in grid:
                if piece.contains(p, tol=1e-9):
                    found.append(p)
                    continue
                res = solve_qp(np.eye(d), -p, A, b, senses, lb, ub)
                if res.ok:
                    found.append(res.x)
        pts = np.array(found).reshape(-1, d)
        if pts.size:
            keep = [p for p in pts if space.contains(p, tol=1e-7)]
            pts = np.unique(np.round(np.array(keep).reshape(-1, d) / (delta / 4)) * (delta / 4), axis=0)
    if len(pts) == 0:
        raise EmptyNet(f"no admissible parameter on a net of spacing {delta:g}")
    if len(pts) > MAX_NET:
        raise TooLarge(f"delta-net has {len(pts)} points (limit {MAX_NET})")
    return pts


def _normalize_row(a, space):
    """Scale a row normal onto the normalization surface, or ``None``."""
    norm = space.normalization
    if not np.any(np.abs(a) > 1e-12):
        return None
    if isinstance(norm, L1Sphere):
        theta = a / np.abs(a[list(space.norm_dims)]).sum()
    elif isinstance(norm, LInfSphere):
        theta = a / np.abs(a[list(space.norm_dims)]).max()
    elif isinstance(norm, FixedComponent):
        if a[norm.index] * norm.value <= 0:
            return None
        theta = a * (norm.value / a[norm.index])
    else:
        theta = a / np.linalg.norm(a)
    if not np.all(np.isfinite(theta)) or not space.contains(theta, tol=1e-9):
        return None
    return theta


def _row_candidates(dataset, space):
    """``[(row, theta)]`` for the shared region, or ``None`` if some row normal is inadmissible."""
    model = dataset.models[0]
    can = canonicalize(model)
    sign = -1.0 if model.sense == "max" else 1.0
    out = []
    for j in range(can.m):
        theta = _normalize_row(sign * can.A[j], space)
        if theta is None:
            if np.any(np.abs(can.A[j]) > 1e-12):
                return None
            continue
        out.append((j, theta))
    return out


def _face_projection(can, j, x_hat):
    senses = [">="] * can.m
    senses[j] = "="
    res = solve_qp(np.eye(can.n), -x_hat, can.A, can.b, senses)
    if not res.ok:
        return None
    return float(np.linalg.norm(res.x - x_hat))


def _best(values):
    best = None
    for k, v in enumerate(values):
        if v is None:
            continue
        if best is None or v < values[best] - TIE_TOL * max(1.0, abs(values[best])):
            best = k
    return best


def estimate_distance(dataset, space, epsilon=0.0, delta=0.05, risk=None, config=None):
    """Minimize the risk of the Euclidean distance to the optimal set.

    On a shared region whose every row normal is admissible the search runs
    over the rows: the optimal set under ``a_j`` is the face
    ``a_j' x = b_j``, so projecting the observations onto each face and
    keeping the closest yields the exact minimizer ``a_j / ||a_j||``.
    Otherwise the relaxed loss (optimal set widened by ``epsilon``) is
    evaluated on a delta-net of the admissible set.

    Returns
    -------
    EstimationResult
        ``diagnostics`` record the method, net size and ``epsilon``; per
        observation losses are exact (unrelaxed) distances at ``theta_star``.

    Raises
    ------
    EmptyNet, TooLarge
    """
    _check_linear(dataset)
    risk = RiskSpec.parse(risk) if isinstance(risk, str) else (risk or RiskSpec())
    if risk.kind == "var":
        raise UnsupportedCombination("use estimate_var for quantile risk")
    w = dataset.weights
    obs = dataset.observations
    with Timer() as tm:
        cands = _row_candidates(dataset, space) if dataset.shared_region else None
        if cands:
            can = canonicalize(dataset.models[0])

            def row_risk(item):
                j, _ = item
                d = [_face_projection(can, j, o.x) for o in obs]
                return None if any(v is None for v in d) else aggregate_risk(d, w, risk)

            values = _map(row_risk, cands, config)
            k = _best(values)
            if k is None:
                raise EmptyNet("no row of the region defines a nonempty face")
            row, theta = cands[k]
            diag = {"method": "row_search", "row": int(row), "rows_searched": len(cands)}
        else:
            net = delta_net(space, delta)

            def net_risk(theta):
                d = [distance_to_optimal_set(theta, o.x, m, epsilon)[0] for o, m in dataset]
                return aggregate_risk(d, w, risk)

            values = _map(net_risk, list(net), config)
            k = _best(values)
            theta = net[k]
            diag = {"method": "delta_net", "net_size": len(net), "delta": float(delta)}
        per_obs = np.array([distance_to_optimal_set(theta, o.x, m)[0] for o, m in dataset])
    diag.update(
        epsilon=float(epsilon),
        relaxed_risk=float(values[k]),
        risk=risk.kind,
        risk_level=risk.level,
        runtime=tm.elapsed,
    )
    return EstimationResult(theta, aggregate_risk(per_obs, w, risk), OPTIMAL, per_obs, [], diag)


def distance_p(G, g, x_hat, p):
    """``min ||x - x_hat||_p`` over ``G x >= g`` for ``p`` in {1, inf} (LP)."""
    n = x_hat.size
    b = LPBuilder()
    x = b.var("x", n)
    b.rows([(x, G)], ">=", g)
    e, ones = _add_norm(b, x, x_hat, p, "e")
    b.minimize(e, ones)
    sol = b.solve()
    if not sol.ok:
        return math.inf
    return max(float(sol.objective), 0.0)


def _add_norm(b, x, x_hat, p, name):
    n = x_hat.size
    eye = np.eye(n)
    if p == 1:
        e = b.var(name, n, lb=0.0)
        b.rows([(e, eye), (x, -eye)], ">=", -x_hat)
        b.rows([(e, eye), (x, eye)], ">=", x_hat)
        return e, np.ones(n)
    e = b.var(name, 1, lb=0.0)
    col = np.ones((n, 1))
    b.rows([(e, col), (x, -eye)], ">=", -x_hat)
    b.rows([(e, col), (x, eye)], ">=", x_hat)
    return e, np.ones(1)


def _var_milp(faces, xs, p, k_min, M, config):
    """Quantile MILP for fixed optimal faces; returns ``(tau, pi)`` or ``None``."""
    N, n = xs.shape
    b = LPBuilder()
    tau = b.var("tau", 1, lb=0.0)
    pi = b.var("pi", N, lb=0.0, ub=1.0, integer=True)
    eye = np.eye(N)
    for i, (xh, (G, g)) in enumerate(zip(xs, faces)):
        x = b.var(f"x{i}", n)
        b.rows([(x, G)], ">=", g)
        e, ones = _add_norm(b, x, xh, p, f"e{i}")
        # sum(e) <= tau + M (1 - pi_i)
        b.row([(tau, [1.0]), (e, -ones), (pi, -M * eye[i])], ">=", -M)
    b.row([(pi, np.ones(N))], ">=", float(k_min))
    b.minimize(tau, [1.0])
    sol = b.solve(tol=_config.get(config, "lp.tol"), node_cap=int(_config.get(config, "milp.node_cap")))
    if not sol.ok:
        return None
    return float(sol["tau"][0]), np.round(sol["pi"]).astype(int)


def estimate_var(dataset, space, chi, p=1, epsilon=0.0, delta=0.05, big_m=None, config=None):
    """Minimize the ``chi``-quantile of the distance loss.

    Candidate parameters are the admissible row normals of a shared region
    or a delta-net otherwise.  For each candidate the quantile is the
    ``ceil(N chi)``-th smallest distance; the winner is then re-solved as a
    big-M MILP (minimize ``tau`` with at least ``ceil(N chi)`` selected
    observations within ``tau`` of the optimal set) which also reports the
    selection ``pi``.

    Parameters
    ----------
    chi : float in (0, 1]
    p : {1, inf}
        Norm of the distance.
    big_m : float, optional
        Bound on any observation's loss.  Validated: an explicit value that
        is binding or too small raises :class:`BigMViolation`.

    Returns
    -------
    EstimationResult
        ``extras['selected']`` holds ``pi``; ``objective_value`` is ``tau``.
    """
    _check_linear(dataset)
    if not 0 < chi <= 1:
        raise ValueError("chi must lie in (0, 1]")
    if p not in (1, np.inf):
        raise ValueError("the quantile MILP supports p = 1 or p = inf")
    obs = dataset.observations
    N = len(obs)
    k_min = int(math.ceil(N * chi - 1e-12))
    with Timer() as tm:
        cands = _row_candidates(dataset, space) if dataset.shared_region else None
        if cands:
            thetas = [t for _, t in cands]
            method = "row_search"
        else:
            thetas = list(delta_net(space, delta))
            method = "delta_net"

        def losses_at(theta):
            return np.array([distance_p(*optimal_face(m, theta, epsilon), o.x, p) for o, m in dataset])

        all_losses = _map(losses_at, thetas, config)
        quantiles = [float(np.sort(l)[k_min - 1]) for l in all_losses]
        k = _best(quantiles)
        theta = np.asarray(thetas[k])
        per_obs = all_losses[k]
        faces = [optimal_face(m, theta, epsilon) for _, m in dataset]
        xs = np.array([o.x for o in obs])

        def attempt(M):
            out = _var_milp(faces, xs, p, k_min, M, config)
            return None if out is None else (out, per_obs)

        (tau, pi), M = run_big_m(attempt, big_m, config, "quantile program")
    diag = {
        "method": method,
        "candidates": len(thetas),
        "k": k_min,
        "sorted_quantile": quantiles[k],
        "milp_gap": abs(tau - quantiles[k]),
        "big_m": M,
        "runtime": tm.elapsed,
    }
    return EstimationResult(theta, tau, OPTIMAL, per_obs, [], diag, {"selected": pi})
