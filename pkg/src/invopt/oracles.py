"""Brute-force ground truth for small instances.

Nothing here calls the simplex or branch-and-bound code: vertices come from
solving every square subsystem, integer optima from lattice enumeration,
MDP optima from value iteration.  These functions back the test-suite and
the hidden ``invopt oracle`` command.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ForwardUnbounded, TooLarge
from .model.forward import ConvexForwardModel, LinearForwardModel, _canonical_rows, canonicalize

MAX_VARS = 8
MAX_ROWS = 20
MAX_POINTS = 2 ** 15
DEDUP_TOL = 1e-8


def _rows(A, b, senses=None, bounds=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    b = np.asarray(b, dtype=float).ravel()
    if senses is None:
        senses = [">="] * A.shape[0]
    elif isinstance(senses, str):
        senses = [senses] * A.shape[0]
    G, g = _canonical_rows(A, b, senses)
    if bounds is not None:
        lo, hi = bounds
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
        eye = np.eye(n)
        extra = [(eye[j], lo[j]) for j in range(n) if np.isfinite(lo[j])]
        extra += [(-eye[j], -hi[j]) for j in range(n) if np.isfinite(hi[j])]
        if extra:
            G = np.vstack([G, [e[0] for e in extra]])
            g = np.concatenate([g, [e[1] for e in extra]])
    return G, g


def enumerate_vertices(A, b, senses=None, bounds=None, tol=1e-9):
    """All vertices of ``{x : A x (senses) b, bounds}``.

    Every ``n``-subset of rows is solved as a square system; solutions that
    satisfy all rows are kept and deduplicated at 1e-8.

    Returns
    -------
    (k, n) array, possibly empty
    """
    G, g = _rows(A, b, senses, bounds)
    m, n = G.shape
    if n > MAX_VARS or m > MAX_ROWS:
        raise TooLarge(f"vertex enumeration limited to n <= {MAX_VARS}, rows <= {MAX_ROWS} (got {n}, {m})")
    if m < n:
        return np.zeros((0, n))
    combos = np.array(list(itertools.combinations(range(m), n)))
    mats = G[combos]
    rhs = g[combos]
    dets = np.linalg.det(mats)
    scale = np.abs(mats).max(axis=(1, 2)) ** n
    keep = np.abs(dets) > 1e-10 * np.maximum(scale, 1.0)
    if not keep.any():
        return np.zeros((0, n))
    pts = np.linalg.solve(mats[keep], rhs[keep][..., None])[..., 0]
    slack = pts @ G.T - g
    feas = np.all(slack >= -tol * (1 + np.abs(g)), axis=1)
    pts = pts[feas]
    out = []
    for p in pts:
        if not any(np.max(np.abs(p - q)) <= DEDUP_TOL * max(1.0, np.abs(q).max()) for q in out):
            out.append(p)
    out.sort(key=tuple)
    return np.array(out).reshape(-1, n)


def extreme_rays(A, senses=None):
    """Extreme rays of the recession cone ``{d : A d (senses) 0}`` (unit 1-norm)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    G, _ = _rows(A, np.zeros(A.shape[0]), senses)
    m, n = G.shape
    if n > MAX_VARS or m > MAX_ROWS:
        raise TooLarge("ray enumeration limited to small instances")
    rays = []
    if n == 1:
        cands = [np.array([1.0]), np.array([-1.0])]
    else:
        cands = []
        for rows in itertools.combinations(range(m), n - 1):
            sub = G[list(rows)]
            _, s, vt = np.linalg.svd(sub)
            if np.sum(s > 1e-10 * max(1.0, s.max(initial=0.0))) != n - 1:
                continue
            d = vt[-1]
            cands.extend([d, -d])
        if m < n - 1 or m == 0:
            cands.extend(np.eye(n))
            cands.extend(-np.eye(n))
    for d in cands:
        d = d / np.abs(d).sum()
        if np.all(G @ d >= -1e-9) and not any(np.allclose(d, r, atol=1e-8) for r in rays):
            rays.append(d)
    return np.array(rays).reshape(-1, n)


def _lattice_bounds(G, g, integer):
    n = G.shape[1]
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    for row, rhs in zip(G, g):
        nz = np.flatnonzero(np.abs(row) > 0)
        if nz.size != 1:
            continue
        j = nz[0]
        v = rhs / row[j]
        if row[j] > 0:
            lo[j] = max(lo[j], v)
        else:
            hi[j] = min(hi[j], v)
    return np.ceil(lo[integer] - 1e-9), np.floor(hi[integer] + 1e-9)


def integer_points(model):
    """Feasible integer assignments of a pure-integer model (lattice scan)."""
    can = canonicalize(model)
    if not can.integer.all():
        raise ValueError("lattice enumeration needs every variable integer")
    lo, hi = _lattice_bounds(can.A, can.b, can.integer)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise TooLarge("integer variables need finite bounds given by single-variable rows")
    sizes = np.maximum(hi - lo + 1, 0).astype(int)
    if np.prod(sizes.astype(float)) > MAX_POINTS:
        raise TooLarge(f"lattice has more than {MAX_POINTS} points")
    axes = [np.arange(l, h + 1) for l, h in zip(lo, hi)]
    pts = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, can.n)
    if pts.size == 0:
        return pts
    feas = np.all(pts @ can.A.T - can.b >= -1e-9, axis=1)
    return pts[feas] + 0.0


@dataclass
class OptimalSet:
    points: np.ndarray
    value: float


def brute_force_optimal_set(model, theta=None, tol=1e-9):
    """Optimal vertices (or lattice points) and value of a small linear model.

    Degenerate faces are represented by their vertex sets.  The value is in
    the model's own sense.

    Raises
    ------
    ForwardUnbounded
        If an extreme ray improves the objective.
    """
    cost = model.c if theta is None else np.asarray(theta, dtype=float)
    model = model.with_cost(cost)
    can = canonicalize(model)
    if can.integer.any():
        pts = integer_points(can)
    else:
        pts = enumerate_vertices(can.A, can.b)
        if pts.size and np.linalg.matrix_rank(can.A) == can.n:
            rays = extreme_rays(can.A)
            if rays.size and np.min(rays @ can.c) < -1e-10:
                raise ForwardUnbounded("objective improves along an extreme ray")
        elif can.A.shape[0] and np.linalg.matrix_rank(can.A) < can.n:
            raise ValueError("region has a lineality space and no vertices")
    if pts.size == 0:
        return OptimalSet(pts, float("nan"))
    vals = pts @ can.c
    best = vals.min()
    sel = pts[vals <= best + tol * max(1.0, abs(best))]
    sign = -1.0 if model.sense == "max" else 1.0
    return OptimalSet(sel, float(sign * best))


def verify_inverse_feasible(model, theta, x_hat, tol=1e-6):
    """Check ``x_hat`` is optimal for the forward model under ``theta``.

    Returns ``(ok, gap)``.  For linear models the gap is the optimality gap of
    ``x_hat`` in the model's sense; for convex models it is the first-order
    gap ``max_v grad f(x_hat)'(x_hat - v)`` over the vertices ``v``, which
    bounds the objective gap from above and vanishes exactly at optima.  An
    infeasible ``x_hat`` is never optimal (gap ``inf``).
    """
    x_hat = np.asarray(x_hat, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if not model.feasible(x_hat, tol=1e-7):
        return False, float("inf")
    if isinstance(model, ConvexForwardModel):
        can = canonicalize(model)
        grad = can.objective.grad(x_hat, theta)
        verts = enumerate_vertices(can.A, can.b)
        if verts.size == 0:
            return False, float("nan")
        gap = float(np.max((x_hat - verts) @ grad))
        return gap <= tol, max(gap, 0.0)
    opt = brute_force_optimal_set(model, theta)
    val = float(theta @ x_hat)
    gap = val - opt.value if model.sense == "min" else opt.value - val
    return gap <= tol, max(float(gap), 0.0)


def mdp_value_iteration(mdp, theta, tol=1e-10, max_iter=100_000):
    """Optimal values and greedy policy (ties to the lowest action index).

    Returns
    -------
    v : (S,) array
    policy : (S,) int array
    q : (S, A) array
    """
    S, A = mdp.n_states, mdp.n_actions
    r = np.asarray(theta, dtype=float).reshape(S, A)
    v = np.zeros(S)
    for _ in range(max_iter):
        q = r + mdp.gamma * mdp.P @ v
        v_new = q.max(axis=1)
        if np.max(np.abs(v_new - v)) <= tol * (1 - mdp.gamma) / max(mdp.gamma, 1e-12) * 0.5:
            v = v_new
            break
        v = v_new
    q = r + mdp.gamma * mdp.P @ v
    policy = np.argmax(q >= q.max(axis=1, keepdims=True) - 1e-9, axis=1)
    return v, policy, q


def policy_value(mdp, theta, policy):
    """Exact value of a deterministic policy by a linear solve."""
    S, A = mdp.n_states, mdp.n_actions
    r = np.asarray(theta, dtype=float).reshape(S, A)
    idx = np.arange(S)
    P = mdp.P[idx, policy]
    return np.linalg.solve(np.eye(S) - mdp.gamma * P, r[idx, policy])


def grid_points(space, resolution):
    """Lattice points of the admissible set at spacing ``resolution``.

    Normalized sets are gridded on each convex piece (simplex facets,
    orthants or L-inf facets); otherwise the finite box is gridded.
    """
    from .model.space import FixedComponent, L1Sphere, LInfSphere

    d = space.dim
    if d > 3:
        raise TooLarge("grid oracle limited to three parameters")
    r = float(resolution)
    norm = space.normalization
    pts = []
    if isinstance(norm, L1Sphere) and len(space.norm_dims) == d:
        k = int(round(1 / r))
        for comp in itertools.product(range(k + 1), repeat=d - 1):
            if sum(comp) > k:
                continue
            base = np.array(list(comp) + [k - sum(comp)], dtype=float) / k
            for signs in itertools.product((1.0, -1.0), repeat=d):
                pts.append(base * np.array(signs))
    elif isinstance(norm, LInfSphere) and len(space.norm_dims) == d:
        axis = np.linspace(-1, 1, int(round(2 / r)) + 1)
        for i in range(d):
            for s in (1.0, -1.0):
                for rest in itertools.product(axis, repeat=d - 1):
                    p = np.insert(np.array(rest, dtype=float), i, s)
                    pts.append(p)
    else:
        lo, hi = space.lb.copy(), space.ub.copy()
        if isinstance(norm, FixedComponent):
            lo[norm.index] = hi[norm.index] = norm.value
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise TooLarge("grid oracle needs a normalized or boxed parameter set")
        axes = [np.linspace(l, h, max(int(round((h - l) / r)), 0) + 1) for l, h in zip(lo, hi)]
        pts = [np.array(p) for p in itertools.product(*axes)]
    pts = [p for p in pts if space.contains(p, tol=1e-9)]
    if not pts:
        return np.zeros((0, d))
    pts = np.unique(np.round(np.array(pts), 12), axis=0) + 0.0
    return pts


def grid_min_loss(loss, dataset, space, resolution):
    """Exhaustive minimum of the weighted mean loss over ``grid_points``.

    ``loss`` is either a callable ``loss(theta, x_hat, model)`` or a
    :class:`invopt.datadriven.LossSpec`.
    """
    if not callable(loss):
        from .datadriven import eval_loss

        spec = loss

        def loss(theta, x_hat, model):
            return eval_loss(spec, theta, x_hat, model)

    pts = grid_points(space, resolution)
    if pts.size == 0:
        raise TooLarge("grid contains no admissible point")
    w = dataset.weights
    best, best_val = None, np.inf
    for p in pts:
        val = sum(wi * loss(p, o.x, m) for wi, (o, m) in zip(w, dataset)) / w.sum()
        if val < best_val - 1e-15:
            best, best_val = p, val
    return best, float(best_val)
