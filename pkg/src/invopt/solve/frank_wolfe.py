"""Away-step Frank-Wolfe over a polytope given by linear rows."""

import numpy as np

from .simplex import ITERATION_LIMIT, OPTIMAL, UNBOUNDED, LPResult, linprog


def _line_search(fun, grad, x, d, gmax, curvature):
    slope = float(grad(x) @ d)
    if slope >= 0:
        return 0.0
    if curvature is not None:
        c = float(curvature(x, d))
        if c <= 1e-300:
            return gmax
        return min(gmax, -slope / c)
    # derivative of a convex function along d is nondecreasing
    if float(grad(x + gmax * d) @ d) <= 0:
        return gmax
    lo, hi = 0.0, gmax
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if float(grad(x + mid * d) @ d) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * max(1.0, gmax):
            break
    return 0.5 * (lo + hi)


def frank_wolfe(fun, grad, A, b, senses=None, lb=None, ub=None, x0=None,
                tol=1e-8, max_iter=10_000, curvature=None, away=True):
    """Minimize a smooth convex function over ``{x : A x (senses) b, lb <= x <= ub}``.

    Parameters
    ----------
    fun, grad : callables
        Objective and its gradient.
    curvature : callable, optional
        ``curvature(x, d) = d' H d`` for quadratics; enables exact line
        search.  Otherwise the step is found by bisection on the
        directional derivative.
    away : bool
        Use away steps (linear convergence on polytopes for strongly
        convex objectives).

    Returns
    -------
    LPResult
        ``info`` holds ``gap`` and ``values`` (objective per iteration).
    """
    def lmo(gvec):
        res = linprog(gvec, A, b, senses, lb, ub)
        return res

    if x0 is None:
        first = lmo(np.zeros(len(lb) if lb is not None else np.asarray(A).shape[1]))
    else:
        first = lmo(grad(np.asarray(x0, dtype=float)))
    if first.status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    if not first.ok:
        return LPResult(first.status)
    x = first.x.copy()
    atoms = [x.copy()]
    weights = [1.0]
    values = [float(fun(x))]
    gap = np.inf
    for it in range(max_iter):
        g = grad(x)
        res = lmo(g)
        if res.status == UNBOUNDED:
            return LPResult(UNBOUNDED)
        s = res.x
        gap = float(g @ (x - s))
        if gap <= tol:
            return LPResult(OPTIMAL, x=x, objective=values[-1], iterations=it,
                            info={"gap": max(gap, 0.0), "values": values})
        d_fw = s - x
        use_away = False
        if away and len(atoms) > 1:
            scores = [float(g @ v) for v in atoms]
            k = int(np.argmax(scores))
            d_aw = x - atoms[k]
            if -float(g @ d_aw) > gap:
                use_away = True
        if use_away:
            a_k = weights[k]
            gmax = a_k / (1.0 - a_k) if a_k < 1.0 else 1e12
            step = _line_search(fun, grad, x, d_aw, gmax, curvature)
            x = x + step * d_aw
            weights = [w * (1 + step) for w in weights]
            weights[k] -= step
            if step >= gmax - 1e-15 or weights[k] <= 1e-14:
                del atoms[k], weights[k]
        else:
            step = _line_search(fun, grad, x, d_fw, 1.0, curvature)
            x = x + step * d_fw
            weights = [w * (1 - step) for w in weights]
            for j, v in enumerate(atoms):
                if np.allclose(v, s, atol=1e-12):
                    weights[j] += step
                    break
            else:
                atoms.append(s.copy())
                weights.append(step)
            if step >= 1 - 1e-15:
                atoms, weights = [s.copy()], [1.0]
            keep = [j for j, w in enumerate(weights) if w > 1e-14]
            atoms = [atoms[j] for j in keep]
            weights = [weights[j] for j in keep]
        values.append(float(fun(x)))
    return LPResult(ITERATION_LIMIT, x=x, objective=values[-1], iterations=max_iter,
                    info={"gap": gap, "values": values})
