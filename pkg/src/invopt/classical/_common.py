"""Shared plumbing for the classical estimators."""

from __future__ import annotations

import time

import numpy as np

from .. import config as _config
from ..errors import BigMViolation, InverseInfeasible, ObservationInfeasible
from ..model.forward import canonicalize
from ..solve import LPBuilder, solve_forward

TIE_TOL = 1e-9


def check_observation(model, x_hat, tol=1e-7):
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    if not model.feasible(x_hat, tol=tol):
        raise ObservationInfeasible("the observed decision violates the forward constraints")
    return x_hat


def canonical_with_sign(model):
    """Canonical model plus the factor mapping a user cost onto the canonical one."""
    return canonicalize(model), (-1.0 if getattr(model, "sense", "min") == "max" else 1.0)


def solve_pieces(space, build, config=None, tie="index"):
    """Solve one program per convex piece of the admissible set.

    ``build(builder, theta_block, index)`` adds everything except the
    admissible-set rows.  Returns ``(index, solution)`` of the best piece
    (ties to the lowest index, or to the lexicographically smallest
    parameter when ``tie='lex'``), or ``(None, statuses)`` if none solved.
    """
    best = None
    statuses = []
    tol = _config.get(config, "lp.tol")
    cap = int(_config.get(config, "milp.node_cap"))
    for k, piece in enumerate(space.pieces()):
        b = LPBuilder()
        theta = piece.add_to(b, "theta")
        build(b, theta, k)
        sol = b.solve(tol=tol, node_cap=cap)
        statuses.append(sol.status)
        if not sol.ok:
            continue
        if best is None:
            best = (k, sol)
            continue
        diff = sol.objective - best[1].objective
        if diff < -TIE_TOL * max(1.0, abs(best[1].objective)):
            best = (k, sol)
        elif tie == "lex" and abs(diff) <= TIE_TOL * max(1.0, abs(best[1].objective)):
            if tuple(np.round(sol["theta"], 9)) < tuple(np.round(best[1]["theta"], 9)):
                best = (k, sol)
    if best is None:
        return None, statuses
    return best


def forward_gap(model, theta, x_hat, config=None):
    """Optimality gap of ``x_hat`` for the forward model under ``theta`` (model sense)."""
    rep = solve_forward(model, theta=theta, config=config, check=False)
    if not rep.ok:
        return float("inf")
    val = float(np.asarray(theta) @ x_hat)
    gap = val - rep.objective if getattr(model, "sense", "min") == "min" else rep.objective - val
    return max(gap, 0.0)


def big_m_schedule(big_m, config=None):
    """Big-M values to try: the explicit one alone, or the default with x10 retries."""
    if big_m is not None:
        return [float(big_m)], True
    base = float(_config.get(config, "bigm.default"))
    retries = int(_config.get(config, "bigm.retries"))
    return [base * 10 ** k for k in range(retries + 1)], False


def near_big_m(values, big_m):
    values = np.asarray(values, dtype=float)
    return bool(values.size and np.max(values) >= big_m - 1e-6)


def run_big_m(attempt, big_m, config=None, what="instance"):
    """Drive a big-M formulation through its validation and retry policy.

    ``attempt(M)`` returns ``None`` when infeasible, otherwise
    ``(payload, magnitudes)`` where ``magnitudes`` are the multipliers and
    slacks that must stay strictly below ``M``.
    """
    schedule, explicit = big_m_schedule(big_m, config)
    binding = False
    for M in schedule:
        out = attempt(M)
        if out is None:
            if explicit and attempt(M * 1e3) is not None:
                raise BigMViolation(f"big-M {M:g} is too small for this {what}", big_m=M)
            if explicit:
                break
            continue
        payload, magnitudes = out
        if near_big_m(magnitudes, M):
            if explicit:
                raise BigMViolation(f"a multiplier or slack reached big-M {M:g}", big_m=M)
            binding = True
            continue
        return payload, M
    if binding:
        raise BigMViolation(f"big-M still binding at {schedule[-1]:g} after retries", big_m=schedule[-1])
    raise InverseInfeasible(f"no admissible parameter certifies the {what}")


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False
