"""Shared random instance builders."""

import numpy as np
import pytest

from invopt import LinearForwardModel
from invopt.model import MDPModel


def random_bounded_lp(rng, n=None, m=None, sense="min"):
    """Feasible LP in a box ``0 <= x <= 3`` plus random ``>=`` rows.

    A random interior point keeps the region nonempty; the box keeps it
    bounded, so every cost has a finite optimum.
    """
    n = n or int(rng.integers(2, 6))
    m = m if m is not None else int(rng.integers(1, 4))
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.5, 2.5, size=n)
    b = A @ x0 - rng.uniform(0.0, 1.0, size=m)
    A_full = np.vstack([A, np.eye(n), -np.eye(n)])
    b_full = np.concatenate([b, np.zeros(n), -3.0 * np.ones(n)])
    c = rng.normal(size=n)
    return LinearForwardModel(c, A_full, b_full, sense=sense)


def random_knapsack(rng, n=None):
    n = n or int(rng.integers(3, 7))
    w = rng.integers(1, 8, size=n).astype(float)
    cap = float(max(w.max(), np.floor(w.sum() / 2)))
    theta = rng.integers(1, 10, size=n).astype(float)
    return knapsack(theta, w, cap)


def knapsack(theta, w, cap):
    """``max theta'x`` over binary ``x`` with ``w'x <= cap``."""
    n = len(w)
    A = np.vstack([w, np.eye(n), np.eye(n)])
    b = np.concatenate([[cap], np.ones(n), np.zeros(n)])
    senses = ["<="] * (n + 1) + [">="] * n
    return LinearForwardModel(np.asarray(theta, float), A, b, senses, integer=np.ones(n, dtype=bool), sense="max")


def random_mdp(rng, S=4, A=3, gamma=0.9):
    P = rng.dirichlet(np.ones(S), size=(S, A))
    return MDPModel(P, gamma)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_cover():
    """``{x >= 0, x1 + x2 >= 1}``."""
    return LinearForwardModel(np.array([1.0, 1.0]), np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]),
                              np.array([1.0, 0.0, 0.0]))


def planted_stream(seed, T, size=3):
    """Noise-free stream on one fixed polytope, observations on the planted facet."""
    from invopt.apps import generate_instance

    inst = generate_instance("lp", seed=seed, size=size, n_obs=T)
    return inst, [(o.x, inst.model) for o in inst.observations.observations]


# -- acceptance report ------------------------------------------------------------------------------
ACCEPTANCE = {}


def record_criterion(number, title, ok, detail=""):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
