"""Objective specifications whose gradients are affine in the parameter.

Every objective exposes ``grad_affine(x) -> (J, g0)`` with
``grad_x f(x, theta) = J @ theta + g0``, which is what the KKT, VI and
online estimators build their programs from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch


def _vec(v, n=None):
    v = np.array(v, dtype=float).ravel()
    if n is not None and v.size != n:
        raise DimensionMismatch(f"expected {n} entries, got {v.size}")
    v.setflags(write=False)
    return v


class ObjectiveSpec:
    """Common interface; subclasses are immutable."""

    n: int
    n_params: int
    theta: np.ndarray

    def _theta(self, theta):
        if theta is None:
            return self.theta
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != self.n_params:
            raise DimensionMismatch(f"parameter has {theta.size} entries, expected {self.n_params}")
        return theta

    def grad(self, x, theta=None):
        J, g0 = self.grad_affine(x)
        return J @ self._theta(theta) + g0

    def curvature(self, x, d, theta=None):
        """``d' H(x) d``, or None when no closed form is used."""
        return None

    @property
    def quadratic(self):
        """True when the objective is at most quadratic in x."""
        return False


@dataclass(frozen=True)
class Linear(ObjectiveSpec):
    """``f(x, theta) = theta' x``."""

    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _vec(self.theta))

    @property
    def n(self):
        return self.theta.size

    @property
    def n_params(self):
        return self.theta.size

    def value(self, x, theta=None):
        return float(self._theta(theta) @ np.asarray(x, dtype=float))

    def grad_affine(self, x):
        return np.eye(self.n), np.zeros(self.n)

    def curvature(self, x, d, theta=None):
        return 0.0

    @property
    def quadratic(self):
        return True

    def with_theta(self, theta):
        return Linear(theta)


@dataclass(frozen=True)
class Quadratic(ObjectiveSpec):
    """``f(x, theta) = 0.5 x' Phi x + psi' x - theta' x``.

    The parameter is the (negated) linear term, so the gradient
    ``Phi x + psi - theta`` is affine in theta.  ``Phi`` must be symmetric
    positive semidefinite.
    """

    Phi: np.ndarray
    psi: np.ndarray = None
    theta: np.ndarray = None

    def __post_init__(self):
        Phi = np.atleast_2d(np.asarray(self.Phi, dtype=float))
        n = Phi.shape[0]
        if Phi.shape != (n, n):
            raise DimensionMismatch("Phi must be square")
        if not np.allclose(Phi, Phi.T, atol=1e-12):
            raise ValueError("Phi must be symmetric")
        if np.linalg.eigvalsh(Phi).min(initial=0.0) < -1e-9:
            raise ValueError("Phi must be positive semidefinite")
        Phi = Phi.copy()
        Phi.setflags(write=False)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "psi", _vec(np.zeros(n) if self.psi is None else self.psi, n))
        object.__setattr__(self, "theta", _vec(np.zeros(n) if self.theta is None else self.theta, n))

    @property
    def n(self):
        return self.Phi.shape[0]

    @property
    def n_params(self):
        return self.n

    @property
    def strictly_convex(self):
        return bool(np.linalg.eigvalsh(self.Phi).min() > 1e-12)

    def value(self, x, theta=None):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Phi @ x + (self.psi - self._theta(theta)) @ x)

    def grad_affine(self, x):
        return -np.eye(self.n), self.Phi @ np.asarray(x, dtype=float) + self.psi

    def curvature(self, x, d, theta=None):
        return float(d @ self.Phi @ d)

    @property
    def quadratic(self):
        return True

    def with_theta(self, theta):
        return Quadratic(self.Phi, self.psi, theta)


@dataclass(frozen=True)
class PowerTerm:
    """``phi(x) = sum_i coef_i scale_i / p * (y_i / scale_i)^p`` with ``y = S x``.

    Its gradient is ``S' [coef_i (y_i / scale_i)^(p-1)]``.  For ``p > 1``
    negative aggregates are clipped at zero, which keeps the term convex
    for ``coef >= 0``.
    """

    coef: np.ndarray
    power: float = 1.0
    scale: np.ndarray = None
    S: np.ndarray = None

    def __post_init__(self):
        coef = _vec(self.coef)
        r = coef.size
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "scale", _vec(np.ones(r) if self.scale is None else self.scale, r))
        S = np.eye(r) if self.S is None else np.atleast_2d(np.asarray(self.S, dtype=float))
        if S.shape[0] != r:
            raise DimensionMismatch("aggregation matrix needs one row per coefficient")
        S = S.copy()
        S.setflags(write=False)
        object.__setattr__(self, "S", S)
        if self.power < 1:
            raise ValueError("power must be at least 1 for convexity")
        if np.any(self.scale <= 0):
            raise ValueError("scales must be positive")

    @property
    def n(self):
        return self.S.shape[1]

    def _ratio(self, x):
        y = self.S @ np.asarray(x, dtype=float)
        if self.power == 1:
            return y / self.scale
        return np.maximum(y, 0.0) / self.scale

    def value(self, x):
        u = self._ratio(x)
        return float(np.sum(self.coef * self.scale * u ** self.power) / self.power)

    def grad(self, x):
        u = self._ratio(x)
        return self.S.T @ (self.coef * u ** (self.power - 1))


@dataclass(frozen=True)
class Basis(ObjectiveSpec):
    """``f(x, theta) = base(x) + sum_k theta_k phi_k(x)``.

    Parameters
    ----------
    terms : sequence of PowerTerm
        One convex basis function per weight.
    base : sequence of PowerTerm, optional
        Fixed part of the objective (weight one).
    theta : (B,) array, optional
    signs : (B,) array of {+1, 0}
        ``+1`` forces the weight nonnegative (needed for convexity of the
        term); ``0`` leaves it free, only allowed for linear terms.
    """

    terms: tuple
    base: tuple = ()
    theta: np.ndarray = None
    signs: np.ndarray = field(default=None)

    def __post_init__(self):
        terms = tuple(self.terms)
        base = tuple(self.base)
        if not terms:
            raise ValueError("a basis objective needs at least one term")
        n = terms[0].n
        if any(t.n != n for t in terms + base):
            raise DimensionMismatch("all basis terms must act on the same variables")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "base", base)
        B = len(terms)
        object.__setattr__(self, "theta", _vec(np.zeros(B) if self.theta is None else self.theta, B))
        signs = np.ones(B) if self.signs is None else np.asarray(self.signs, dtype=float).ravel()
        for k, t in enumerate(terms):
            if signs[k] == 0 and t.power != 1:
                raise ValueError("only linear basis terms may carry a free-sign weight")
        object.__setattr__(self, "signs", _vec(signs, B))
        if np.any(self.theta * self.signs < -1e-12):
            raise ValueError("basis weights violate their sign constraints")

    @property
    def n(self):
        return self.terms[0].n

    @property
    def n_params(self):
        return len(self.terms)

    def value(self, x, theta=None):
        theta = self._theta(theta)
        return float(sum(t.value(x) for t in self.base) + sum(w * t.value(x) for w, t in zip(theta, self.terms)))

    def grad_affine(self, x):
        J = np.column_stack([t.grad(x) for t in self.terms])
        g0 = np.zeros(self.n)
        for t in self.base:
            g0 = g0 + t.grad(x)
        return J, g0

    def with_theta(self, theta):
        return Basis(self.terms, self.base, theta, self.signs)
