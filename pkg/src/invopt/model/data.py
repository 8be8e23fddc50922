"""Observations, MDPs and estimation results."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
ITERATION_LIMIT = "IterationLimit"
DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class Observation:
    x: np.ndarray
    instance: int = 0
    weight: float = 1.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        if not self.weight > 0:
            raise ValueError("observation weights must be positive")


@dataclass(frozen=True)
class Dataset:
    """Weighted observations, each pointing at a forward model in ``models``."""

    observations: tuple
    models: tuple

    def __post_init__(self):
        obs = tuple(o if isinstance(o, Observation) else Observation(*o) for o in self.observations)
        models = tuple(self.models) if isinstance(self.models, (list, tuple)) else (self.models,)
        if not obs:
            raise ValueError("a dataset needs at least one observation")
        for k, o in enumerate(obs):
            if not 0 <= o.instance < len(models):
                raise DimensionMismatch(f"observation {k} refers to missing instance {o.instance}")
            if o.x.size != models[o.instance].n:
                raise DimensionMismatch(
                    f"observation {k} has {o.x.size} entries, its model has {models[o.instance].n} variables"
                )
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "models", models)

    @classmethod
    def shared(cls, model, xs, weights=None):
        """All observations drawn from one forward model."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        weights = np.ones(len(xs)) if weights is None else weights
        return cls(tuple(Observation(x, 0, w) for x, w in zip(xs, weights)), (model,))

    @property
    def shared_region(self):
        return len(self.models) == 1

    @property
    def weights(self):
        return np.array([o.weight for o in self.observations])

    def __len__(self):
        return len(self.observations)

    def __iter__(self):
        for o in self.observations:
            yield o, self.models[o.instance]


@dataclass(frozen=True)
class MDPModel:
    """Finite MDP with rewards ``theta[s, a]`` (flattened state-major).

    Parameters
    ----------
    P : (S, A, S) array
        ``P[s, a, s']`` transition probabilities.
    gamma : float in [0, 1)
    reward_space : ParameterSpace over ``S * A`` components, optional
    """

    P: np.ndarray
    gamma: float
    reward_space: object = None

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise DimensionMismatch("transition array must have shape (S, A, S)")
        if np.any(P < -1e-12) or np.any(np.abs(P.sum(axis=2) - 1) > 1e-9):
            raise ValueError("transition rows must be probability vectors")
        if not 0 <= self.gamma < 1:
            raise ValueError("discount must lie in [0, 1)")
        P.setflags(write=False)
        object.__setattr__(self, "P", P)
        if self.reward_space is not None and self.reward_space.dim != P.shape[0] * P.shape[1]:
            raise DimensionMismatch("reward space must have one component per state-action pair")

    @property
    def n_states(self):
        return self.P.shape[0]

    @property
    def n_actions(self):
        return self.P.shape[1]


@dataclass
class EstimationResult:
    """Outcome of an estimator.

    ``extras`` carries estimator-specific arrays (recovered constraint
    matrices, completions, value functions, ...).
    """

    theta_star: np.ndarray | None
    objective_value: float
    status: str = OPTIMAL
    per_obs_loss: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == OPTIMAL
