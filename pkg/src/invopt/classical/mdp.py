"""Reward estimation for finite Markov decision processes."""

from __future__ import annotations

import numpy as np

from ..errors import InverseInfeasible
from ..model.data import EstimationResult
from ..oracles import mdp_value_iteration, policy_value
from ._common import Timer, solve_pieces


def estimate_mdp_rewards(mdp, policy, space=None, config=None):
    """Rewards closest to the prior under which ``policy`` is optimal.

    Values ``v`` and rewards ``theta`` satisfy the Bellman inequalities
    ``v_s >= theta_sa + gamma P_sa' v`` for every action and equality for
    the observed action.  Optimality of the policy is then re-checked by
    value iteration.

    Parameters
    ----------
    mdp : MDPModel
    policy : (S,) int array
        Observed action per state.
    space : ParameterSpace, optional
        Over the ``S * A`` rewards (state-major); ``mdp.reward_space`` by
        default.

    Returns
    -------
    EstimationResult
        ``extras['values']`` holds ``v``.

    Raises
    ------
    InverseInfeasible
    """
    space = mdp.reward_space if space is None else space
    if space is None:
        raise ValueError("a reward space is required")
    S, A = mdp.n_states, mdp.n_actions
    policy = np.asarray(policy, dtype=int).ravel()
    if policy.size != S or policy.min() < 0 or policy.max() >= A:
        raise ValueError("the policy must choose one valid action per state")
    eye = np.eye(S)

    def build(b, theta, _):
        v = b.var("v", S)
        for s in range(S):
            for a in range(A):
                row_v = eye[s] - mdp.gamma * mdp.P[s, a]
                row_t = np.zeros(S * A)
                row_t[s * A + a] = -1.0
                sense = "=" if a == policy[s] else ">="
                b.row([(v, row_v), (theta, row_t)], sense, 0.0)
        space.add_h(b, theta)

    with Timer() as tm:
        k, sol = solve_pieces(space, build, config)
    if k is None:
        raise InverseInfeasible("no admissible reward makes the policy optimal")
    theta = sol["theta"]
    v_opt, _, _ = mdp_value_iteration(mdp, theta)
    v_pol = policy_value(mdp, theta, policy)
    return EstimationResult(
        theta_star=theta,
        objective_value=space.h_value(theta),
        per_obs_loss=np.zeros(1),
        diagnostics={"piece": k, "policy_gap": float(np.max(v_opt - v_pol)), "runtime": tm.elapsed},
        extras={"values": sol["v"]},
    )
