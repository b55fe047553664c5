"""Exact planning by value iteration."""
from __future__ import annotations

import numpy as np

from ..agents.policy import ValueTable
from ..env.mdp import Mdp


def value_iteration_oracle(mdp: Mdp, tolerance: float = 1e-10) -> tuple[ValueTable, np.ndarray]:
    """Bellman optimality iteration until the sup-norm change drops below
    ``tolerance``. Returns ``V`` and the greedy policy (lowest action index on
    ties)."""
    mdp = getattr(mdp, "base", mdp)
    v = np.zeros(mdp.n_states)
    while True:
        q = mdp.reward + mdp.discount * (mdp.transition @ v)
        new = q.max(axis=1)
        done = np.max(np.abs(new - v)) < tolerance
        v = new
        if done:
            break
    q = mdp.reward + mdp.discount * (mdp.transition @ v)
    return ValueTable(v, np.ones(mdp.n_states, bool)), np.argmax(q, axis=1)


def optimal_start_value(mdp: Mdp, tolerance: float = 1e-10) -> float:
    v, _ = value_iteration_oracle(mdp, tolerance)
    return float(getattr(mdp, "base", mdp).initial @ v.values)
