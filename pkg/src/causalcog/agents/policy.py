"""Tabular softmax policies, Monte-Carlo critics and the policy gradient.

Trajectories are any objects with ``transitions`` (each carrying ``state``,
``action``, ``reward``) and a ``source`` whose ``value`` is ``"Natural"`` for
action-free data. Gradients share the shape of ``SoftmaxPolicy.logits``; the
parameter order of the flat vector is row-major.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import Empty, NaturalSourceRejected, OutOfRange
from ..rng import as_generator


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


@dataclass
class SoftmaxPolicy:
    """``pi(a | r) = softmax(logits[r])`` over representation indices ``r``."""

    logits: np.ndarray

    def __post_init__(self):
        self.logits = np.array(self.logits, dtype=np.float64)
        if self.logits.ndim != 2:
            raise OutOfRange("logits must be a (representations, actions) table")

    @classmethod
    def uniform(cls, n_reps: int, n_actions: int) -> "SoftmaxPolicy":
        return cls(np.zeros((n_reps, n_actions)))

    @property
    def n_actions(self) -> int:
        return self.logits.shape[1]

    def probs(self, rep: int | None = None) -> np.ndarray:
        if rep is None:
            return softmax(self.logits)
        return softmax(self.logits[rep])

    def prob(self, rep: int, action: int) -> float:
        return float(self.probs(rep)[action])

    def log_prob(self, rep: int, action: int) -> float:
        row = self.logits[rep]
        top = row.max()
        return float(row[action] - top - np.log(np.exp(row - top).sum()))

    def score(self, rep: int, action: int) -> np.ndarray:
        """Gradient of ``log pi(action | rep)`` with respect to all logits."""
        g = np.zeros_like(self.logits)
        g[rep] = -self.probs(rep)
        g[rep, action] += 1.0
        return g

    def sample(self, rep: int, seed) -> int:
        return int(as_generator(seed).categorical(self.probs(rep)))

    def copy(self) -> "SoftmaxPolicy":
        return SoftmaxPolicy(self.logits.copy())

    def to_dict(self) -> dict:
        return {"logits": self.logits.tolist()}

    @classmethod
    def from_dict(cls, d) -> "SoftmaxPolicy":
        return cls(np.array(d["logits"], dtype=np.float64))


@dataclass
class ValueTable:
    """Values with a visit mask; unvisited entries hold 0."""

    values: np.ndarray
    visited: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "ValueTable":
        return cls(np.zeros(shape), np.zeros(shape, bool))

    def __getitem__(self, idx):
        return self.values[idx]

    def shifted(self, c: float) -> "ValueTable":
        return ValueTable(self.values + c, self.visited.copy())


def discounted_return(rewards, discount: float, from_step: int = 0) -> float:
    rewards = list(rewards)
    if not 0 <= from_step < len(rewards):
        raise OutOfRange(f"from_step {from_step} outside 0..{len(rewards) - 1}")
    g = 0.0
    for r in reversed(rewards[from_step:]):
        g = r + discount * g
    return g


def tail_returns(rewards, discount: float) -> np.ndarray:
    """``G_t`` for every ``t`` in one backward pass."""
    out = np.zeros(len(rewards))
    g = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        g = rewards[t] + discount * g
        out[t] = g
    return out


def reject_natural(trajectories):
    for traj in trajectories:
        if getattr(traj.source, "value", traj.source) == "Natural":
            raise NaturalSourceRejected("action-free trajectories cannot drive gradients")


def estimate_values(trajectories, discount: float, n_states: int | None = None,
                    n_actions: int | None = None) -> tuple[ValueTable, ValueTable]:
    """First-visit Monte-Carlo estimates of ``V(s)`` and ``Q(s, a)``."""
    trajectories = list(trajectories)
    if not trajectories:
        raise Empty("no trajectories")
    reject_natural(trajectories)
    if n_states is None:
        n_states = 1 + max(max(t.state, t.next_state) for tr in trajectories for t in tr.transitions)
    if n_actions is None:
        n_actions = 1 + max(t.action for tr in trajectories for t in tr.transitions)
    v_sum, v_n = np.zeros(n_states), np.zeros(n_states)
    q_sum, q_n = np.zeros((n_states, n_actions)), np.zeros((n_states, n_actions))
    for traj in trajectories:
        steps = traj.transitions
        g = tail_returns([t.reward for t in steps], discount)
        seen_s, seen_sa = set(), set()
        for t, step in enumerate(steps):
            s, a = step.state, step.action
            if s not in seen_s:
                seen_s.add(s)
                v_sum[s] += g[t]
                v_n[s] += 1
            if (s, a) not in seen_sa:
                seen_sa.add((s, a))
                q_sum[s, a] += g[t]
                q_n[s, a] += 1
    v = ValueTable(np.divide(v_sum, v_n, out=np.zeros(n_states), where=v_n > 0), v_n > 0)
    q = ValueTable(np.divide(q_sum, q_n, out=np.zeros_like(q_sum), where=q_n > 0), q_n > 0)
    return v, q


def trajectory_gradient(traj, policy: SoftmaxPolicy, baseline, discount: float,
                        discount_weighting: bool = True) -> np.ndarray:
    """``sum_t w_t * score(a_t | s_t) * (G_t - V(s_t))`` for one trajectory,
    where ``w_t = discount**t`` (or 1 with ``discount_weighting=False``)."""
    steps = traj.transitions
    n_reps, n_actions = policy.logits.shape
    grad = np.zeros_like(policy.logits)
    if not steps:
        return grad
    states = np.array([t.state for t in steps])
    actions = np.array([t.action for t in steps])
    if states.min() < 0 or states.max() >= n_reps or actions.min() < 0 or actions.max() >= n_actions:
        raise OutOfRange("trajectory state or action outside the policy table")
    g = tail_returns([t.reward for t in steps], discount)
    base = np.zeros(len(steps)) if baseline is None else np.asarray(baseline[states], float)
    weight = discount ** np.arange(len(steps)) if discount_weighting else np.ones(len(steps))
    coef = weight * (g - base)
    score = -policy.probs()[states]
    score[np.arange(len(steps)), actions] += 1.0
    np.add.at(grad, states, coef[:, None] * score)
    return grad


def policy_gradient(trajectories, policy: SoftmaxPolicy, baseline, discount: float,
                    discount_weighting: bool = True) -> np.ndarray:
    """Batch mean of :func:`trajectory_gradient`.

    With ``discount_weighting`` the per-step term carries ``discount**t``,
    which makes the estimator unbiased for the discounted objective from the
    start state. ``discount_weighting=False`` drops that factor.
    """
    trajectories = list(trajectories)
    reject_natural(trajectories)
    grad = np.zeros_like(policy.logits)
    if not trajectories:
        return grad
    for traj in trajectories:
        grad += trajectory_gradient(traj, policy, baseline, discount, discount_weighting)
    return grad / len(trajectories)
