"""Importance-weighted gradients and ingestion of social and natural data."""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..agents.policy import SoftmaxPolicy, reject_natural, trajectory_gradient
from ..errors import MissingBehaviorProb, MissingSource, NaturalSourceRejected
from .buffer import ReplayBuffer
from .records import SourceTag, Trajectory, Transition


def importance_weight(trajectory: Trajectory, policy: SoftmaxPolicy) -> float:
    """``prod_t pi(a_t | s_t) / behaviorProb_t`` over the whole trajectory."""
    if trajectory.source is SourceTag.NATURAL:
        raise NaturalSourceRejected("natural trajectories have no actions to reweight")
    w = 1.0
    for t in trajectory.transitions:
        if t.behavior_prob is None:
            raise MissingBehaviorProb(f"step from state {t.state} lacks a behavior probability")
        w *= policy.prob(t.state, t.action) / t.behavior_prob
    return w


def importance_weights(trajectories, policy: SoftmaxPolicy) -> np.ndarray:
    return np.array([importance_weight(t, policy) for t in trajectories])


def clip_weight(w: float, cap: float | None) -> float:
    """Clamp to ``[1/cap, cap]``; ``cap=None`` leaves the weight untouched."""
    if cap is None:
        return w
    return float(min(max(w, 1.0 / cap), cap))


def off_policy_gradient(batch, policy: SoftmaxPolicy, baseline, discount: float,
                        clip: float | None = None, discount_weighting: bool = True) -> np.ndarray:
    """Batch mean of ``w(tau) * trajectory_gradient(tau)``."""
    batch = list(batch)
    reject_natural(batch)
    grad = np.zeros_like(policy.logits)
    if not batch:
        return grad
    for traj in batch:
        w = clip_weight(importance_weight(traj, policy), clip)
        grad += w * trajectory_gradient(traj, policy, baseline, discount, discount_weighting)
    return grad / len(batch)


def ingest_social(demonstrations, expert_probs=None, policy_id: str = "expert") -> Trajectory:
    """Social trajectory from ``(state, action, reward, next)`` tuples.

    ``expert_probs`` gives the expert's probability of each demonstrated
    action. Without it, probabilities are the empirical action frequencies per
    state over these demonstrations.
    """
    demonstrations = [tuple(d) for d in demonstrations]
    if expert_probs is None:
        by_state = Counter(s for s, _, _, _ in demonstrations)
        by_pair = Counter((s, a) for s, a, _, _ in demonstrations)
        expert_probs = [by_pair[s, a] / by_state[s] for s, a, _, _ in demonstrations]
    steps = tuple(
        Transition(int(s), int(a), float(r), int(n), float(p))
        for (s, a, r, n), p in zip(demonstrations, expert_probs)
    )
    return Trajectory(steps, SourceTag.SOCIAL, policy_id)


def ingest_natural(observed, policy_id: str = "natural") -> Trajectory:
    """Action-free trajectory from ``(state, next)`` pairs."""
    steps = tuple(Transition(int(s), None, None, int(n)) for s, n in observed)
    return Trajectory(steps, SourceTag.NATURAL, policy_id)


class Mode(enum.Enum):
    EGO_ONLY = "EgoOnly"
    EGO_SOCIAL = "EgoSocial"
    EGO_NATURAL = "EgoNatural"
    SOCIAL_NATURAL = "SocialNatural"
    COMPLETE = "Complete"


_REQUIRED = {
    Mode.EGO_ONLY: (),
    Mode.EGO_SOCIAL: (SourceTag.SOCIAL,),
    Mode.EGO_NATURAL: (SourceTag.NATURAL,),
    Mode.SOCIAL_NATURAL: (SourceTag.SOCIAL, SourceTag.NATURAL),
    Mode.COMPLETE: (SourceTag.SOCIAL, SourceTag.NATURAL),
}


@dataclass(frozen=True)
class IntegrationPlan:
    """How a training run draws on each source.

    ``social_per_batch`` social trajectories join every gradient batch;
    ``learn_model`` fits factored dynamics on the natural data;
    ``policy_updates`` is False only for the behaviorally silent mode.
    """

    mode: Mode = Mode.EGO_ONLY
    source_weights: dict = field(default_factory=lambda: {SourceTag.EGOCENTRIC: 1.0})
    social_per_batch: int = 0
    learn_model: bool = False
    policy_updates: bool = True
    clip: float | None = 10.0


def integrate(buffer: ReplayBuffer, mode, social_per_batch: int = 5, clip: float | None = 10.0) -> IntegrationPlan:
    mode = Mode(mode) if not isinstance(mode, Mode) else mode
    for tag in _REQUIRED[mode]:
        if buffer.size(tag) == 0:
            raise MissingSource(f"{mode.value} needs {tag.value} data")
    uses_social = SourceTag.SOCIAL in _REQUIRED[mode]
    uses_natural = SourceTag.NATURAL in _REQUIRED[mode]
    weights = {SourceTag.EGOCENTRIC: 0.0 if mode is Mode.SOCIAL_NATURAL else 1.0,
               SourceTag.SOCIAL: 1.0 if uses_social else 0.0,
               SourceTag.NATURAL: 1.0 if uses_natural else 0.0}
    return IntegrationPlan(
        mode=mode,
        source_weights=weights,
        social_per_batch=social_per_batch if uses_social else 0,
        learn_model=uses_natural,
        policy_updates=mode is not Mode.SOCIAL_NATURAL,
        clip=clip,
    )
