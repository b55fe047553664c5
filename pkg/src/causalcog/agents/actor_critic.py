"""Tabular actor-critic training loop over a choice of state representation.

Each update collects ``batch_episodes`` on-policy episodes into the replay
buffer and takes one gradient step. The critic is a first-visit Monte-Carlo
value table over the most recent ``baseline_window`` egocentric episodes
collected before the current batch, so the baseline never depends on the
batch it corrects.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..disentangle import bin_codes
from ..env.dynamics import learn_factored_dynamics
from ..env.mdp import Mdp, Pomdp
from ..errors import ConfigError
from ..replay import importance
from ..replay.buffer import ReplayBuffer
from ..replay.records import SourceTag, Trajectory, Transition
from ..rng import Xoshiro256
from .policy import SoftmaxPolicy, ValueTable, policy_gradient, tail_returns
from .vae import GaussianVae


class RepresentationKind(enum.Enum):
    RAW = "raw"
    MIXED = "mixedObservation"
    LEARNED = "learnedCodes"


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 5000
    batch_episodes: int = 1
    step_size: float = 0.05
    eval_block: int = 100
    horizon: int = 50
    baseline_window: int = 100
    obs_scale: float = 8.0
    code_bins: int = 4

    def validate(self):
        for name in ("episodes", "batch_episodes", "eval_block", "horizon", "baseline_window"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be a positive integer")
        if self.step_size <= 0:
            raise ConfigError("step_size", "must be positive")
        if self.code_bins < 2:
            raise ConfigError("code_bins", "must be at least 2")


@dataclass(frozen=True, eq=False)
class Representation:
    """Maps an observation index (or state index) to a policy-table row."""

    kind: RepresentationKind
    n_reps: int
    table: np.ndarray | None = None  # observation -> row; None means identity

    def __call__(self, index: int) -> int:
        return int(index) if self.table is None else int(self.table[index])


def observation_vectors(pomdp, scale: float) -> np.ndarray:
    """Scaled one-hot vectors, one per observation index."""
    n_obs = pomdp.n_obs if isinstance(pomdp, Pomdp) else pomdp.n_states
    return scale * np.eye(n_obs)


def code_table(vae: GaussianVae, vectors: np.ndarray, bins: int) -> tuple[np.ndarray, int]:
    """Row index of every observation: its binned posterior-mean codes, renumbered
    densely in order of first appearance."""
    mu, _ = vae.encode(vectors)
    cells = bin_codes(mu, bins)
    keys: dict = {}
    table = np.array([keys.setdefault(tuple(c), len(keys)) for c in cells])
    return table, len(keys)


def build_representation(env, kind, vae: GaussianVae | None = None,
                         config: TrainConfig = TrainConfig()) -> Representation:
    kind = RepresentationKind(kind) if not isinstance(kind, RepresentationKind) else kind
    if kind is RepresentationKind.RAW:
        return Representation(kind, env.n_states)
    if kind is RepresentationKind.MIXED:
        n = env.n_obs if isinstance(env, Pomdp) else env.n_states
        return Representation(kind, n)
    if vae is None:
        raise ConfigError("representation", "learnedCodes needs a trained encoder")
    table, n = code_table(vae, observation_vectors(env, config.obs_scale), config.code_bins)
    return Representation(kind, n, table)


def view_of(env, rep: Representation, state: int, rng) -> int:
    """Policy-table row seen in ``state``; POMDP observations are sampled."""
    if rep.kind is RepresentationKind.RAW or not isinstance(env, Pomdp):
        return rep(state)
    return rep(rng.categorical(env.measurement[state]))


def run_episode(env, policy: SoftmaxPolicy, rep: Representation, rng, horizon: int,
                source: SourceTag = SourceTag.EGOCENTRIC, policy_id: str = "") -> tuple[Trajectory, float]:
    """Roll out one episode; returns the trajectory and its discounted return."""
    mdp: Mdp = getattr(env, "base", env)
    s = int(rng.categorical(mdp.initial))
    view = view_of(env, rep, s, rng)
    steps, g, disc = [], 0.0, 1.0
    for _ in range(horizon):
        if mdp.terminal[s]:
            break
        probs = policy.probs(view)
        a = int(rng.categorical(probs))
        nxt = int(rng.categorical(mdp.transition[s, a]))
        r = float(mdp.reward[s, a])
        nview = view_of(env, rep, nxt, rng)
        steps.append(Transition(view, a, r, nview, float(probs[a])))
        g += disc * r
        disc *= mdp.discount
        s, view = nxt, nview
    return Trajectory(tuple(steps), source, policy_id), g


@dataclass
class TrainResult:
    policy: SoftmaxPolicy
    curve: list  # (block, mean return, stderr)
    returns: np.ndarray
    source_counts: dict = field(default_factory=dict)
    representation: Representation | None = None
    model: object = None

    @property
    def final_return(self) -> float:
        return float(self.curve[-1][1]) if self.curve else float("nan")


def learning_curve(returns, block: int) -> list:
    out = []
    for b in range(len(returns) // block):
        chunk = np.asarray(returns[b * block:(b + 1) * block], dtype=np.float64)
        err = chunk.std(ddof=1) / np.sqrt(len(chunk)) if len(chunk) > 1 else 0.0
        out.append((b, float(chunk.mean()), float(err)))
    return out


class RollingCritic:
    """First-visit Monte-Carlo ``V`` over the last ``window`` trajectories it
    was given; equal to :func:`estimate_values` on that window."""

    def __init__(self, n_states: int, window: int, discount: float):
        self.window, self.discount = window, discount
        self.sums, self.counts = np.zeros(n_states), np.zeros(n_states)
        self._items: deque = deque()

    def add(self, traj: Trajectory):
        g = tail_returns([t.reward for t in traj.transitions], self.discount)
        first: dict = {}
        for t, step in enumerate(traj.transitions):
            first.setdefault(step.state, g[t])
        states = np.fromiter(first.keys(), dtype=np.int64, count=len(first))
        values = np.fromiter(first.values(), dtype=np.float64, count=len(first))
        self.sums[states] += values
        self.counts[states] += 1
        self._items.append((states, values))
        if len(self._items) > self.window:
            old_s, old_v = self._items.popleft()
            self.sums[old_s] -= old_v
            self.counts[old_s] -= 1

    def table(self) -> ValueTable:
        seen = self.counts > 0
        return ValueTable(np.divide(self.sums, self.counts, out=np.zeros_like(self.sums), where=seen), seen)


def train_actor_critic(env, representation="raw", config: TrainConfig = TrainConfig(), seed: int = 0,
                       vae: GaussianVae | None = None, plan=None,
                       buffer: ReplayBuffer | None = None) -> TrainResult:
    """Train a tabular softmax policy; the learning curve is the mean return of
    each ``eval_block`` consecutive training episodes.

    ``plan`` (from :func:`causalcog.replay.integrate`) adds social
    trajectories to every gradient batch with clipped importance weights, and
    may disable policy updates. ``buffer`` supplies the social and natural
    data the plan refers to.
    """
    config.validate()
    if not isinstance(env, (Mdp, Pomdp)):
        raise ConfigError("task", f"unsupported environment {type(env).__name__}")
    plan = plan or importance.IntegrationPlan()
    rep = build_representation(env, representation, vae, config)
    mdp = getattr(env, "base", env)
    shape = (rep.n_reps, mdp.n_actions)
    policy = SoftmaxPolicy.uniform(*shape)
    buffer = buffer if buffer is not None else ReplayBuffer()
    rng = Xoshiro256(seed)
    collect_rng, draw_rng = rng.spawn(), rng.spawn()
    counts = {tag.value: 0 for tag in SourceTag}
    returns = []
    critic = RollingCritic(rep.n_reps, config.baseline_window, mdp.discount)
    model = None
    if plan.learn_model:
        model = _natural_model(env, buffer)
        counts[SourceTag.NATURAL.value] = buffer.size(SourceTag.NATURAL)
    while len(returns) < config.episodes:
        baseline = critic.table()
        batch = []
        for _ in range(min(config.batch_episodes, config.episodes - len(returns))):
            traj, g = run_episode(env, policy, rep, collect_rng, config.horizon, policy_id=f"ego-{seed}")
            buffer.store(traj)
            critic.add(traj)
            batch.append(traj)
            returns.append(g)
        counts[SourceTag.EGOCENTRIC.value] += len(batch)
        if not plan.policy_updates:
            continue
        social = buffer.sample_batch({SourceTag.SOCIAL: 1.0}, plan.social_per_batch, draw_rng)
        counts[SourceTag.SOCIAL.value] += len(social)
        # each source is averaged on its own, then the two terms add
        grad = policy_gradient(batch, policy, baseline, mdp.discount)
        if social:
            grad += importance.off_policy_gradient(social, policy, baseline, mdp.discount, plan.clip)
        policy.logits += config.step_size * grad
    return TrainResult(policy, learning_curve(returns, config.eval_block), np.array(returns),
                       counts, rep, model)


def _natural_model(env, buffer: ReplayBuffer):
    """Factored dynamics fitted on the buffer's natural trajectories (flat
    state indices decoded into factor tuples)."""
    mdp = getattr(env, "base", env)
    data = [(mdp.decode(t.state), None, mdp.decode(t.next_state))
            for traj in buffer.trajectories(SourceTag.NATURAL) for t in traj.transitions]
    return learn_factored_dynamics(data, state_dims=mdp.state_dims, n_actions=mdp.n_actions)
