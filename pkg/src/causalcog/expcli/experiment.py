"""Run a configured experiment end to end and aggregate a scorecard."""
from __future__ import annotations

from collections import Counter

import numpy as np

from ..agents.actor_critic import (
    RepresentationKind,
    build_representation,
    observation_vectors,
    train_actor_critic,
    view_of,
)
from ..agents.vae import train_encoder
from ..disentangle import bin_codes, joint_from_arrays, score_disentanglement
from ..env.bisim import bisimulation_partition
from ..env.dynamics import learn_factored_dynamics
from ..env.mdp import Pomdp, random_transitions
from ..env.tasks import build_dispenser_task, build_trap_tube_task, dispenser_dynamics
from ..errors import ConfigError, MissingSource
from ..replay.buffer import ReplayBuffer
from ..replay.importance import ingest_natural, ingest_social, integrate
from ..replay.records import SourceTag
from ..rng import Xoshiro256, as_generator
from .config import ExperimentConfig, TaskSpec, validate_config
from .oracle import value_iteration_oracle
from .report import Scorecard

AUX_OFFSET = 1 << 63  # seeds for demonstrations and ghost data, disjoint from training seeds


def build_task(spec: TaskSpec):
    if spec.name == "trap_tube":
        return build_trap_tube_task(spec.length, spec.trap_effective, spec.discount)
    if spec.name == "dispenser":
        return build_dispenser_task(spec.flip_prob, spec.confound_weight, spec.discount)
    raise ConfigError("task.name", f"unknown task {spec.name!r}")


def _observe_index(env, state: int) -> int:
    if isinstance(env, Pomdp):
        return int(np.argmax(env.measurement[state]))
    return int(state)


def expert_demonstrations(env, rep, n: int, horizon: int, seed) -> list:
    """Episodes of the value-iteration policy recorded in the agent's
    representation, with action probabilities estimated from the pooled
    state-action frequencies."""
    mdp = getattr(env, "base", env)
    _, greedy = value_iteration_oracle(mdp)
    rng = as_generator(seed)
    episodes = []
    for _ in range(n):
        s = int(rng.categorical(mdp.initial))
        view = view_of(env, rep, s, rng)
        steps = []
        for _ in range(horizon):
            if mdp.terminal[s]:
                break
            a = int(greedy[s])
            nxt = int(rng.categorical(mdp.transition[s, a]))
            nview = view_of(env, rep, nxt, rng)
            steps.append((view, a, float(mdp.reward[s, a]), nview))
            s, view = nxt, nview
        episodes.append(steps)
    pairs = Counter((v, a) for ep in episodes for v, a, _, _ in ep)
    visits = Counter(v for ep in episodes for v, _, _, _ in ep)
    return [ingest_social(ep, [pairs[v, a] / visits[v] for v, a, _, _ in ep], "expert")
            for ep in episodes if ep]


def ghost_trajectories(env, n: int, seed) -> list:
    """Action-free chained segments of a randomly driven environment."""
    mdp = getattr(env, "base", env)
    data = random_transitions(mdp, n, seed)
    out, segment = [], []
    for s, _, t in data:
        s, t = mdp.encode(s), mdp.encode(t)
        if segment and segment[-1][1] != s:
            out.append(ingest_natural(segment))
            segment = []
        segment.append((s, t))
    if segment:
        out.append(ingest_natural(segment))
    return out


def representation_scores(env, kind: RepresentationKind, vae, config: ExperimentConfig):
    """Disentanglement scores of the policy's input codes against the task
    factors, with every state weighted equally."""
    mdp = getattr(env, "base", env)
    factors = np.array([mdp.decode(s) for s in range(mdp.n_states)])
    obs = np.array([_observe_index(env, s) for s in range(mdp.n_states)])
    if kind is RepresentationKind.RAW:
        codes = factors.copy()
    elif kind is RepresentationKind.MIXED:
        codes = obs[:, None]
    else:
        mu, _ = vae.encode(observation_vectors(env, config.train.obs_scale))
        codes = bin_codes(mu, config.train.code_bins)[obs]
    bins = max(2, max(len(np.unique(c)) for c in codes.T))
    joint = joint_from_arrays(factors, codes.astype(float), bins, mdp.state_dims)
    return score_disentanglement(joint)


def _names(parent_sets) -> dict:
    return {name: sorted(p) for name, p in parent_sets}


def train_vae(env, config: ExperimentConfig):
    mdp = getattr(env, "base", env)
    data = random_transitions(mdp, config.vae_dataset_size, Xoshiro256(config.vae.seed + AUX_OFFSET))
    vectors = observation_vectors(env, config.train.obs_scale)
    x = vectors[[_observe_index(env, mdp.encode(s)) for s, _, _ in data]]
    vae, _ = train_encoder(x, config.vae)
    return vae


def run_experiment(config: ExperimentConfig) -> Scorecard:
    """Train every seed under the configured integration mode and summarize."""
    validate_config(config)
    env = build_task(config.task)
    mdp = getattr(env, "base", env)
    vae = train_vae(env, config) if config.representation is RepresentationKind.LEARNED else None
    rep = build_representation(env, config.representation, vae, config.train)
    curves, finals, counts = {}, {}, Counter()
    natural_sets = None
    for seed in config.seeds:
        buffer = ReplayBuffer()
        aux = Xoshiro256(seed + AUX_OFFSET)
        if config.mode.value in ("EgoSocial", "SocialNatural", "Complete"):
            for traj in expert_demonstrations(env, rep, config.demonstrations, config.train.horizon, aux.spawn()):
                buffer.store(traj)
        if config.mode.value in ("EgoNatural", "SocialNatural", "Complete"):
            for traj in ghost_trajectories(env, config.natural_transitions, aux.spawn()):
                buffer.store(traj)
        try:
            plan = integrate(buffer, config.mode, config.social_per_batch, config.clip)
        except MissingSource as exc:
            raise ConfigError("integration.mode", str(exc)) from None
        result = train_actor_critic(env, config.representation, config.train, seed, vae, plan, buffer)
        curves[seed] = result.curve
        finals[seed] = result.final_return
        counts.update(result.source_counts)
        if result.model is not None and natural_sets is None:
            natural_sets = _names(zip(mdp.factor_names, result.model.parent_sets(mdp.factor_names)))
    final = np.array([finals[s] for s in config.seeds])
    stderr = float(final.std(ddof=1) / np.sqrt(len(final))) if len(final) > 1 else 0.0

    data = random_transitions(mdp, config.structure_samples, Xoshiro256(AUX_OFFSET - 1))
    learned = learn_factored_dynamics(data, config.cmi_threshold, mdp.state_dims, mdp.n_actions)
    parent_sets = _names(zip(mdp.factor_names, learned.parent_sets(mdp.factor_names)))
    exact = None
    if config.task.name == "dispenser":
        truth = dispenser_dynamics(config.task.flip_prob, config.task.confound_weight)
        exact = learned.parent_sets(mdp.factor_names) == truth.parent_sets(mdp.factor_names)
    v, _ = value_iteration_oracle(mdp)
    return Scorecard(
        task=config.task.name,
        mode=config.mode.value,
        representation=config.representation.value,
        seeds=list(config.seeds),
        budget=config.train.episodes,
        eval_block=config.train.eval_block,
        curves=curves,
        final_returns=finals,
        final_mean=float(final.mean()),
        final_stderr=stderr,
        score=representation_scores(env, config.representation, vae, config),
        n_states=mdp.n_states,
        partition=bisimulation_partition(mdp),
        parent_sets=parent_sets,
        parents_exact=exact,
        natural_parent_sets=natural_sets,
        source_counts={tag.value: int(counts[tag.value]) for tag in SourceTag},
        optimal_return=float(mdp.initial @ v.values),
    )
