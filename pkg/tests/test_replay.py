import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalcog.agents import SoftmaxPolicy, build_representation, policy_gradient, softmax
from causalcog.env import DISPENSER_FACTORS, build_dispenser_task, build_trap_tube_task, learn_factored_dynamics
from causalcog.errors import (
    BrokenChain,
    EmptySources,
    MissingBehaviorProb,
    MissingSource,
    NaturalSourceRejected,
    OutOfRange,
)
from causalcog.expcli import expert_demonstrations, ghost_trajectories, optimal_start_value
from causalcog.replay import (
    Mode,
    ReplayBuffer,
    SourceTag,
    Trajectory,
    Transition,
    clip_weight,
    importance_weight,
    importance_weights,
    ingest_natural,
    ingest_social,
    integrate,
    off_policy_gradient,
)
from causalcog.rng import Xoshiro256

from oracles import exact_objective, value_iteration_loops
from toy import BEHAVIOR_LOGITS, HORIZON, TARGET_LOGITS, enumerated_trajectories, exact_lr, two_state_mdp

EGO, SOCIAL, NATURAL = SourceTag.EGOCENTRIC, SourceTag.SOCIAL, SourceTag.NATURAL


def ego(*steps, policy_id="p"):
    return Trajectory(tuple(Transition(*s) for s in steps), EGO, policy_id)


# ---------------------------------------------------------------- records and buffer

def test_broken_chain_is_rejected():
    with pytest.raises(BrokenChain):
        ego((0, 1, 0.0, 1, 0.5), (2, 0, 1.0, 3, 0.5))
    with pytest.raises(BrokenChain):
        ingest_natural([(0, 1), (0, 2)])
    with pytest.raises(BrokenChain):
        ingest_social([(0, 1, 0.0, 1), (3, 0, 1.0, 0)])


def test_natural_steps_cannot_carry_actions():
    with pytest.raises(BrokenChain):
        Trajectory((Transition(0, 1, 0.0, 1, 0.5),), NATURAL)
    with pytest.raises(BrokenChain):
        Trajectory((Transition(0, None, None, 1),), EGO)


def test_behavior_probability_must_be_positive():
    with pytest.raises(OutOfRange):
        Transition(0, 0, 1.0, 1, 0.0)


def test_store_at_capacity_evicts_oldest_of_that_source():
    buf = ReplayBuffer({EGO: 3, SOCIAL: 1})
    trajs = [ego((k, 0, 1.0, k + 1, 0.5)) for k in range(5)]
    for t in trajs:
        buf.store(t)
    buf.store(ingest_social([(0, 1, 0.0, 1)]))
    assert buf.size(EGO) == 3 and buf.trajectories(EGO) == trajs[2:]
    buf.store(ingest_social([(5, 1, 0.0, 6)]))
    assert buf.size(SOCIAL) == 1 and buf.trajectories(SOCIAL)[0].states == [5]
    assert buf.size() == 4


def test_dump_and_load_preserve_tags_and_steps():
    buf = ReplayBuffer()
    buf.store(ego((0, 1, 0.1, 1, 1 / 3), (1, 0, -2.5, 0, None), policy_id="ego-7"))
    buf.store(ingest_social([(2, 1, 1.0, 3)], [0.9], "expert"))
    buf.store(ingest_natural([(4, 5), (5, 6)]))
    buf.store(ingest_natural([]))
    back = ReplayBuffer.loads(buf.dumps())
    for tag in SourceTag:
        assert back.trajectories(tag) == buf.trajectories(tag)
    assert back.dumps() == buf.dumps()


def test_store_then_sample_returns_stored_objects_unchanged():
    buf = ReplayBuffer()
    trajs = [ego((k, 1, float(k), k + 1, 0.25)) for k in range(4)]
    for t in trajs:
        buf.store(t)
    for t in buf.sample_batch({EGO: 1.0}, 50, seed=3):
        assert any(t is s for s in trajs)


def _mixed_buffer():
    buf = ReplayBuffer()
    buf.store(ego((0, 0, 0.0, 1, 0.5)))
    buf.store(ingest_social([(0, 1, 1.0, 1)]))
    buf.store(ingest_natural([(0, 1)]))
    return buf


def test_sampling_weights_select_sources():
    buf = _mixed_buffer()
    assert {t.source for t in buf.sample_batch({EGO: 1.0, SOCIAL: 0.0, NATURAL: 0.0}, 200, 1)} == {EGO}
    draws = buf.sample_batch({EGO: 1.0, SOCIAL: 1.0}, 10_000, seed=4)
    share = sum(t.source is EGO for t in draws) / len(draws)
    assert abs(share - 0.5) <= 0.02
    assert buf.sample_batch({EGO: 1.0}, 0, seed=4) == []


def test_sampling_is_deterministic_in_seed():
    buf = ReplayBuffer()
    for k in range(20):
        buf.store(ego((k, 0, 0.0, k + 1, 0.5)))
    a = buf.sample_batch({EGO: 1.0}, 30, seed=9)
    assert a == buf.sample_batch({EGO: 1.0}, 30, seed=9)


def test_sampling_from_unweighted_or_empty_sources_fails():
    buf = ReplayBuffer()
    buf.store(ego((0, 0, 0.0, 1, 0.5)))
    with pytest.raises(EmptySources):
        buf.sample_batch({SOCIAL: 1.0}, 3, seed=0)
    with pytest.raises(EmptySources):
        buf.sample_batch({EGO: 0.0}, 3, seed=0)


# ---------------------------------------------------------------- importance weights

def test_weight_is_one_when_policies_coincide():
    mdp = two_state_mdp()
    policy = SoftmaxPolicy(TARGET_LOGITS)
    weights = importance_weights([t for t, _ in enumerated_trajectories(mdp, TARGET_LOGITS)], policy)
    assert np.allclose(weights, 1.0, atol=1e-12, rtol=0)


def test_single_step_weight_example():
    policy = SoftmaxPolicy(np.log([[0.8, 0.2]]))
    assert importance_weight(ego((0, 0, 1.0, 0, 0.4)), policy) == pytest.approx(2.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4),
       st.lists(st.tuples(st.integers(0, 1), st.floats(1e-3, 1.0)), min_size=1, max_size=6))
def test_weights_are_positive(logits, steps):
    policy = SoftmaxPolicy(np.array(logits).reshape(2, 2))
    t = ego(*[(0, a, 0.0, 0, p) for a, p in steps])
    assert importance_weight(t, policy) > 0


@pytest.mark.parametrize("gap", [14.01, 16.0, 30.0])
def test_large_logit_gap_gives_negligible_weight(gap):
    # a deterministic demonstrator took the action the policy all but rules out
    policy = SoftmaxPolicy(np.array([[0.0, -gap]]))
    assert 0 < importance_weight(ego((0, 1, 1.0, 0, 1.0)), policy) < 1e-6


def test_weights_need_behavior_probabilities_and_actions():
    policy = SoftmaxPolicy.uniform(2, 2)
    with pytest.raises(MissingBehaviorProb):
        importance_weight(ego((0, 1, 1.0, 1, None)), policy)
    with pytest.raises(NaturalSourceRejected):
        importance_weight(ingest_natural([(0, 1)]), policy)


@pytest.mark.parametrize("w, cap, expected", [(50.0, 10.0, 10.0), (1e-4, 10.0, 0.1), (3.0, 10.0, 3.0),
                                              (50.0, None, 50.0)])
def test_clip_bounds_weight_on_both_sides(w, cap, expected):
    assert clip_weight(w, cap) == expected


def test_weighted_return_is_unbiased_for_target_objective(behavior_episodes):
    mdp = two_state_mdp()
    policy = SoftmaxPolicy(TARGET_LOGITS)
    weights = importance_weights(behavior_episodes, policy)
    returns = np.array([sum(mdp.discount**i * r for i, r in enumerate(t.rewards)) for t in behavior_episodes])
    exact = exact_objective(mdp.transition, mdp.reward, mdp.initial, TARGET_LOGITS, mdp.discount, HORIZON)
    assert abs((weights * returns).mean() - exact) / exact < 0.02


def test_enumerated_off_policy_gradient_equals_exact_gradient():
    mdp = two_state_mdp()
    policy = SoftmaxPolicy(TARGET_LOGITS)
    expected = sum(p * off_policy_gradient([t], policy, None, mdp.discount)
                   for t, p in enumerated_trajectories(mdp, BEHAVIOR_LOGITS))
    assert np.allclose(expected, exact_lr(mdp, TARGET_LOGITS), atol=1e-9, rtol=0)


def test_off_policy_gradient_on_own_data_equals_policy_gradient():
    mdp = two_state_mdp()
    policy = SoftmaxPolicy(TARGET_LOGITS)
    batch = [t for t, _ in enumerated_trajectories(mdp, TARGET_LOGITS)][:40]
    baseline = np.array([0.7, 1.1])
    a = off_policy_gradient(batch, policy, baseline, mdp.discount)
    b = policy_gradient(batch, policy, baseline, mdp.discount)
    assert np.allclose(a, b, atol=1e-12, rtol=0)


def test_gradients_refuse_natural_data():
    policy = SoftmaxPolicy.uniform(3, 2)
    natural = ingest_natural([(0, 1), (1, 2)])
    with pytest.raises(NaturalSourceRejected):
        off_policy_gradient([natural], policy, None, 0.9)
    with pytest.raises(NaturalSourceRejected):
        policy_gradient([ego((0, 0, 1.0, 1, 0.5)), natural], policy, None, 0.9)


# ---------------------------------------------------------------- ingestion

def test_supplied_expert_probabilities_are_kept():
    pi = softmax(TARGET_LOGITS)
    demo = [(0, 1, 1.0, 1), (1, 0, 1.5, 0)]
    t = ingest_social(demo, [pi[0, 1], pi[1, 0]])
    assert t.source is SOCIAL and [s.behavior_prob for s in t.transitions] == [pi[0, 1], pi[1, 0]]


def test_estimated_probabilities_are_state_conditional_frequencies():
    deterministic = ingest_social([(0, 1, 0.0, 1), (1, 0, 0.0, 0), (0, 1, 0.0, 1)])
    assert [s.behavior_prob for s in deterministic.transitions] == [1.0, 1.0, 1.0]
    mixed = ingest_social([(0, 1, 0.0, 0), (0, 0, 0.0, 0), (0, 1, 0.0, 0), (0, 1, 0.0, 1)])
    assert [s.behavior_prob for s in mixed.transitions] == [0.75, 0.25, 0.75, 0.75]


def test_empty_natural_ingestion_gives_empty_trajectory():
    t = ingest_natural([])
    assert len(t) == 0 and t.source is NATURAL


def test_ghost_data_reveals_action_independent_mechanisms():
    env = build_dispenser_task(0.2)
    mdp = env.base
    data = [(mdp.decode(s.state), None, mdp.decode(s.next_state))
            for t in ghost_trajectories(env, 50_000, seed=5) for s in t.transitions]
    learned = learn_factored_dynamics(data, 0.01, mdp.state_dims, mdp.n_actions)
    parents = dict(zip(DISPENSER_FACTORS, learned.parent_sets(DISPENSER_FACTORS)))
    assert parents["food"] == {"mechanism", "obstruction"}
    assert parents["mechanism"] == {"button"}


def test_behaviour_cloning_from_expert_demonstrations():
    mdp = build_trap_tube_task(5)
    buf = ReplayBuffer()
    for t in expert_demonstrations(mdp, build_representation(mdp, "raw"), 20, 50, seed=1):
        buf.store(t)
    policy, rng = SoftmaxPolicy.uniform(mdp.n_states, mdp.n_actions), Xoshiro256(2)
    for _ in range(500):
        batch = buf.sample_batch({SOCIAL: 1.0}, 5, rng)
        policy.logits += 0.5 * off_policy_gradient(batch, policy, None, mdp.discount, clip=10.0)
    pi = policy.probs()
    chain = np.einsum("sa,sat->st", pi, mdp.transition)[:, None, :]
    v = value_iteration_loops(chain, (pi * mdp.reward).sum(axis=1)[:, None], mdp.discount)
    assert mdp.initial @ v >= 0.9 * optimal_start_value(mdp)


# ---------------------------------------------------------------- integration plans

def test_integration_modes_select_sources():
    buf = _mixed_buffer()
    plans = {m: integrate(buf, m, social_per_batch=3) for m in Mode}
    assert plans[Mode.EGO_ONLY].source_weights[EGO] == 1.0 and plans[Mode.EGO_ONLY].social_per_batch == 0
    assert plans[Mode.EGO_SOCIAL].social_per_batch == 3 and not plans[Mode.EGO_SOCIAL].learn_model
    assert plans[Mode.EGO_NATURAL].learn_model and plans[Mode.EGO_NATURAL].social_per_batch == 0
    assert not plans[Mode.SOCIAL_NATURAL].policy_updates
    assert plans[Mode.SOCIAL_NATURAL].source_weights[EGO] == 0.0
    complete = plans[Mode.COMPLETE]
    assert complete.learn_model and complete.policy_updates and complete.social_per_batch == 3


@pytest.mark.parametrize("mode", ["EgoSocial", "EgoNatural", "SocialNatural", "Complete"])
def test_missing_source_is_reported(mode):
    with pytest.raises(MissingSource):
        integrate(ReplayBuffer(), mode)


def test_complete_mode_accounts_for_every_draw():
    from causalcog.agents import TrainConfig, train_actor_critic

    env = build_dispenser_task(0.5)
    buf = ReplayBuffer()
    for t in expert_demonstrations(env, build_representation(env, "mixedObservation"), 5, 10, seed=0):
        buf.store(t)
    ghosts = ghost_trajectories(env, 500, seed=0)
    for t in ghosts:
        buf.store(t)
    plan = integrate(buf, Mode.COMPLETE, social_per_batch=2)
    config = TrainConfig(episodes=200, horizon=10)
    result = train_actor_critic(env, "mixedObservation", config, 0, plan=plan, buffer=buf)
    counts = result.source_counts
    assert counts[EGO.value] == 200
    assert counts[SOCIAL.value] == 2 * 200
    assert counts[NATURAL.value] == len(ghosts)
    assert sum(counts.values()) == 200 + 400 + len(ghosts)
    assert result.model is not None
