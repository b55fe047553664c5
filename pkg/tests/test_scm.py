import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causalcog.errors import (
    CyclicGraph,
    IllegalParent,
    IncompleteTable,
    NonInjectiveEmission,
    NotAFactor,
    OutOfDomain,
    TooLarge,
    UnnormalizedNoise,
)
from causalcog.scm import (
    Assignment,
    C,
    NoiseSpec,
    S,
    Scm,
    X,
    dumps_scm,
    exact_joint,
    index_emission,
    intervene,
    loads_scm,
    mechanism_table,
    random_scm,
    sample_scm,
    sample_scm_many,
    validate_scm,
)

from oracles import histogram, markov_product, total_variation


def build(cards, assignments, noises, conf_cards=(), conf_dists=()):
    emission, obs_noise, obs_card = index_emission(cards)
    return Scm(cards, conf_cards, conf_dists, noises, assignments, emission, obs_noise, obs_card)


def coins():
    return build(
        (2, 2),
        [Assignment(0, (), [0, 1]), Assignment(1, (), [0, 1])],
        [NoiseSpec.uniform(2), NoiseSpec.uniform(2)],
    )


def xor_chain(p=0.1):
    # S0 fair; S1 = S0 XOR Bernoulli(p)
    return build(
        (2, 2),
        [Assignment(0, (), [0, 1]), Assignment(1, (S(0),), [[0, 1], [1, 0]])],
        [NoiseSpec.uniform(2), NoiseSpec.bernoulli(p)],
    )


def confounded_fork():
    # C -> S0, C -> S1; both copy C with 10% noise
    copy = [[0, 1], [1, 0]]
    return build(
        (2, 2),
        [Assignment(0, (C(0),), copy), Assignment(1, (C(0),), copy)],
        [NoiseSpec.bernoulli(0.1), NoiseSpec.bernoulli(0.1)],
        conf_cards=(2,),
        conf_dists=(NoiseSpec((0.3, 0.7)),),
    )


def confounded_three():
    # C -> S0, C -> S2, S0 -> S1 -> S2
    return build(
        (2, 2, 2),
        [
            Assignment(0, (C(0),), [[0, 1], [1, 1]]),
            Assignment(1, (S(0),), [[0, 1, 1], [1, 1, 0]]),
            Assignment(2, (S(1), C(0)), [[[0, 1], [1, 0]], [[1, 1], [0, 1]]]),
        ],
        [NoiseSpec((0.6, 0.4)), NoiseSpec((0.5, 0.3, 0.2)), NoiseSpec((0.8, 0.2))],
        conf_cards=(2,),
        conf_dists=(NoiseSpec((0.35, 0.65)),),
    )


# validate_scm ---------------------------------------------------------------


def test_chain_dag_has_single_factor_edge():
    dag = validate_scm(xor_chain())
    factor_edges = {(u, v) for u, v in dag.edges if v.kind is S(0).kind}
    assert factor_edges == {(S(0), S(1))}
    assert dag.order == (0, 1)


def test_self_parent_rejected():
    scm = build((2,), [Assignment(0, (S(0),), [[0], [1]])], [NoiseSpec.point()])
    with pytest.raises(IllegalParent):
        validate_scm(scm)


def test_observable_parent_rejected():
    scm = build((2,), [Assignment(0, (X(0),), [[0], [1]])], [NoiseSpec.point()])
    with pytest.raises(IllegalParent):
        validate_scm(scm)


def test_three_cycle_rejected():
    copy = [[0], [1]]
    scm = build(
        (2, 2, 2),
        [Assignment(0, (S(2),), copy), Assignment(1, (S(0),), copy), Assignment(2, (S(1),), copy)],
        [NoiseSpec.point()] * 3,
    )
    with pytest.raises(CyclicGraph):
        validate_scm(scm)


def test_incomplete_table_and_bad_noise():
    bad_shape = build((2, 2), [Assignment(0, (), [0, 1]), Assignment(1, (S(0),), [0, 1])],
                      [NoiseSpec.uniform(2), NoiseSpec.point()])
    with pytest.raises(IncompleteTable):
        validate_scm(bad_shape)
    bad_noise = build((2,), [Assignment(0, (), [0, 1])], [NoiseSpec((0.5, 0.6))])
    with pytest.raises(UnnormalizedNoise):
        validate_scm(bad_noise)


def test_non_injective_emission_rejected():
    scm = Scm((2,), (), (), (NoiseSpec.uniform(2),), (Assignment(0, (), [0, 1]),),
              np.zeros((2, 1), dtype=int), NoiseSpec.point(), 1)
    with pytest.raises(NonInjectiveEmission):
        validate_scm(scm)


# sampling -------------------------------------------------------------------


def test_deterministic_copy_always_agrees():
    scm = build(
        (2, 2),
        [Assignment(0, (C(0),), [[0], [1]]), Assignment(1, (S(0),), [[0], [1]])],
        [NoiseSpec.point(), NoiseSpec.point()],
        conf_cards=(2,),
        conf_dists=(NoiseSpec.point(0, 2),),
    )
    for seed in range(20):
        (s0, s1), _, _ = sample_scm(scm, seed)
        assert s0 == s1


def test_same_seed_identical_triples():
    scm = confounded_three()
    assert sample_scm(scm, 123) == sample_scm(scm, 123)
    a = sample_scm_many(scm, 1000, 5)
    b = sample_scm_many(scm, 1000, 5)
    for x, y in zip(a, b):
        assert x.tobytes() == y.tobytes()


def test_single_sample_is_first_row_of_batch():
    scm = confounded_three()
    f, c, o = sample_scm_many(scm, 10, 77)
    assert sample_scm(scm, 77) == (tuple(f[0]), tuple(c[0]), int(o[0]))


def test_fair_coins_empirical_frequencies():
    factors, _, _ = sample_scm_many(coins(), 100_000, 2024)
    freq = histogram(factors.T, (2, 2))
    exact = exact_joint(coins()).probs
    assert np.all(np.abs(freq - exact) <= 0.01)


# exact_joint ----------------------------------------------------------------


def test_two_coins_uniform():
    np.testing.assert_allclose(exact_joint(coins()).probs, np.full((2, 2), 0.25), atol=1e-15)


def test_xor_noise_keeps_symmetry():
    joint = exact_joint(xor_chain(0.1), [S(1)])
    assert joint.probs[1] == pytest.approx(0.5, abs=1e-15)


def test_confounded_three_matches_million_sample_histogram():
    scm = confounded_three()
    joint = exact_joint(scm, [S(0), S(1), S(2), C(0)])
    f, c, _ = sample_scm_many(scm, 10**6, 99)
    freq = histogram([f[:, 0], f[:, 1], f[:, 2], c[:, 0]], (2, 2, 2, 2))
    assert total_variation(freq, joint.probs) < 0.005


def test_joint_includes_observation_and_marginal_order():
    scm = xor_chain()
    j = exact_joint(scm, [S(1), X(0), S(0)])
    assert j.probs.shape == (2, 4, 2)
    m = j.marginal([S(0), S(1)])
    np.testing.assert_allclose(m.probs, exact_joint(scm).probs, atol=1e-15)


def test_too_large_rejected():
    cards = (10,) * 7
    scm = build(cards, [Assignment(j, (), np.arange(10)) for j in range(7)],
                [NoiseSpec.uniform(10)] * 7)
    with pytest.raises(TooLarge):
        exact_joint(scm)


# intervene ------------------------------------------------------------------


def test_do_on_chain_equals_conditioning():
    scm = xor_chain(0.1)
    original = exact_joint(scm).probs
    cond = original[1] / original[1].sum()
    after = exact_joint(intervene(scm, {S(0): 1}), [S(1)]).probs
    np.testing.assert_allclose(after, cond, atol=1e-12)


def test_do_on_confounded_fork_differs_from_conditioning():
    scm = confounded_fork()
    joint = exact_joint(scm).probs
    marginal_s1 = joint.sum(axis=0)
    conditional = joint[1] / joint[1].sum()
    interventional = exact_joint(intervene(scm, {S(0): 1}), [S(1)]).probs
    np.testing.assert_allclose(interventional, marginal_s1, atol=1e-12)
    assert abs(interventional[1] - conditional[1]) > 0.1


def test_do_on_constant_factor_is_idempotent():
    scm = build((2, 2), [Assignment(0, (), [1]), Assignment(1, (S(0),), [[0, 1], [1, 0]])],
                [NoiseSpec.point(), NoiseSpec.bernoulli(0.2)])
    np.testing.assert_allclose(
        exact_joint(intervene(scm, {S(0): 1})).probs, exact_joint(scm).probs, atol=1e-15
    )


def test_intervene_errors_and_original_untouched():
    scm = confounded_fork()
    with pytest.raises(NotAFactor):
        intervene(scm, {C(0): 1})
    with pytest.raises(OutOfDomain):
        intervene(scm, {S(0): 2})
    before = dumps_scm(scm)
    intervene(scm, {S(1): 0})
    assert dumps_scm(scm) == before


# properties -----------------------------------------------------------------


scm_params = st.tuples(
    st.integers(0, 2**32), st.integers(1, 3), st.integers(0, 2), st.floats(0.2, 0.8)
).filter(lambda t: t[1] + t[2] <= 5)


@settings(max_examples=40, deadline=None)
@given(scm_params)
def test_markov_factorization(params):
    seed, n, m, edge = params
    scm = random_scm(seed, n_factors=n, n_confounders=m, edge_prob=edge)
    validate_scm(scm)
    include = [S(j) for j in range(n)] + [C(k) for k in range(m)]
    np.testing.assert_allclose(exact_joint(scm, include).probs, markov_product(scm), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(scm_params, st.data())
def test_intervention_truncated_factorization_and_cut_edges(params, data):
    seed, n, m, edge = params
    scm = random_scm(seed, n_factors=n, n_confounders=m, edge_prob=edge)
    j = data.draw(st.integers(0, n - 1))
    v = data.draw(st.integers(0, 1))
    done = intervene(scm, {S(j): v})
    assert validate_scm(done).in_degree(S(j)) == 0
    include = [S(i) for i in range(n)] + [C(k) for k in range(m)]
    np.testing.assert_allclose(
        exact_joint(done, include).probs, markov_product(scm, {j: v}), atol=1e-9
    )


@settings(max_examples=10, deadline=None)
@given(scm_params)
def test_sampling_consistency(params):
    seed, n, m, edge = params
    scm = random_scm(seed, n_factors=n, n_confounders=m, edge_prob=edge)
    f, c, _ = sample_scm_many(scm, 100_000, seed + 1)
    freq = histogram(list(f.T) + list(c.T), (2,) * (n + m))
    include = [S(j) for j in range(n)] + [C(k) for k in range(m)]
    assert total_variation(freq, exact_joint(scm, include).probs) < 0.02


def test_mechanism_table_rows_normalized():
    scm = confounded_three()
    for j in range(3):
        np.testing.assert_allclose(mechanism_table(scm, j).sum(axis=-1), 1.0, atol=1e-15)


def test_text_roundtrip():
    scm = confounded_three()
    text = dumps_scm(scm)
    back = loads_scm(text)
    assert back == scm
    assert dumps_scm(back) == text


def test_text_malformed():
    with pytest.raises(IncompleteTable):
        loads_scm("[factors]\ncardinalities = 2\n")
