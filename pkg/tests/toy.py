"""Small hand-built problems shared by several test modules."""
import numpy as np

from causalcog.env import Mdp
from causalcog.agents import SoftmaxPolicy, run_episode, Representation, RepresentationKind

HORIZON = 3


def two_state_mdp(discount=0.9):
    # action 0 tends to stay, action 1 tends to switch; state 1 pays more
    t = np.array([
        [[0.8, 0.2], [0.3, 0.7]],
        [[0.25, 0.75], [0.6, 0.4]],
    ])
    r = np.array([[0.2, 1.0], [1.5, 0.1]])
    return Mdp((2,), 2, t, r, discount, initial=[0.6, 0.4])


TARGET_LOGITS = np.array([[0.3, -0.2], [-0.4, 0.5]])
BEHAVIOR_LOGITS = np.array([[0.0, 0.1], [0.1, 0.0]])


def sample_episodes(mdp, logits, n, seed, horizon=HORIZON):
    from causalcog.rng import Xoshiro256

    rng = Xoshiro256(seed)
    policy = SoftmaxPolicy(logits)
    rep = Representation(RepresentationKind.RAW, mdp.n_states)
    return [run_episode(mdp, policy, rep, rng, horizon)[0] for _ in range(n)]


def enumerated_trajectories(mdp, logits, horizon=HORIZON):
    """Every episode as ``(Trajectory, probability)``, built by recursion."""
    from causalcog.agents import softmax
    from causalcog.replay import SourceTag, Trajectory, Transition

    probs = softmax(np.asarray(logits, dtype=float))
    out = []

    def rec(s, steps, p):
        if len(steps) == horizon or mdp.terminal[s]:
            out.append((Trajectory(tuple(steps), SourceTag.EGOCENTRIC), p))
            return
        for a in range(mdp.n_actions):
            for t in range(mdp.n_states):
                q = probs[s, a] * mdp.transition[s, a, t]
                if q > 0:
                    rec(t, steps + [Transition(s, a, float(mdp.reward[s, a]), t, float(probs[s, a]))], p * q)

    for s0 in range(mdp.n_states):
        if mdp.initial[s0] > 0:
            rec(s0, [], float(mdp.initial[s0]))
    return out


def exact_lr(mdp, logits, horizon=HORIZON):
    from oracles import exact_gradient_lr

    return exact_gradient_lr(mdp.transition, mdp.reward, mdp.initial, logits, mdp.discount, horizon,
                             mdp.terminal)
