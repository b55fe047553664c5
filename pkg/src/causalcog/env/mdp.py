"""Finite MDPs and POMDPs over factored state spaces."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import OutOfRange, ZeroLikelihood
from ..rng import as_generator

ROW_TOL = 1e-12


def _frozen(a, dtype=np.float64) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mdp:
    """``transition[s, a, s']`` and ``reward[s, a]`` over flat state indices.

    States are row-major indices into the product of ``state_dims``.
    ``terminal`` marks absorbing zero-reward states that end an episode;
    ``initial`` is the start-state distribution.
    """

    state_dims: tuple
    n_actions: int
    transition: np.ndarray
    reward: np.ndarray
    discount: float
    initial: np.ndarray | None = None
    terminal: np.ndarray | None = None
    factor_names: tuple = ()
    action_names: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "state_dims", tuple(int(d) for d in self.state_dims))
        n_s, n_a = self.n_states, int(self.n_actions)
        object.__setattr__(self, "n_actions", n_a)
        object.__setattr__(self, "transition", _frozen(self.transition))
        object.__setattr__(self, "reward", _frozen(self.reward))
        if self.transition.shape != (n_s, n_a, n_s) or self.reward.shape != (n_s, n_a):
            raise OutOfRange(f"shapes {self.transition.shape}, {self.reward.shape} for {n_s}x{n_a}")
        if np.any(self.transition < 0) or np.max(np.abs(self.transition.sum(-1) - 1)) > ROW_TOL:
            raise OutOfRange("transition rows must be distributions")
        if not 0.0 <= self.discount < 1.0:
            raise OutOfRange(f"discount {self.discount} not in [0, 1)")
        initial = np.full(n_s, 1.0 / n_s) if self.initial is None else self.initial
        object.__setattr__(self, "initial", _frozen(initial))
        terminal = np.zeros(n_s, bool) if self.terminal is None else self.terminal
        object.__setattr__(self, "terminal", _frozen(terminal, bool))

    @property
    def n_states(self) -> int:
        return int(np.prod(self.state_dims))

    def encode(self, state) -> int:
        if np.isscalar(state):
            return int(state)
        return int(np.ravel_multi_index(tuple(int(v) for v in state), self.state_dims))

    def decode(self, index: int) -> tuple:
        return tuple(int(v) for v in np.unravel_index(int(index), self.state_dims))

    def states(self):
        return range(self.n_states)


@dataclass(frozen=True, eq=False)
class Pomdp:
    """An MDP observed through ``measurement[s, o] = P(o | s)``."""

    base: Mdp
    n_obs: int
    measurement: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "measurement", _frozen(self.measurement))
        if self.measurement.shape != (self.base.n_states, self.n_obs):
            raise OutOfRange(f"measurement shape {self.measurement.shape}")
        if np.any(self.measurement < 0) or np.max(np.abs(self.measurement.sum(-1) - 1)) > ROW_TOL:
            raise OutOfRange("measurement rows must be distributions")

    def __getattr__(self, name):
        # delegate MDP fields (transition, reward, discount, ...) to the base
        if name in ("base", "n_obs", "measurement"):
            raise AttributeError(name)
        return getattr(self.base, name)


def _check(mdp: Mdp, state: int, action: int):
    if not 0 <= state < mdp.n_states:
        raise OutOfRange(f"state {state} outside 0..{mdp.n_states - 1}")
    if not 0 <= action < mdp.n_actions:
        raise OutOfRange(f"action {action} outside 0..{mdp.n_actions - 1}")


def step(mdp: Mdp, state, action: int, seed) -> tuple[int, float]:
    """Sample a successor and return ``(next_state, reward(state, action))``."""
    mdp = getattr(mdp, "base", mdp)
    state = mdp.encode(state)
    _check(mdp, state, int(action))
    rng = as_generator(seed)
    nxt = rng.categorical(mdp.transition[state, action])
    return int(nxt), float(mdp.reward[state, action])


def observe(pomdp: Pomdp, state: int, seed) -> int:
    return int(as_generator(seed).categorical(pomdp.measurement[state]))


def reset(mdp: Mdp, seed) -> int:
    return int(as_generator(seed).categorical(getattr(mdp, "base", mdp).initial))


def belief_update(pomdp: Pomdp, belief, action: int, observation: int) -> np.ndarray:
    """One exact Bayes-filter step: predict through the transition, weight by
    the measurement likelihood, renormalize."""
    belief = np.asarray(belief, dtype=np.float64)
    if abs(belief.sum() - 1.0) > 1e-9:
        raise OutOfRange("belief must be normalized")
    if not 0 <= observation < pomdp.n_obs:
        raise OutOfRange(f"observation {observation} outside 0..{pomdp.n_obs - 1}")
    predicted = belief @ pomdp.base.transition[:, action, :]
    posterior = predicted * pomdp.measurement[:, observation]
    z = posterior.sum()
    if z <= 0.0:
        raise ZeroLikelihood(f"observation {observation} impossible after action {action}")
    return posterior / z


def fully_observed(mdp: Mdp) -> Pomdp:
    return Pomdp(mdp, mdp.n_states, np.eye(mdp.n_states))


def random_transitions(mdp: Mdp, n: int, seed, start=None) -> list[tuple[tuple, int, tuple]]:
    """``n`` consecutive ``(state, action, next)`` tuples under uniform random
    actions; terminal states restart from the initial distribution."""
    mdp = getattr(mdp, "base", mdp)
    rng = as_generator(seed)
    s = reset(mdp, rng) if start is None else mdp.encode(start)
    out = []
    for _ in range(n):
        if mdp.terminal[s]:
            s = reset(mdp, rng)
        a = rng.integers(mdp.n_actions)
        t, _ = step(mdp, s, a, rng)
        out.append((mdp.decode(s), a, mdp.decode(t)))
        s = t
    return out
