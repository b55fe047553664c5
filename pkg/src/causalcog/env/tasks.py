"""Two small causal tasks: a food dispenser and a trap tube.

Dispenser
    Factors ``button, mechanism, obstruction, food`` (and a hidden ``weight``
    when confounded). Actions ``press, clear, reach, noop``. All edges point
    from time ``t`` to ``t+1``::

        button'      = [a == press]
        mechanism'   = button (and weight, if confounded)
        obstruction' = 0 if a == clear else obstruction XOR Bernoulli(flip)
        food'        = mechanism and not obstruction
        weight'      = weight

    ``reach`` pays 1 when food is present. Episodes start from all zeros
    (weight uniform when confounded) and run for a fixed horizon.

Trap tube
    Factors ``rewardPos, trapPos, trapEffective`` over a tube of ``length``
    cells. Actions ``pushLeft, pushRight`` move the reward one cell. Reaching
    either end pays 1; landing on an effective trap pays 0. Both end the
    episode in an absorbing zero-reward state. An ineffective trap is passed
    over.
"""
from __future__ import annotations

import itertools

import numpy as np

from ..errors import OutOfRange
from .dynamics import ACTION, FactoredTransition
from .mdp import Mdp, Pomdp

PRESS, CLEAR, REACH, NOOP = range(4)
DISPENSER_ACTIONS = ("press", "clear", "reach", "noop")
DISPENSER_FACTORS = ("button", "mechanism", "obstruction", "food")
PUSH_LEFT, PUSH_RIGHT = 0, 1
TRAP_TUBE_ACTIONS = ("pushLeft", "pushRight")
TRAP_TUBE_FACTORS = ("rewardPos", "trapPos", "trapEffective")


def _deterministic(values, card):
    """One-hot rows from an integer array of outcomes."""
    values = np.asarray(values)
    return (values[..., None] == np.arange(card)).astype(float)


def dispenser_dynamics(flip_prob: float, confound_weight: bool = False) -> FactoredTransition:
    """Ground-truth factored dynamics of the dispenser."""
    if not 0.0 <= flip_prob <= 1.0:
        raise OutOfRange(f"flip probability {flip_prob} outside [0, 1]")
    a = np.arange(4)
    button = _deterministic(a == PRESS, 2)
    b, w = np.meshgrid(np.arange(2), np.arange(2), indexing="ij")
    o, act = np.meshgrid(np.arange(2), a, indexing="ij")
    p_one = np.where(act == CLEAR, 0.0, np.where(o == 1, 1.0 - flip_prob, flip_prob))
    obstruction = np.stack([1.0 - p_one, p_one], axis=-1)
    m, o2 = np.meshgrid(np.arange(2), np.arange(2), indexing="ij")
    food = _deterministic(m & (1 - o2), 2)
    dims = (2, 2, 2, 2)
    if confound_weight:
        dims += (2,)
        mechanism = _deterministic(b & w, 2)
        parents = ((ACTION,), (0, 4), (2, ACTION), (1, 2), (4,))
        tables = (button, mechanism, obstruction, food, np.eye(2))
    else:
        mechanism = np.eye(2)
        parents = ((ACTION,), (0,), (2, ACTION), (1, 2))
        tables = (button, mechanism, obstruction, food)
    return FactoredTransition(dims, 4, parents, tables)


def build_dispenser_task(
    flip_prob: float, confound_weight: bool = False, discount: float = 0.9
) -> Pomdp:
    """Dispenser as a POMDP whose observation is the visible factor tuple.

    The observation index is the row-major index of
    ``(button, mechanism, obstruction, food)``; the hidden weight, when
    present, is dropped.
    """
    dyn = dispenser_dynamics(flip_prob, confound_weight)
    n_s = dyn.n_states
    reward = np.zeros((n_s, 4))
    initial = np.zeros(n_s)
    for s in range(n_s):
        st = np.unravel_index(s, dyn.state_dims)
        reward[s, REACH] = float(st[3])
        if st[:4] == (0, 0, 0, 0):
            initial[s] = 1.0
    initial /= initial.sum()
    names = DISPENSER_FACTORS + (("weight",) if confound_weight else ())
    base = Mdp(dyn.state_dims, 4, dyn.to_array(), reward, discount, initial,
               factor_names=names, action_names=DISPENSER_ACTIONS)
    visible = np.array([
        np.ravel_multi_index(np.unravel_index(s, dyn.state_dims)[:4], (2, 2, 2, 2))
        for s in range(n_s)
    ])
    return Pomdp(base, 16, _deterministic(visible, 16))


def trap_tube_terminal(length: int, pos: int, trap: int, effective: int) -> bool:
    return pos in (0, length - 1) or (bool(effective) and pos == trap)


def build_trap_tube_task(length: int, trap_effective: bool = True, discount: float = 0.9) -> Mdp:
    """Trap tube of ``length`` cells. ``trap_effective`` fixes the trap factor
    in the start distribution; the state space always carries both values."""
    # an interior trap plus a distinct interior start cell needs two interior cells
    if int(length) != length or length < 4:
        raise OutOfRange(f"length {length} must be an integer >= 4")
    length = int(length)
    dims = (length, length, 2)
    n_s = length * length * 2
    transition = np.zeros((n_s, 2, n_s))
    reward = np.zeros((n_s, 2))
    terminal = np.zeros(n_s, bool)
    initial = np.zeros(n_s)
    for s, (pos, trap, eff) in enumerate(itertools.product(range(length), range(length), range(2))):
        if trap_tube_terminal(length, pos, trap, eff):
            terminal[s] = True
            transition[s, :, s] = 1.0
            continue
        for a, move in ((PUSH_LEFT, -1), (PUSH_RIGHT, 1)):
            new = pos + move
            transition[s, a, np.ravel_multi_index((new, trap, eff), dims)] = 1.0
            trapped = bool(eff) and new == trap
            reward[s, a] = 1.0 if new in (0, length - 1) and not trapped else 0.0
        interior = 0 < trap < length - 1
        if interior and pos != trap and eff == int(bool(trap_effective)):
            initial[s] = 1.0
    initial /= initial.sum()
    return Mdp(dims, 2, transition, reward, discount, initial, terminal,
               factor_names=TRAP_TUBE_FACTORS, action_names=TRAP_TUBE_ACTIONS)
