"""Factored transition models and their recovery from transition data.

Each next-step factor has a parent set drawn from the current-step factors and
the action; there are no edges within a time slice.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import Empty

ACTION = -1  # parent-set marker for the action


@dataclass(frozen=True, eq=False)
class FactoredTransition:
    """``tables[j][parent values..., v] = P(next factor j = v | parents)``.

    Parent sets are sorted tuples of factor indices, with :data:`ACTION`
    (listed last) when the action is a parent.
    """

    state_dims: tuple
    n_actions: int
    parents: tuple
    tables: tuple

    def __post_init__(self):
        object.__setattr__(self, "state_dims", tuple(self.state_dims))
        object.__setattr__(self, "parents", tuple(_sorted_parents(p) for p in self.parents))
        object.__setattr__(self, "tables", tuple(np.asarray(t, dtype=float) for t in self.tables))
        for j, (pa, t) in enumerate(zip(self.parents, self.tables)):
            expected = tuple(self._card(p) for p in pa) + (self.state_dims[j],)
            if t.shape != expected:
                raise ValueError(f"factor {j}: table shape {t.shape}, expected {expected}")

    def _card(self, p: int) -> int:
        return self.n_actions if p == ACTION else self.state_dims[p]

    @property
    def n_states(self) -> int:
        return int(np.prod(self.state_dims))

    def factor_probs(self, j: int, state: Sequence[int], action: int | None) -> np.ndarray:
        idx = tuple(action if p == ACTION else state[p] for p in self.parents[j])
        return self.tables[j][idx]

    def transition_row(self, state: Sequence[int], action: int | None) -> np.ndarray:
        """Distribution over flat next states as the product of factor conditionals."""
        row = np.ones(1)
        for j in range(len(self.state_dims)):
            row = np.multiply.outer(row, self.factor_probs(j, state, action)).ravel()
        return row

    def to_array(self) -> np.ndarray:
        """Full ``(S, A, S)`` transition tensor."""
        out = np.zeros((self.n_states, self.n_actions, self.n_states))
        for s in range(self.n_states):
            st = np.unravel_index(s, self.state_dims)
            for a in range(self.n_actions):
                out[s, a] = self.transition_row(st, a)
        return out

    def parent_sets(self, names: Sequence[str] | None = None, action_name: str = "action"):
        """Parent sets as sets of names (or indices)."""
        def label(p):
            if p == ACTION:
                return action_name
            return names[p] if names else p
        return [frozenset(label(p) for p in pa) for pa in self.parents]


def _sorted_parents(pa: Iterable[int]) -> tuple:
    pa = set(pa)
    return tuple(sorted(p for p in pa if p != ACTION)) + ((ACTION,) if ACTION in pa else ())


def _entropy(columns: list[np.ndarray], cards: list[int]) -> float:
    if not columns:
        return 0.0
    keys = np.ravel_multi_index(columns, cards)
    counts = np.unique(keys, return_counts=True)[1].astype(float)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def conditional_mutual_information(y, x, z: list, cards_y, cards_x, cards_z: list) -> float:
    """Plug-in ``I(Y; X | Z)`` in nats from aligned integer columns."""
    return (
        _entropy([y] + z, [cards_y] + cards_z)
        + _entropy([x] + z, [cards_x] + cards_z)
        - _entropy(z, cards_z)
        - _entropy([y, x] + z, [cards_y, cards_x] + cards_z)
    )


def learn_factored_dynamics(
    transitions,
    threshold: float = 0.01,
    state_dims: Sequence[int] | None = None,
    n_actions: int | None = None,
) -> FactoredTransition:
    """Greedy conditional-mutual-information parent selection per next factor.

    ``transitions`` holds ``(state, action, next_state)`` tuples; ``action`` may
    be ``None`` for action-free data, in which case the action is never a
    candidate parent. A candidate joins the parent set while its CMI with the
    next factor, given the parents chosen so far, exceeds ``threshold``.
    Conditional tables use add-one smoothed counts.
    """
    transitions = list(transitions)
    if not transitions:
        raise Empty("no transitions")
    states = np.array([s for s, _, _ in transitions], dtype=np.int64)
    nexts = np.array([t for _, _, t in transitions], dtype=np.int64)
    has_action = all(a is not None for _, a, _ in transitions)
    actions = np.array([a if a is not None else 0 for _, a, _ in transitions], dtype=np.int64)
    if state_dims is None:
        state_dims = tuple(int(v) + 1 for v in np.maximum(states.max(0), nexts.max(0)))
    state_dims = tuple(state_dims)
    if n_actions is None:
        n_actions = int(actions.max()) + 1
    n = len(state_dims)

    def column(p):
        return actions if p == ACTION else states[:, p]

    def card(p):
        return n_actions if p == ACTION else state_dims[p]

    candidates = list(range(n)) + ([ACTION] if has_action else [])
    parents, tables = [], []
    for j in range(n):
        y = nexts[:, j]
        chosen: list[int] = []
        while True:
            best, best_cmi = None, threshold
            for c in candidates:
                if c in chosen:
                    continue
                cmi = conditional_mutual_information(
                    y, column(c), [column(p) for p in chosen],
                    state_dims[j], card(c), [card(p) for p in chosen],
                )
                if cmi > best_cmi:
                    best, best_cmi = c, cmi
            if best is None:
                break
            chosen.append(best)
        pa = _sorted_parents(chosen)
        shape = tuple(card(p) for p in pa) + (state_dims[j],)
        counts = np.ones(shape)
        np.add.at(counts, tuple(column(p) for p in pa) + (y,), 1.0)
        tables.append(counts / counts.sum(axis=-1, keepdims=True))
        parents.append(pa)
    return FactoredTransition(state_dims, n_actions, tuple(parents), tuple(tables))


def dumps_transitions(transitions) -> str:
    """One record per line: ``state<TAB>action<TAB>next``; ``-`` for no action."""
    lines = []
    for s, a, t in transitions:
        act = "-" if a is None else str(int(a))
        lines.append(f"{' '.join(map(str, s))}\t{act}\t{' '.join(map(str, t))}")
    return "\n".join(lines) + ("\n" if lines else "")


def loads_transitions(text: str) -> list[tuple[tuple, int | None, tuple]]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        s, a, t = line.split("\t")
        out.append((
            tuple(int(v) for v in s.split()),
            None if a == "-" else int(a),
            tuple(int(v) for v in t.split()),
        ))
    return out
