"""Per-source FIFO replay storage and its line-oriented dump format.

Dump format, one trajectory per line, tab separated::

    <source>\t<policy id>\t<step>\t<step>...

Egocentric and social steps are ``state,action,reward,next,behaviorProb``
(``behaviorProb`` may be ``-``); natural steps are ``state,next``. Floats are
written with 17 significant digits.
"""
from __future__ import annotations

from collections import deque
from typing import Mapping

import numpy as np

from ..errors import EmptySources, OutOfRange
from ..rng import as_generator
from .records import SourceTag, Trajectory, Transition

DEFAULT_CAPACITY = 1000


class ReplayBuffer:
    def __init__(self, capacity: int | Mapping[SourceTag, int] = DEFAULT_CAPACITY):
        if isinstance(capacity, Mapping):
            caps = {tag: int(capacity.get(tag, DEFAULT_CAPACITY)) for tag in SourceTag}
        else:
            caps = {tag: int(capacity) for tag in SourceTag}
        if min(caps.values()) < 1:
            raise OutOfRange("capacity must be positive")
        self.capacity = caps
        self._store = {tag: deque() for tag in SourceTag}

    def store(self, trajectory: Trajectory) -> "ReplayBuffer":
        queue = self._store[trajectory.source]
        queue.append(trajectory)
        if len(queue) > self.capacity[trajectory.source]:
            queue.popleft()
        return self

    def trajectories(self, source: SourceTag) -> list[Trajectory]:
        return list(self._store[source])

    def size(self, source: SourceTag | None = None) -> int:
        if source is None:
            return sum(len(q) for q in self._store.values())
        return len(self._store[source])

    def sample_batch(self, source_weights: Mapping[SourceTag, float], n: int, seed) -> list[Trajectory]:
        """``n`` draws: source by normalized weight, then uniform within source."""
        if n == 0:
            return []
        tags = [t for t in SourceTag if source_weights.get(t, 0.0) > 0 and self._store[t]]
        if not tags:
            raise EmptySources("no weighted source holds data")
        weights = np.array([float(source_weights[t]) for t in tags])
        if np.any(~np.isfinite(weights)):
            raise EmptySources("source weights must be finite")
        rng = as_generator(seed)
        picks = rng.categorical(weights / weights.sum(), n)
        out = []
        for k in picks:
            queue = self._store[tags[int(k)]]
            out.append(queue[rng.integers(len(queue))])
        return out

    def dumps(self) -> str:
        lines = []
        for tag in SourceTag:
            for traj in self._store[tag]:
                lines.append("\t".join([tag.value, traj.policy_id] + [_step(t) for t in traj.transitions]))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def loads(cls, text: str, capacity=DEFAULT_CAPACITY) -> "ReplayBuffer":
        buf = cls(capacity)
        for line in text.splitlines():
            if not line:
                continue
            tag, policy_id, *steps = line.split("\t")
            source = SourceTag(tag)
            buf.store(Trajectory(tuple(_parse_step(s, source) for s in steps), source, policy_id))
        return buf


def _num(x: float) -> str:
    return "%.17g" % x


def _step(t: Transition) -> str:
    if t.is_natural:
        return f"{t.state},{t.next_state}"
    bp = "-" if t.behavior_prob is None else _num(t.behavior_prob)
    return f"{t.state},{t.action},{_num(t.reward)},{t.next_state},{bp}"


def _parse_step(field: str, source: SourceTag) -> Transition:
    parts = field.split(",")
    if source is SourceTag.NATURAL:
        return Transition(int(parts[0]), None, None, int(parts[1]))
    s, a, r, nxt, bp = parts
    return Transition(int(s), int(a), float(r), int(nxt), None if bp == "-" else float(bp))
