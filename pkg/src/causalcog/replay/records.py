"""Source-tagged experience records."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import BrokenChain, OutOfRange


class SourceTag(enum.Enum):
    EGOCENTRIC = "Egocentric"
    SOCIAL = "Social"
    NATURAL = "Natural"


@dataclass(frozen=True)
class Transition:
    """One step. Natural transitions leave ``action``, ``reward`` and
    ``behavior_prob`` as ``None``."""

    state: int
    action: int | None
    reward: float | None
    next_state: int
    behavior_prob: float | None = None

    def __post_init__(self):
        if self.behavior_prob is not None and not 0.0 < self.behavior_prob <= 1.0:
            raise OutOfRange(f"behavior probability {self.behavior_prob} outside (0, 1]")

    @property
    def is_natural(self) -> bool:
        return self.action is None


@dataclass(frozen=True)
class Trajectory:
    transitions: tuple
    source: SourceTag
    policy_id: str = ""

    def __post_init__(self):
        steps = tuple(self.transitions)
        object.__setattr__(self, "transitions", steps)
        for prev, nxt in zip(steps, steps[1:]):
            if prev.next_state != nxt.state:
                raise BrokenChain(f"step ends in {prev.next_state} but next starts in {nxt.state}")
        natural = self.source is SourceTag.NATURAL
        for t in steps:
            if natural != t.is_natural:
                raise BrokenChain(f"{self.source.value} trajectory holds a mismatched transition")
            if natural and (t.reward is not None or t.behavior_prob is not None):
                raise BrokenChain("natural transitions carry no reward or behavior probability")

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def states(self) -> list[int]:
        return [t.state for t in self.transitions]

    @property
    def actions(self) -> list:
        return [t.action for t in self.transitions]

    @property
    def rewards(self) -> list:
        return [t.reward for t in self.transitions]
