"""Reward-inclusive bisimulation by partition refinement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DECIMALS = 9  # rewards and block masses are compared after this rounding


@dataclass(frozen=True)
class Partition:
    """``block_of[s]`` is the block id of state ``s``; ids are numbered by
    the smallest member state, so block 0 always contains state 0."""

    block_of: tuple

    @property
    def n_blocks(self) -> int:
        return len(set(self.block_of))

    def blocks(self) -> list[frozenset]:
        out: dict[int, set] = {}
        for s, b in enumerate(self.block_of):
            out.setdefault(b, set()).add(s)
        return [frozenset(out[b]) for b in sorted(out)]

    def to_dict(self) -> dict:
        return {"block_of": list(self.block_of), "n_blocks": self.n_blocks}

    @classmethod
    def from_dict(cls, d: dict) -> "Partition":
        return cls(tuple(int(b) for b in d["block_of"]))


def _canonical(labels) -> tuple:
    ids: dict = {}
    return tuple(ids.setdefault(lab, len(ids)) for lab in labels)


def bisimulation_partition(mdp) -> Partition:
    """Coarsest partition in which same-block states share rewards and
    per-block transition mass for every action."""
    mdp = getattr(mdp, "base", mdp)
    transition = mdp.transition
    reward = np.round(mdp.reward, DECIMALS) + 0.0  # fold -0.0 into 0.0
    block = _canonical(tuple(r) for r in reward)
    while True:
        n_blocks = max(block) + 1
        onehot = np.zeros((len(block), n_blocks))
        onehot[np.arange(len(block)), block] = 1.0
        mass = np.round(transition @ onehot, DECIMALS) + 0.0  # (S, A, blocks)
        refined = _canonical((block[s], mass[s].tobytes()) for s in range(len(block)))
        if max(refined) + 1 == n_blocks:
            return Partition(refined)
        block = refined
