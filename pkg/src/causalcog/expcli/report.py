"""Scorecards and their on-disk form.

Files written by :func:`emit_report`:

``curves.csv``
    ``seed,episodeBlock,meanReturn,stderr``, one row per seed and block.
``scorecard.json``
    Every scalar and set-valued field of the scorecard plus the
    disentanglement scores; keys sorted.
``mi_matrix.csv``
    Normalized mutual information, one row per factor, one column per code.
``partition.json``
    ``{"block_of": [...], "n_blocks": k}`` for the bisimulation partition.

Floats are written with 17 significant digits, so parsing recovers them
exactly and identical scorecards give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..disentangle import ScoreReport
from ..env.bisim import Partition


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def dumps_json(obj, indent: int = 0) -> str:
    """JSON with sorted keys, two-space indentation and 17-digit floats."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps_json(obj[k], indent + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + dumps_json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class Scorecard:
    task: str
    mode: str
    representation: str
    seeds: list
    budget: int
    eval_block: int
    curves: dict  # seed -> [(block, mean, stderr)]
    final_returns: dict  # seed -> final block mean
    final_mean: float
    final_stderr: float
    score: ScoreReport
    n_states: int
    partition: Partition
    parent_sets: dict
    parents_exact: bool | None = None
    natural_parent_sets: dict | None = None
    source_counts: dict = field(default_factory=dict)
    optimal_return: float | None = None

    @property
    def n_blocks(self) -> int:
        return self.partition.n_blocks

    @property
    def compression(self) -> float:
        return self.n_blocks / self.n_states

    def summary(self) -> dict:
        return {
            "task": self.task,
            "mode": self.mode,
            "representation": self.representation,
            "seeds": list(self.seeds),
            "budget": self.budget,
            "eval_block": self.eval_block,
            "final_returns": {str(k): v for k, v in self.final_returns.items()},
            "final_mean": self.final_mean,
            "final_stderr": self.final_stderr,
            "explicitness": {
                "informativeness": self.score.informativeness_score,
                "modularity": self.score.modularity_score,
                "parents_exact": self.parents_exact,
                "bisimulation_compression": self.compression,
            },
            "n_states": self.n_states,
            "n_blocks": self.n_blocks,
            "parent_sets": self.parent_sets,
            "natural_parent_sets": self.natural_parent_sets,
            "source_counts": self.source_counts,
            "optimal_return": self.optimal_return,
        }

    def __eq__(self, other):
        if not isinstance(other, Scorecard):
            return NotImplemented
        return (self.summary() == other.summary() and self.curves == other.curves
                and self.score == other.score and self.partition == other.partition)


def _curves_csv(card: Scorecard) -> str:
    buf = io.StringIO()
    buf.write("seed,episodeBlock,meanReturn,stderr\n")
    for seed in card.seeds:
        for block, mean, err in card.curves[seed]:
            buf.write(f"{seed},{block},{fmt(mean)},{fmt(err)}\n")
    return buf.getvalue()


def _matrix_csv(m: np.ndarray) -> str:
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in np.atleast_2d(m))


def report_files(card: Scorecard) -> dict[str, str]:
    return {
        "curves.csv": _curves_csv(card),
        "scorecard.json": dumps_json(card.summary()) + "\n",
        "mi_matrix.csv": _matrix_csv(card.score.mi_matrix),
        "partition.json": dumps_json(card.partition.to_dict()) + "\n",
    }


def emit_report(card: Scorecard, directory) -> list[str]:
    """Write the four report files, creating ``directory`` if needed.
    Raises ``OSError`` when the directory cannot be written."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, text in report_files(card).items():
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(path)
    return written


def load_report(directory) -> Scorecard:
    with open(os.path.join(directory, "scorecard.json"), encoding="utf-8") as fh:
        s = json.load(fh)
    curves: dict = {int(seed): [] for seed in s["seeds"]}
    with open(os.path.join(directory, "curves.csv"), encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            curves[int(row["seed"])].append(
                (int(row["episodeBlock"]), float(row["meanReturn"]), float(row["stderr"])))
    with open(os.path.join(directory, "mi_matrix.csv"), encoding="utf-8") as fh:
        mi = np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])
    with open(os.path.join(directory, "partition.json"), encoding="utf-8") as fh:
        partition = Partition.from_dict(json.load(fh))
    ex = s["explicitness"]
    return Scorecard(
        task=s["task"], mode=s["mode"], representation=s["representation"],
        seeds=[int(v) for v in s["seeds"]], budget=int(s["budget"]), eval_block=int(s["eval_block"]),
        curves=curves,
        final_returns={int(k): float(v) for k, v in s["final_returns"].items()},
        final_mean=float(s["final_mean"]), final_stderr=float(s["final_stderr"]),
        score=ScoreReport(mi, float(ex["modularity"]), float(ex["informativeness"])),
        n_states=int(s["n_states"]), partition=partition,
        parent_sets=s["parent_sets"], parents_exact=ex["parents_exact"],
        natural_parent_sets=s["natural_parent_sets"],
        source_counts=s["source_counts"], optimal_return=s["optimal_return"],
    )
