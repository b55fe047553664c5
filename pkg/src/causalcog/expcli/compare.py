"""Paired bootstrap comparison of scorecards."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, TaskMismatch
from ..rng import Xoshiro256, as_generator
from .report import Scorecard

METRICS = ("finalReturn", "episodesToThreshold")


@dataclass(frozen=True)
class Comparison:
    first: str
    second: str
    metric: str
    mean_difference: float  # second minus first
    ci_low: float
    ci_high: float
    paired: bool

    @property
    def significant(self) -> bool:
        return self.ci_low > 0.0 or self.ci_high < 0.0

    def to_dict(self) -> dict:
        return {"first": self.first, "second": self.second, "metric": self.metric,
                "mean_difference": self.mean_difference, "ci_low": self.ci_low,
                "ci_high": self.ci_high, "paired": self.paired, "significant": self.significant}


def label(card: Scorecard) -> str:
    return f"{card.mode}/{card.representation}"


def episodes_to_threshold(card: Scorecard, seed: int, threshold: float) -> float:
    """Episodes until a block mean first reaches ``threshold``; the full
    budget when it never does."""
    for block, mean, _ in card.curves[seed]:
        if mean >= threshold:
            return float((block + 1) * card.eval_block)
    return float(card.budget)


def metric_values(card: Scorecard, metric: str, threshold: float | None = None) -> dict:
    if metric == "finalReturn":
        return {s: float(card.final_returns[s]) for s in card.seeds}
    if metric == "episodesToThreshold":
        return {s: episodes_to_threshold(card, s, threshold) for s in card.seeds}
    raise ConfigError("metric", f"unknown metric {metric!r}; expected one of {METRICS}")


def bootstrap_ci(values: np.ndarray, resamples: int, seed, level: float = 0.95) -> tuple[float, float]:
    """Percentile interval of the resampled mean."""
    values = np.asarray(values, dtype=np.float64)
    rng = as_generator(seed)
    idx = rng.integers(len(values), resamples * len(values)).reshape(resamples, len(values))
    means = values[idx].mean(axis=1)
    tail = (1.0 - level) / 2.0
    return float(np.quantile(means, tail)), float(np.quantile(means, 1.0 - tail))


def compare_pair(a: Scorecard, b: Scorecard, metric: str = "finalReturn",
                 resamples: int = 10_000, seed: int = 0, threshold: float | None = None) -> Comparison:
    if a.task != b.task:
        raise TaskMismatch(f"{a.task} vs {b.task}")
    if metric == "episodesToThreshold" and threshold is None:
        threshold = 0.9 * max(a.final_mean, b.final_mean)
    va, vb = metric_values(a, metric, threshold), metric_values(b, metric, threshold)
    rng = Xoshiro256(seed)
    common = [s for s in a.seeds if s in vb]
    if common and len(common) == len(a.seeds) == len(b.seeds):
        diffs = np.array([vb[s] - va[s] for s in common])
        low, high = bootstrap_ci(diffs, resamples, rng)
        return Comparison(label(a), label(b), metric, float(diffs.mean()), low, high, True)
    xa, xb = np.array(list(va.values())), np.array(list(vb.values()))
    ia = rng.integers(len(xa), resamples * len(xa)).reshape(resamples, -1)
    ib = rng.integers(len(xb), resamples * len(xb)).reshape(resamples, -1)
    d = xb[ib].mean(1) - xa[ia].mean(1)
    return Comparison(label(a), label(b), metric, float(xb.mean() - xa.mean()),
                      float(np.quantile(d, 0.025)), float(np.quantile(d, 0.975)), False)


def compare_agents(scorecards, metric: str = "finalReturn", resamples: int = 10_000,
                   seed: int = 0, threshold: float | None = None) -> list[Comparison]:
    """All ordered pairs ``(i, j)`` with ``i < j``; differences are ``j - i``."""
    scorecards = list(scorecards)
    if len(scorecards) < 2:
        raise ConfigError("scorecards", "need at least two scorecards")
    if metric not in METRICS:
        raise ConfigError("metric", f"unknown metric {metric!r}; expected one of {METRICS}")
    tasks = {c.task for c in scorecards}
    if len(tasks) > 1:
        raise TaskMismatch(f"scorecards span tasks {sorted(tasks)}")
    return [compare_pair(a, b, metric, resamples, seed, threshold)
            for a, b in itertools.combinations(scorecards, 2)]
