"""Finite structural causal models with confounders and explicit noise.

Every variable takes values ``0..k-1``. A factor is computed by a structural
assignment: a lookup table indexed by its parents' values and by the value of
its own noise variable. Confounders are exogenous root variables; the single
observable is produced by an emission table indexed by all factor values and
an observation-noise value.
"""
from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from ..errors import (
    CyclicGraph,
    IllegalParent,
    IncompleteTable,
    NonInjectiveEmission,
    NotAFactor,
    OutOfDomain,
    TooLarge,
    UnnormalizedNoise,
)
from ..rng import as_generator

MAX_ATOMS = 10**7
NOISE_TOL = 1e-12
JOINT_TOL = 1e-9


class Kind(enum.Enum):
    FACTOR = "S"
    CONFOUNDER = "C"
    OBSERVABLE = "X"


_KIND_ORDER = {Kind.FACTOR: 0, Kind.CONFOUNDER: 1, Kind.OBSERVABLE: 2}


class VariableId(NamedTuple):
    kind: Kind
    index: int

    def __str__(self):
        return f"{self.kind.value}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "VariableId":
        text = text.strip()
        return cls(Kind(text[0]), int(text[1:]))


def S(i: int) -> VariableId:
    return VariableId(Kind.FACTOR, i)


def C(i: int) -> VariableId:
    return VariableId(Kind.CONFOUNDER, i)


def X(i: int = 0) -> VariableId:
    return VariableId(Kind.OBSERVABLE, i)


def _readonly(a) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Distribution of an exogenous variable over ``0..len(probabilities)-1``."""

    probabilities: tuple

    def __post_init__(self):
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))

    @property
    def cardinality(self) -> int:
        return len(self.probabilities)

    @classmethod
    def point(cls, value: int = 0, cardinality: int = 1) -> "NoiseSpec":
        return cls(tuple(1.0 if k == value else 0.0 for k in range(cardinality)))

    @classmethod
    def uniform(cls, cardinality: int) -> "NoiseSpec":
        return cls((1.0 / cardinality,) * cardinality)

    @classmethod
    def bernoulli(cls, p: float) -> "NoiseSpec":
        return cls((1.0 - p, p))

    def check(self, what: str):
        p = np.asarray(self.probabilities)
        if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > NOISE_TOL:
            raise UnnormalizedNoise(f"{what}: probabilities {self.probabilities}")

    def __eq__(self, other):
        return isinstance(other, NoiseSpec) and self.probabilities == other.probabilities


@dataclass(frozen=True, eq=False)
class Assignment:
    """Structural assignment ``S_target = table[parents..., noise]``."""

    target: int
    parents: tuple
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", _readonly(np.asarray(self.table, dtype=np.int64)))

    @classmethod
    def constant(cls, target: int, value: int) -> "Assignment":
        return cls(target, (), np.array([value]))

    def __eq__(self, other):
        return (
            isinstance(other, Assignment)
            and self.target == other.target
            and self.parents == other.parents
            and np.array_equal(self.table, other.table)
        )


def tabulate(fn: Callable[..., int], shape: Sequence[int]) -> np.ndarray:
    """Table whose entry at index ``idx`` is ``fn(*idx)``."""
    out = np.empty(tuple(shape), dtype=np.int64)
    for idx in np.ndindex(*shape):
        out[idx] = fn(*idx)
    return out


@dataclass(frozen=True)
class Dag:
    nodes: tuple
    edges: frozenset
    order: tuple = field(default=(), compare=False)

    def parents(self, node: VariableId) -> tuple:
        return tuple(sorted((u for u, v in self.edges if v == node), key=_var_key))

    def in_degree(self, node: VariableId) -> int:
        return sum(1 for _, v in self.edges if v == node)


def _var_key(v: VariableId):
    return (_KIND_ORDER[v.kind], v.index)


@dataclass(frozen=True, eq=False)
class Scm:
    """Finite SCM. Use :func:`validate_scm` before relying on invariants."""

    factor_cards: tuple
    confounder_cards: tuple
    confounder_dists: tuple
    factor_noises: tuple
    assignments: tuple
    emission: np.ndarray
    obs_noise: NoiseSpec
    obs_card: int

    def __post_init__(self):
        for name in ("factor_cards", "confounder_cards"):
            object.__setattr__(self, name, tuple(int(c) for c in getattr(self, name)))
        for name in ("confounder_dists", "factor_noises"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(
            self, "assignments", tuple(sorted(self.assignments, key=lambda a: a.target))
        )
        object.__setattr__(self, "emission", _readonly(np.asarray(self.emission, dtype=np.int64)))
        object.__setattr__(self, "obs_card", int(self.obs_card))

    @property
    def n_factors(self) -> int:
        return len(self.factor_cards)

    @property
    def n_confounders(self) -> int:
        return len(self.confounder_cards)

    def card(self, v: VariableId) -> int:
        if v.kind is Kind.FACTOR:
            return self.factor_cards[v.index]
        if v.kind is Kind.CONFOUNDER:
            return self.confounder_cards[v.index]
        return self.obs_card

    def assignment(self, j: int) -> Assignment:
        return self.assignments[j]

    @cached_property
    def topological_order(self) -> tuple:
        return _topological_order(self)

    def variables(self) -> tuple:
        return (
            tuple(S(j) for j in range(self.n_factors))
            + tuple(C(k) for k in range(self.n_confounders))
            + (X(0),)
        )

    def __eq__(self, other):
        return (
            isinstance(other, Scm)
            and self.factor_cards == other.factor_cards
            and self.confounder_cards == other.confounder_cards
            and self.confounder_dists == other.confounder_dists
            and self.factor_noises == other.factor_noises
            and self.assignments == other.assignments
            and np.array_equal(self.emission, other.emission)
            and self.obs_noise == other.obs_noise
            and self.obs_card == other.obs_card
        )


def index_emission(factor_cards: Sequence[int]) -> tuple[np.ndarray, NoiseSpec, int]:
    """Noise-free injective emission: the observation is the row-major factor index."""
    size = int(np.prod(factor_cards))
    table = np.arange(size, dtype=np.int64).reshape(tuple(factor_cards) + (1,))
    return table, NoiseSpec.point(), size


def _topological_order(scm: Scm) -> tuple:
    """Kahn's algorithm; ready factors leave in ascending index order."""
    n = scm.n_factors
    deps = [set() for _ in range(n)]
    children = [set() for _ in range(n)]
    for a in scm.assignments:
        for p in a.parents:
            if p.kind is Kind.FACTOR:
                deps[a.target].add(p.index)
                children[p.index].add(a.target)
    remaining = [len(d) for d in deps]
    ready = [j for j in range(n) if remaining[j] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        j = heapq.heappop(ready)
        order.append(j)
        for c in children[j]:
            remaining[c] -= 1
            if remaining[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != n:
        stuck = sorted(j for j in range(n) if remaining[j] > 0)
        raise CyclicGraph(f"factors {['S%d' % j for j in stuck]} lie on a directed cycle")
    return tuple(order)


def validate_scm(scm: Scm) -> Dag:
    """Check all structural invariants and return the induced DAG."""
    if len(scm.confounder_dists) != scm.n_confounders:
        raise IncompleteTable("one distribution per confounder required")
    if len(scm.factor_noises) != scm.n_factors:
        raise IncompleteTable("one noise spec per factor required")
    for k, (card, dist) in enumerate(zip(scm.confounder_cards, scm.confounder_dists)):
        dist.check(f"C{k}")
        if dist.cardinality != card:
            raise UnnormalizedNoise(f"C{k}: {dist.cardinality} probabilities for domain {card}")
    for j, noise in enumerate(scm.factor_noises):
        noise.check(f"noise of S{j}")
    scm.obs_noise.check("observation noise")
    if any(c < 1 for c in scm.factor_cards + scm.confounder_cards) or scm.obs_card < 1:
        raise OutOfDomain("cardinalities must be >= 1")

    targets = [a.target for a in scm.assignments]
    if sorted(targets) != list(range(scm.n_factors)):
        raise IncompleteTable(f"need exactly one assignment per factor, got targets {targets}")

    edges = set()
    for a in scm.assignments:
        seen = set()
        for p in a.parents:
            if p.kind is Kind.OBSERVABLE:
                raise IllegalParent(f"S{a.target}: observable {p} cannot be a parent")
            if p.kind is Kind.FACTOR and p.index == a.target:
                raise IllegalParent(f"S{a.target} lists itself as a parent")
            limit = scm.n_factors if p.kind is Kind.FACTOR else scm.n_confounders
            if not 0 <= p.index < limit:
                raise IllegalParent(f"S{a.target}: unknown parent {p}")
            if p in seen:
                raise IllegalParent(f"S{a.target}: duplicate parent {p}")
            seen.add(p)
            edges.add((p, S(a.target)))
        shape = tuple(scm.card(p) for p in a.parents) + (scm.factor_noises[a.target].cardinality,)
        if a.table.shape != shape:
            raise IncompleteTable(f"S{a.target}: table shape {a.table.shape}, expected {shape}")
        if a.table.size and (a.table.min() < 0 or a.table.max() >= scm.factor_cards[a.target]):
            raise IncompleteTable(f"S{a.target}: table values outside the target domain")

    eshape = scm.factor_cards + (scm.obs_noise.cardinality,)
    if scm.emission.shape != eshape:
        raise IncompleteTable(f"emission shape {scm.emission.shape}, expected {eshape}")
    if scm.emission.min() < 0 or scm.emission.max() >= scm.obs_card:
        raise IncompleteTable("emission values outside the observation domain")
    clean = scm.emission[..., 0].ravel()
    if np.unique(clean).size != clean.size:
        raise NonInjectiveEmission("emission is not injective at zero observation noise")

    order = _topological_order(scm)
    for j in range(scm.n_factors):
        edges.add((S(j), X(0)))
    return Dag(nodes=scm.variables(), edges=frozenset(edges), order=order)


# ---------------------------------------------------------------------------
# sampling


def _inverse_cdf(probs: Sequence[float], u: np.ndarray) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    last = int(np.flatnonzero(p > 0)[-1])
    return np.minimum(np.searchsorted(np.cumsum(p), u, side="right"), last)


def _evaluate(scm: Scm, conf: np.ndarray, noise: np.ndarray) -> np.ndarray:
    """Factor values for columns of exogenous values (vectorized over rows)."""
    values = np.zeros((conf.shape[0], scm.n_factors), dtype=np.int64)
    for j in scm.topological_order:
        a = scm.assignments[j]
        idx = tuple(
            values[:, p.index] if p.kind is Kind.FACTOR else conf[:, p.index] for p in a.parents
        ) + (noise[:, j],)
        values[:, j] = a.table[idx]
    return values


def sample_scm_many(scm: Scm, n: int, seed):
    """``n`` joint samples as arrays ``(factors, confounders, observations)``.

    Each sample consumes ``n_confounders + n_factors + 1`` uniforms in the order
    confounders, factor noises, observation noise; row ``i`` uses draws
    ``i*k .. i*k + k - 1``.
    """
    rng = as_generator(seed)
    m, nf = scm.n_confounders, scm.n_factors
    k = m + nf + 1
    u = rng.random(n * k).reshape(n, k)
    conf = np.zeros((n, m), dtype=np.int64)
    for c in range(m):
        conf[:, c] = _inverse_cdf(scm.confounder_dists[c].probabilities, u[:, c])
    noise = np.zeros((n, nf), dtype=np.int64)
    for j in range(nf):
        noise[:, j] = _inverse_cdf(scm.factor_noises[j].probabilities, u[:, m + j])
    factors = _evaluate(scm, conf, noise)
    obs_noise = _inverse_cdf(scm.obs_noise.probabilities, u[:, -1])
    obs = scm.emission[tuple(factors.T) + (obs_noise,)]
    return factors, conf, obs


def sample_scm(scm: Scm, seed) -> tuple[tuple, tuple, int]:
    """One draw ``(factor values, confounder values, observation)``."""
    factors, conf, obs = sample_scm_many(scm, 1, seed)
    return tuple(int(v) for v in factors[0]), tuple(int(v) for v in conf[0]), int(obs[0])


# ---------------------------------------------------------------------------
# exact distributions


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense joint distribution; ``probs[v0, v1, ...]`` for ``variables``."""

    variables: tuple
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "probs", _readonly(np.asarray(self.probs, dtype=np.float64)))
        if self.probs.ndim != len(self.variables):
            raise ValueError("one axis per variable required")

    @property
    def cardinalities(self) -> tuple:
        return self.probs.shape

    def is_normalized(self, tol: float = JOINT_TOL) -> bool:
        return bool(np.all(self.probs >= -tol)) and abs(self.probs.sum() - 1.0) <= tol

    def marginal(self, variables: Sequence) -> "JointTable":
        variables = tuple(variables)
        axes = [self.variables.index(v) for v in variables]
        drop = tuple(a for a in range(len(self.variables)) if a not in axes)
        kept = sorted(axes)
        p = self.probs.sum(axis=drop).transpose([kept.index(a) for a in axes])
        return JointTable(variables, p)

    def prob(self, **values) -> float:
        """Marginal probability of named values, e.g. ``prob(S1=0)``."""
        names = [str(v) for v in self.variables]
        sub = self.marginal([self.variables[names.index(k)] for k in values])
        return float(sub.probs[tuple(values.values())])

    def items(self):
        for idx in np.ndindex(*self.probs.shape):
            yield idx, float(self.probs[idx])


def _ordered(include) -> tuple:
    if isinstance(include, (set, frozenset)):
        return tuple(sorted(include, key=_var_key))
    return tuple(include)


def exact_joint(scm: Scm, include: Iterable[VariableId] | None = None) -> JointTable:
    """Exact joint by enumerating every confounder and noise configuration."""
    include = tuple(S(j) for j in range(scm.n_factors)) if include is None else _ordered(include)
    total = np.prod(
        [float(c) for c in scm.factor_cards + scm.confounder_cards]
        + [float(ns.cardinality) for ns in scm.factor_noises]
        + [float(scm.obs_noise.cardinality)]
    )
    if total > MAX_ATOMS:
        raise TooLarge(f"{total:.0f} enumerated atoms exceed {MAX_ATOMS}")

    exo_cards = (
        list(scm.confounder_cards)
        + [ns.cardinality for ns in scm.factor_noises]
        + [scm.obs_noise.cardinality]
    )
    grid = np.indices(exo_cards).reshape(len(exo_cards), -1).T
    m, nf = scm.n_confounders, scm.n_factors
    conf, noise, obs_noise = grid[:, :m], grid[:, m:m + nf], grid[:, -1]
    weight = np.ones(grid.shape[0])
    dists = list(scm.confounder_dists) + list(scm.factor_noises) + [scm.obs_noise]
    for col, dist in enumerate(dists):
        weight = weight * np.asarray(dist.probabilities)[grid[:, col]]
    factors = _evaluate(scm, conf, noise)
    obs = scm.emission[tuple(factors.T) + (obs_noise,)]

    columns, shape = [], []
    for v in include:
        if v.kind is Kind.FACTOR:
            columns.append(factors[:, v.index])
        elif v.kind is Kind.CONFOUNDER:
            columns.append(conf[:, v.index])
        else:
            columns.append(obs)
        shape.append(scm.card(v))
    flat = np.ravel_multi_index(columns, shape) if columns else np.zeros(len(weight), dtype=np.int64)
    probs = np.bincount(flat, weights=weight, minlength=int(np.prod(shape)))
    return JointTable(include, probs.reshape(shape))


def mechanism_table(scm: Scm, j: int) -> np.ndarray:
    """Causal mechanism ``P(S_j = v | parents)`` with shape ``(*parent cards, card_j)``."""
    a = scm.assignments[j]
    noise = np.asarray(scm.factor_noises[j].probabilities)
    out = np.zeros(a.table.shape[:-1] + (scm.factor_cards[j],))
    for idx in np.ndindex(*a.table.shape[:-1]):
        for e, pe in enumerate(noise):
            out[idx + (a.table[idx + (e,)],)] += pe
    return out


# ---------------------------------------------------------------------------
# interventions


def intervene(scm: Scm, settings: Mapping) -> Scm:
    """``do(S_j = v, ...)``: replace each targeted assignment by a constant."""
    assignments = list(scm.assignments)
    noises = list(scm.factor_noises)
    for target, value in settings.items():
        if isinstance(target, int):
            target = S(target)
        if target.kind is not Kind.FACTOR:
            raise NotAFactor(f"cannot intervene on {target}; only factors have mechanisms")
        if not 0 <= target.index < scm.n_factors:
            raise NotAFactor(f"{target} is not a factor of this model")
        if not 0 <= int(value) < scm.factor_cards[target.index]:
            raise OutOfDomain(f"{target}={value} outside domain {scm.factor_cards[target.index]}")
        assignments[target.index] = Assignment.constant(target.index, int(value))
        noises[target.index] = NoiseSpec.point()
    return Scm(
        factor_cards=scm.factor_cards,
        confounder_cards=scm.confounder_cards,
        confounder_dists=scm.confounder_dists,
        factor_noises=tuple(noises),
        assignments=tuple(assignments),
        emission=scm.emission,
        obs_noise=scm.obs_noise,
        obs_card=scm.obs_card,
    )


def random_scm(
    seed,
    n_factors: int = 3,
    n_confounders: int = 1,
    card: int = 2,
    edge_prob: float = 0.5,
    noise_card: int = 2,
) -> Scm:
    """Random acyclic SCM over ``card``-valued variables with an index emission.

    Edges only run from lower to higher factor index, so any draw is acyclic.
    """
    rng = as_generator(seed)

    def dist(k):
        w = rng.random(k) + 0.05
        return NoiseSpec(tuple(w / w.sum()))

    confs = tuple(dist(card) for _ in range(n_confounders))
    noises, assignments = [], []
    for j in range(n_factors):
        parents = [S(i) for i in range(j) if rng.random() < edge_prob]
        parents += [C(k) for k in range(n_confounders) if rng.random() < edge_prob]
        noises.append(dist(noise_card))
        shape = (card,) * len(parents) + (noise_card,)
        table = rng.integers(card, int(np.prod(shape))).reshape(shape)
        assignments.append(Assignment(j, tuple(parents), table))
    emission, obs_noise, obs_card = index_emission((card,) * n_factors)
    return Scm(
        factor_cards=(card,) * n_factors,
        confounder_cards=(card,) * n_confounders,
        confounder_dists=confs,
        factor_noises=tuple(noises),
        assignments=tuple(assignments),
        emission=emission,
        obs_noise=obs_noise,
        obs_card=obs_card,
    )


def all_factor_tuples(scm: Scm):
    return itertools.product(*(range(c) for c in scm.factor_cards))
