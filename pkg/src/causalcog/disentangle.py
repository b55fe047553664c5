"""Exact disentanglement checks over finite spaces and information scores.

The generating map ``g: S -> X``, the encoder ``f: X -> Z``, their composite
``m = f . g`` and left inverses ``i: Z -> S`` are all :class:`FiniteMap`
tables over product spaces, so every condition is decided by exhaustive
enumeration.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    AssignmentInvalid,
    DomainMismatch,
    TooFewCodes,
    TooFewSamples,
    Unnormalized,
)
from .scm.core import JOINT_TOL, JointTable, Scm

SCORE_MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteMap:
    """Total map between product spaces.

    ``table[r]`` is the output tuple for the input whose row-major index over
    ``domain`` is ``r``. A plain finite domain is a one-axis product.
    """

    domain: tuple
    codomain: tuple
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(int(c) for c in self.domain))
        object.__setattr__(self, "codomain", tuple(int(c) for c in self.codomain))
        t = np.asarray(self.table, dtype=np.int64).reshape(-1, len(self.codomain))
        if t.shape[0] != int(np.prod(self.domain)):
            raise DomainMismatch(f"table has {t.shape[0]} rows for domain {self.domain}")
        if t.size and (t.min() < 0 or np.any(t >= np.array(self.codomain))):
            raise DomainMismatch("table values fall outside the codomain")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_function(cls, domain: Sequence[int], codomain: Sequence[int], fn: Callable):
        rows = []
        for x in itertools.product(*(range(c) for c in domain)):
            y = fn(*x)
            rows.append((y,) if np.isscalar(y) else tuple(y))
        return cls(tuple(domain), tuple(codomain), np.array(rows).reshape(len(rows), len(codomain)))

    @classmethod
    def identity(cls, domain: Sequence[int]) -> "FiniteMap":
        return cls.from_function(domain, domain, lambda *x: x)

    def inputs(self) -> np.ndarray:
        """All domain points, row-aligned with ``table``."""
        return np.indices(self.domain).reshape(len(self.domain), -1).T

    def row(self, x: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(x), self.domain))

    def __call__(self, *x) -> tuple:
        if len(x) == 1 and not np.isscalar(x[0]):
            x = tuple(x[0])
        return tuple(int(v) for v in self.table[self.row(x)])

    def compose(self, inner: "FiniteMap") -> "FiniteMap":
        """``self . inner``."""
        if inner.codomain != self.domain:
            raise DomainMismatch(f"cannot compose: {inner.codomain} != {self.domain}")
        rows = np.ravel_multi_index(tuple(inner.table.T), self.domain)
        return FiniteMap(inner.domain, self.codomain, self.table[rows])

    def image_rows(self) -> np.ndarray:
        return np.unique(self.table, axis=0)

    def is_injective(self) -> bool:
        return self.image_rows().shape[0] == self.table.shape[0]

    def depends_on(self, out_axis: int) -> set:
        """Input axes along which output coordinate ``out_axis`` varies."""
        values = self.table[:, out_axis].reshape(self.domain)
        return {j for j in range(len(self.domain)) if np.any(np.diff(values, axis=j) != 0)}


def emission_map(scm: Scm) -> FiniteMap:
    """The generating map ``g`` of an SCM at zero observation noise."""
    rows = scm.emission[..., 0].reshape(-1, 1)
    return FiniteMap(scm.factor_cards, (scm.obs_card,), rows)


@dataclass(frozen=True)
class PipelineReport:
    g_injective: bool
    f_injective_on_image: bool
    modularity_holds: bool
    code_assignment: dict | None
    informativeness_holds: bool
    disentanglement_holds: bool

    def to_json(self) -> str:
        d = asdict(self)
        if self.code_assignment is not None:
            d["code_assignment"] = sorted([int(j), int(k)] for j, k in self.code_assignment.items())
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PipelineReport":
        d = json.loads(text)
        if d["code_assignment"] is not None:
            d["code_assignment"] = {j: k for j, k in d["code_assignment"]}
        return cls(**d)


def check_structure(g: FiniteMap, f: FiniteMap) -> tuple[bool, bool]:
    """Whether ``g`` is injective and ``f`` is injective on ``g``'s image."""
    if g.codomain != f.domain:
        raise DomainMismatch(f"g maps into {g.codomain} but f reads {f.domain}")
    image = g.image_rows()
    codes = f.table[np.ravel_multi_index(tuple(image.T), f.domain)]
    f_ok = np.unique(codes, axis=0).shape[0] == image.shape[0]
    return g.is_injective(), bool(f_ok)


def _modular_assignment(m: FiniteMap):
    n, l = len(m.domain), len(m.codomain)
    deps = [m.depends_on(k) for k in range(l)]
    if any(len(d) > 1 for d in deps):
        return None
    assignment, used = {}, set()
    for j in range(n):
        candidates = [k for k in range(l) if deps[k] == {j}]
        if m.domain[j] == 1:
            candidates = [k for k in range(l) if not deps[k] and k not in used]
        if not candidates:
            return None
        # prefer a code that keeps every value of the factor apart
        lossless = [k for k in candidates if np.unique(m.table[:, k]).size == m.domain[j]]
        k = (lossless or candidates)[0]
        assignment[j] = k
        used.add(k)
    return assignment


def check_modularity(g: FiniteMap, f: FiniteMap, n: int | None = None, l: int | None = None):
    """Whether each code reads at most one factor and every factor has its own code.

    Returns ``(holds, assignment)`` with ``assignment`` mapping factor axis to
    code axis; axes may be permuted.
    """
    m = f.compose(g)
    n = len(m.domain) if n is None else n
    l = len(m.codomain) if l is None else l
    if (n, l) != (len(m.domain), len(m.codomain)):
        raise DomainMismatch(f"expected {n} factors and {l} codes, got {m.domain} -> {m.codomain}")
    if l < n:
        raise TooFewCodes(f"{l} codes cannot separate {n} factors")
    assignment = _modular_assignment(m)
    return assignment is not None, assignment


def construct_left_inverse(m: FiniteMap) -> FiniteMap | None:
    """A map ``i`` with ``i . m = id``, or ``None`` when ``m`` is not injective.

    Code tuples outside the image map to the all-zero factor tuple.
    """
    if not m.is_injective():
        return None
    table = np.zeros((int(np.prod(m.codomain)), len(m.domain)), dtype=np.int64)
    table[np.ravel_multi_index(tuple(m.table.T), m.codomain)] = m.inputs()
    return FiniteMap(m.codomain, m.domain, table)


def _validate_assignment(m: FiniteMap, assignment: dict):
    n, l = len(m.domain), len(m.codomain)
    if sorted(assignment) != list(range(n)):
        raise AssignmentInvalid(f"assignment must cover factors 0..{n - 1}")
    codes = list(assignment.values())
    if len(set(codes)) != n or any(not 0 <= k < l for k in codes):
        raise AssignmentInvalid("codes must be distinct valid axes")
    for j, k in assignment.items():
        if not m.depends_on(k) <= {j}:
            raise AssignmentInvalid(f"code {k} depends on factors {sorted(m.depends_on(k))}")


def check_disentanglement(m: FiniteMap, code_assignment: dict) -> bool:
    """Whether every factor can be read back from its assigned code alone."""
    _validate_assignment(m, code_assignment)
    inputs = m.inputs()
    for j, k in code_assignment.items():
        pairs = np.unique(np.column_stack([inputs[:, j], m.table[:, k]]), axis=0)
        if np.unique(pairs[:, 1]).size != pairs.shape[0]:
            return False
    return True


def factorized_left_inverse(m: FiniteMap, code_assignment: dict) -> FiniteMap:
    """Product of per-axis inverses ``i_j: Z_k(j) -> S_j``; unseen codes map to 0."""
    _validate_assignment(m, code_assignment)
    inputs = m.inputs()
    per_axis = []
    for j in range(len(m.domain)):
        k = code_assignment[j]
        lookup = np.zeros(m.codomain[k], dtype=np.int64)
        lookup[m.table[:, k]] = inputs[:, j]
        per_axis.append((k, lookup))

    def inverse(*z):
        return tuple(int(lookup[z[k]]) for k, lookup in per_axis)

    return FiniteMap.from_function(m.codomain, m.domain, inverse)


def check_pipeline(g: FiniteMap, f: FiniteMap) -> PipelineReport:
    g_inj, f_inj = check_structure(g, f)
    m = f.compose(g)
    modular, assignment = check_modularity(g, f)
    informative = construct_left_inverse(m) is not None
    disentangled = bool(informative and modular and check_disentanglement(m, assignment))
    return PipelineReport(g_inj, f_inj, modular, assignment, informative, disentangled)


# ---------------------------------------------------------------------------
# continuous scores


@dataclass(frozen=True, eq=False)
class ScoreReport:
    """``mi_matrix[j, k] = I(S_j; Z_k) / H(S_j)``."""

    mi_matrix: np.ndarray
    modularity_score: float
    informativeness_score: float

    def to_dict(self) -> dict:
        return {
            "mi_matrix": [[float(v) for v in row] for row in self.mi_matrix],
            "modularity_score": float(self.modularity_score),
            "informativeness_score": float(self.informativeness_score),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreReport":
        return cls(np.array(d["mi_matrix"], dtype=float).reshape(len(d["mi_matrix"]), -1),
                   float(d["modularity_score"]), float(d["informativeness_score"]))

    def __eq__(self, other):
        return (
            isinstance(other, ScoreReport)
            and np.array_equal(self.mi_matrix, other.mi_matrix)
            and self.modularity_score == other.modularity_score
            and self.informativeness_score == other.informativeness_score
        )


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def _mutual_information(pxy: np.ndarray) -> float:
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    return float((pxy[mask] * np.log(pxy[mask] / (px @ py)[mask])).sum())


def _is_factor_label(v) -> bool:
    return str(v).startswith("S")


def score_disentanglement(joint: JointTable, n_factors: int | None = None) -> ScoreReport:
    """Normalized mutual information between each factor and each code.

    The first ``n_factors`` variables of ``joint`` are factors and the rest
    codes; by default factors are the variables labelled ``S*``.
    """
    if not joint.is_normalized():
        raise Unnormalized(f"joint sums to {joint.probs.sum():.12g}")
    if n_factors is None:
        n_factors = sum(1 for v in joint.variables if _is_factor_label(v))
    n_codes = len(joint.variables) - n_factors
    probs = np.clip(joint.probs, 0.0, None)
    mi = np.zeros((n_factors, n_codes))
    for j in range(n_factors):
        pj = probs.sum(axis=tuple(a for a in range(probs.ndim) if a != j))
        h = _entropy(pj)
        if h <= 0:
            continue
        for k in range(n_codes):
            a = n_factors + k
            pjk = probs.sum(axis=tuple(x for x in range(probs.ndim) if x not in (j, a)))
            mi[j, k] = min(max(_mutual_information(pjk) / h, 0.0), 1.0)
    col = mi.sum(axis=0)
    live = col > SCORE_MASS_TOL
    modularity = float(np.mean(mi.max(axis=0)[live] / col[live])) if live.any() else 0.0
    informativeness = float(mi.max(axis=1).mean()) if n_codes else 0.0
    return ScoreReport(mi, modularity, informativeness)


def pipeline_joint(m: FiniteMap, factor_probs: np.ndarray | None = None) -> JointTable:
    """Joint over (factor axes, code axes) of a distribution on S pushed through ``m``.

    Defaults to the uniform distribution over S.
    """
    n, l = len(m.domain), len(m.codomain)
    weights = (
        np.full(m.table.shape[0], 1.0 / m.table.shape[0])
        if factor_probs is None
        else np.asarray(factor_probs, dtype=float).ravel()
    )
    shape = m.domain + m.codomain
    flat = np.ravel_multi_index(tuple(m.inputs().T) + tuple(m.table.T), shape)
    probs = np.bincount(flat, weights=weights, minlength=int(np.prod(shape))).reshape(shape)
    labels = tuple(f"S{j}" for j in range(n)) + tuple(f"Z{k}" for k in range(l))
    return JointTable(labels, probs)


def _bin_column(x: np.ndarray, bins: int) -> np.ndarray:
    values = np.unique(x)
    if values.size <= bins:
        return np.searchsorted(values, x)
    edges = np.quantile(x, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    return np.searchsorted(edges, x, side="right")


def bin_codes(codes, bins: int = 4) -> np.ndarray:
    """Per-dimension cell indices of real codes ``(n, l)`` under the same
    rule as :func:`binarize_continuous_codes`."""
    codes = np.asarray(codes, dtype=np.float64)
    return np.column_stack([_bin_column(c, bins) for c in codes.T]).astype(np.int64)


def binarize_continuous_codes(samples, bins: int = 4, factor_cards: Sequence[int] | None = None):
    """Empirical joint of factors and quantile-binned real codes.

    ``samples`` is a sequence of ``(factor tuple, code vector)`` pairs. A code
    dimension with at most ``bins`` distinct values gets one cell per value;
    otherwise cells are delimited by the ``1/bins .. (bins-1)/bins`` quantiles.
    """
    samples = list(samples)
    if bins < 2:
        raise TooFewSamples("need at least two bins")
    if len(samples) < bins:
        raise TooFewSamples(f"{len(samples)} samples for {bins} bins")
    factors = np.array([s for s, _ in samples], dtype=np.int64).reshape(len(samples), -1)
    codes = np.array([z for _, z in samples], dtype=np.float64).reshape(len(samples), -1)
    return joint_from_arrays(factors, codes, bins, factor_cards)


def joint_from_arrays(factors: np.ndarray, codes: np.ndarray, bins: int = 4, factor_cards=None):
    """Array form of :func:`binarize_continuous_codes`."""
    factors = np.asarray(factors, dtype=np.int64)
    codes = np.asarray(codes, dtype=np.float64)
    if factors.shape[0] < bins:
        raise TooFewSamples(f"{factors.shape[0]} samples for {bins} bins")
    if factor_cards is None:
        factor_cards = tuple(int(c) + 1 for c in factors.max(axis=0))
    binned = np.column_stack([_bin_column(codes[:, d], bins) for d in range(codes.shape[1])])
    shape = tuple(factor_cards) + (bins,) * codes.shape[1]
    flat = np.ravel_multi_index(tuple(factors.T) + tuple(binned.T), shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).astype(float)
    labels = tuple(f"S{j}" for j in range(factors.shape[1])) + tuple(
        f"Z{k}" for k in range(codes.shape[1])
    )
    return JointTable(labels, (counts / counts.sum()).reshape(shape))


__all__ = [
    "FiniteMap",
    "PipelineReport",
    "ScoreReport",
    "binarize_continuous_codes",
    "check_disentanglement",
    "check_modularity",
    "check_pipeline",
    "check_structure",
    "construct_left_inverse",
    "emission_map",
    "factorized_left_inverse",
    "joint_from_arrays",
    "pipeline_joint",
    "score_disentanglement",
    "JOINT_TOL",
]
