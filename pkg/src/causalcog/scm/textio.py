"""Sectioned key-value text format for SCMs.

Example (two binary factors, ``S1 = S0 XOR noise``)::

    [factors]
    cardinalities = 2 2
    noise.S0 = 1
    noise.S1 = 0.90000000000000002 0.10000000000000001

    [confounders]
    cardinalities =

    [assignments]
    S0.parents =
    S0.table = 0
    S1.parents = S0
    S1.table = 0 1 1 0

    [emission]
    cardinality = 4
    noise = 1
    table = 0 1 2 3

Tables are flat and row-major over ``(parent values..., noise value)``; the
emission table is row-major over ``(factor values..., observation noise)``.
Probabilities are written with 17 significant digits so they round-trip.
"""
from __future__ import annotations

import configparser

import numpy as np

from ..errors import IncompleteTable
from .core import Assignment, NoiseSpec, Scm, VariableId


def _floats(values) -> str:
    return " ".join("%.17g" % v for v in values)


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in values)


def dumps_scm(scm: Scm) -> str:
    lines = ["[factors]", f"cardinalities = {_ints(scm.factor_cards)}"]
    for j, ns in enumerate(scm.factor_noises):
        lines.append(f"noise.S{j} = {_floats(ns.probabilities)}")
    lines += ["", "[confounders]", f"cardinalities = {_ints(scm.confounder_cards)}"]
    for k, d in enumerate(scm.confounder_dists):
        lines.append(f"dist.C{k} = {_floats(d.probabilities)}")
    lines += ["", "[assignments]"]
    for a in scm.assignments:
        lines.append(f"S{a.target}.parents = {' '.join(str(p) for p in a.parents)}")
        lines.append(f"S{a.target}.table = {_ints(a.table.ravel())}")
    lines += [
        "",
        "[emission]",
        f"cardinality = {scm.obs_card}",
        f"noise = {_floats(scm.obs_noise.probabilities)}",
        f"table = {_ints(scm.emission.ravel())}",
    ]
    return "\n".join(lines).replace(" = \n", " =\n") + "\n"


def loads_scm(text: str) -> Scm:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_string(text)
    try:
        factor_cards = tuple(int(v) for v in cp["factors"]["cardinalities"].split())
        conf_cards = tuple(int(v) for v in cp["confounders"].get("cardinalities", "").split())
        noises = tuple(
            NoiseSpec(tuple(float(v) for v in cp["factors"][f"noise.S{j}"].split()))
            for j in range(len(factor_cards))
        )
        dists = tuple(
            NoiseSpec(tuple(float(v) for v in cp["confounders"][f"dist.C{k}"].split()))
            for k in range(len(conf_cards))
        )
        scm_cards = {"S": factor_cards, "C": conf_cards}
        assignments = []
        for j in range(len(factor_cards)):
            parents = tuple(
                VariableId.parse(t) for t in cp["assignments"].get(f"S{j}.parents", "").split()
            )
            flat = np.array([int(v) for v in cp["assignments"][f"S{j}.table"].split()])
            shape = tuple(scm_cards[p.kind.value][p.index] for p in parents) + (
                noises[j].cardinality,
            )
            assignments.append(Assignment(j, parents, flat.reshape(shape)))
        em = cp["emission"]
        obs_noise = NoiseSpec(tuple(float(v) for v in em["noise"].split()))
        table = np.array([int(v) for v in em["table"].split()])
        emission = table.reshape(factor_cards + (obs_noise.cardinality,))
        return Scm(
            factor_cards=factor_cards,
            confounder_cards=conf_cards,
            confounder_dists=dists,
            factor_noises=noises,
            assignments=tuple(assignments),
            emission=emission,
            obs_noise=obs_noise,
            obs_card=int(em["cardinality"]),
        )
    except (KeyError, ValueError, IndexError) as exc:
        raise IncompleteTable(f"malformed SCM document: {exc}") from exc
