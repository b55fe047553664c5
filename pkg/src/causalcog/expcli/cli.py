"""``causalcog`` command-line entry point.

Verbs::

    causalcog run <config.ini> --out <dir>
    causalcog compare <dir> <dir> [...] --metric finalReturn|episodesToThreshold
    causalcog oracle <config.ini>
    causalcog score --joint <joint.json>

Exit codes: 0 success, 2 configuration error, 3 I/O error.

A joint file is JSON ``{"variables": ["S0", ..., "Z0", ...], "shape": [...],
"probs": [...]}`` with ``probs`` flattened row-major.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..disentangle import score_disentanglement
from ..errors import CausalCogError, ConfigError
from ..scm import JointTable
from .compare import METRICS, compare_agents
from .config import load_config
from .experiment import build_task, run_experiment
from .oracle import value_iteration_oracle
from .report import dumps_json, emit_report, load_report

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalcog", description="Causal-cognition experiment runner")
    sub = p.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="run an experiment and write its report")
    run.add_argument("config")
    run.add_argument("--out", required=True)
    cmp_ = sub.add_parser("compare", help="bootstrap comparison of report directories")
    cmp_.add_argument("dirs", nargs="+")
    cmp_.add_argument("--metric", default="finalReturn", choices=METRICS)
    cmp_.add_argument("--resamples", type=int, default=10_000)
    orc = sub.add_parser("oracle", help="value iteration on the configured task")
    orc.add_argument("config")
    orc.add_argument("--tolerance", type=float, default=1e-10)
    sc = sub.add_parser("score", help="disentanglement scores of a joint table")
    sc.add_argument("--joint", required=True)
    return p


def _run(args) -> str:
    card = run_experiment(load_config(args.config))
    paths = emit_report(card, args.out)
    return dumps_json({"written": paths, "final_mean": card.final_mean})


def _compare(args) -> str:
    cards = [load_report(d) for d in args.dirs]
    return dumps_json([c.to_dict() for c in compare_agents(cards, args.metric, args.resamples)])


def _oracle(args) -> str:
    mdp = build_task(load_config(args.config).task)
    v, policy = value_iteration_oracle(mdp, args.tolerance)
    base = getattr(mdp, "base", mdp)
    return dumps_json({"values": v.values, "policy": policy.tolist(),
                       "optimal_return": float(base.initial @ v.values)})


def _score(args) -> str:
    with open(args.joint, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        probs = np.array(doc["probs"], dtype=np.float64).reshape(doc["shape"])
        joint = JointTable(tuple(doc["variables"]), probs)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("joint", f"malformed joint file: {exc}") from None
    return dumps_json(score_disentanglement(joint).to_dict())


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _run, "compare": _compare, "oracle": _oracle, "score": _score}[args.verb]
    try:
        out = handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CausalCogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(out)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
