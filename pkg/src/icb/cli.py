"""Command line front end: ``icb demo | run | verify | experiment``.

Exit codes: 0 success, 1 a property or regression check failed, 2 usage or
input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as exp
from .allocation import allocate
from .errors import ICBError
from .network import load_network, paper_fixture, random_discrete_network, validate_profile
from .payments import (
    MECHANISM_LABELS,
    compute_outcome,
    dsicb_truthfulness_check,
    ir_threshold,
    router_utility,
)
from .verification import (
    PropertyReport,
    check_bayesian_ic,
    check_budget_balance,
    check_dominant_strategy_ic,
    check_expost_ir,
    check_nonrouter_payments,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CHECKS = ("bb", "nonrouter", "ir", "bic", "dsic")
PAPER_T = (-28 / 3, 34 / 3, 22 / 3, -28 / 3)


class UsageError(Exception):
    pass


def _money(xs) -> str:
    return "[" + ", ".join(f"{x:.2f}" for x in xs) + "]"


def _ids(xs) -> str:
    return "{" + ", ".join(str(x + 1) for x in sorted(xs)) + "}"


def _print_outcome(net, outcome) -> None:
    label = MECHANISM_LABELS[outcome.mechanism]
    print(f"mechanism: {label}")
    print(f"nodes: {net.n}, source: {net.source + 1}")
    print("srbt: " + ", ".join(
        f"{p + 1}->{v + 1}" for v, p in enumerate(outcome.srbt.parent) if p is not None))
    print(f"R = {_ids(outcome.routers)}")
    print(f"k = {list(outcome.k)}")
    print(f"t = {_money(outcome.t)}")
    if outcome.received is not None:
        print(f"received = {_money(outcome.received)}")
        print(f"paid = {_money(outcome.paid)}")
    print(f"budget sum = {outcome.budget_sum:.2f}")


def cmd_demo(args) -> int:
    net, theta = paper_fixture()
    outcome = compute_outcome(net, theta, "bicb", "lcp")
    utilities = {i: router_utility(net, outcome.routers, theta, i) for i in sorted(outcome.routers)}
    ok = (
        outcome.routers == frozenset({1, 2})
        and outcome.k == (0, 1, 1, 0)
        and all(abs(a - b) <= 0.01 for a, b in zip(outcome.t, PAPER_T))
        and abs(outcome.budget_sum) <= 1e-9
    )
    if args.json:
        doc = outcome.to_json()
        doc["router_utilities"] = {str(i + 1): u for i, u in utilities.items()}
        doc["matches_reference"] = ok
        print(json.dumps(doc, indent=2))
    else:
        print("graph: path 1-2-3-4, source 1")
        print("priors: {10,11} {15,16} {12,13} {7,8} (uniform)")
        print(f"announced = {list(theta)}")
        _print_outcome(net, outcome)
        for i, u in utilities.items():
            print(f"router {i + 1}: utility {u:.2f}, IR threshold {ir_threshold(net, i):.2f}")
        print("reference match: " + ("yes" if ok else "NO"))
    return EXIT_OK if ok else EXIT_FAIL


def _parse_announce(text: str, net) -> tuple[float, ...]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"--announce must be comma-separated numbers: {text!r}") from exc
    return validate_profile(net, values)


def cmd_run(args) -> int:
    net = load_network(args.graph)
    announced = _parse_announce(args.announce, net)
    outcome = compute_outcome(net, announced, args.mechanism, args.allocation)
    if args.json:
        print(json.dumps(outcome.to_json(), indent=2))
    else:
        _print_outcome(net, outcome)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in checks if c not in CHECKS]
    if unknown or not checks:
        raise UsageError(f"unknown check(s) {unknown}; choose from {','.join(CHECKS)}")
    if args.graph:
        net = load_network(args.graph)
        announced = _parse_announce(args.announce, net) if args.announce else net.means()
    else:
        net, announced = random_discrete_network(args.random, n_values=args.types, rng_seed=args.seed)
    srbt = allocate(net, announced, args.allocation)

    reports: list[PropertyReport] = []
    for c in checks:
        if c == "bb":
            reports.append(check_budget_balance(net, srbt.routers))
        elif c == "nonrouter":
            reports.append(check_nonrouter_payments(net, srbt.routers))
        elif c == "ir":
            reports.append(check_expost_ir(net, srbt.routers, announced))
        elif c == "bic":
            reports.append(check_bayesian_ic(net, args.bic_allocation))
        elif c == "dsic":
            dsicb_truthfulness_check(net)  # validates preconditions
            reports.append(check_dominant_strategy_ic(net, "dsicb"))
    if args.json:
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        for r in reports:
            print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _experiment_config(args) -> exp.ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if args.n_list:
        data["n_values"] = [int(x) for x in args.n_list.split(",")]
    for key, val in (
        ("instances", args.instances),
        ("edge_density", args.density),
        ("allocation_rule", args.allocation),
    ):
        if val is not None:
            data[key] = val
    if args.seed is not None:
        data["base_seed"] = args.seed
    elif "base_seed" not in data and os.environ.get("ICB_SEED"):
        data["base_seed"] = int(os.environ["ICB_SEED"])
    if args.cost_range:
        lo, hi = (float(x) for x in args.cost_range.split(","))
        data["cost_range"] = (lo, hi)
    return exp.ExperimentConfig.from_dict(data)


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"cannot write to {out}: {exc}") from exc

    records = exp.run_experiment(cfg)
    summary = exp.aggregate(records)
    (out / "records.csv").write_text(exp.records_csv(records))
    (out / "summary.csv").write_text(exp.summary_csv(summary))
    (out / "summary.json").write_text(exp.summary_json(summary))

    verdicts = exp.ordering_verdicts(summary)
    for v in verdicts:
        apr = "BIC-B < DSIC-B" if v.apr_ok else "NOT BIC-B < DSIC-B"
        wor = "BIC-B < DSIC-B" if v.wor_ok else "NOT BIC-B < DSIC-B"
        print(f"n={v.n}: APR {apr}; WOR {wor}")
    bic_wors = [v.bicb_wor for v in verdicts if v.bicb_wor is not None]
    if bic_wors:
        print(f"report: max mean BIC-B WOR = {max(bic_wors):.3f} ({'<' if max(bic_wors) < 2 else '>='} 2)")
    print(f"wrote {out / 'records.csv'}, {out / 'summary.csv'}, {out / 'summary.json'}")
    all_ok = all(v.apr_ok and v.wor_ok for v in verdicts)
    return EXIT_FAIL if args.strict and not all_ok else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="reproduce the four-node worked example")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("run", help="allocation and payments for one announced profile")
    p.add_argument("--graph", required=True)
    p.add_argument("--announce", required=True, help="comma-separated costs, node order 1..n")
    p.add_argument("--mechanism", choices=("bicb", "dsicb"), default="bicb")
    p.add_argument("--allocation", choices=("lcp", "optimal"), default="lcp")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run property checks")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--random", type=int, metavar="N", help="random discrete network with N nodes")
    p.add_argument("--checks", default="bb,nonrouter,ir")
    p.add_argument("--seed", type=int, default=int(os.environ.get("ICB_SEED", 0)))
    p.add_argument("--types", type=int, default=2, help="type-space size for --random")
    p.add_argument("--announce", help="announced profile (default: prior means)")
    p.add_argument("--allocation", choices=("lcp", "optimal"), default="lcp")
    p.add_argument("--bic-allocation", choices=("lcp", "optimal"), default="optimal")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="Monte Carlo comparison of BIC-B and DSIC-B")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--n-list", help="comma-separated node counts")
    p.add_argument("--instances", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--cost-range", help="lo,hi")
    p.add_argument("--allocation", choices=("lcp", "optimal"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="results")
    p.add_argument("--strict", action="store_true", help="exit 1 if any ordering verdict fails")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ICBError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
