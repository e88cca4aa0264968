"""Command-line interface.

Exit codes: 0 success, 1 infeasible, 2 input error, 3 iteration/time limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from . import bench as bench_mod
from .deterministic import CLIQUE_COMPONENTS, GENERAL, UNCONSTRAINED, classify
from .flow import build_network, network_to_dot
from .generator import MODE_NORMAL, MODE_TRANSITIVE, GenParams, generate_instance
from .heuristics import EvoParams, evolve
from .model import (
    INFEASIBLE,
    OPTIMAL,
    InfeasibleError,
    evaluate_regret,
    instance_from_json,
    instance_to_json,
    is_feasible,
    midpoint_scenario,
    selection_from_json,
    selection_to_dict,
    validate,
)
from .reductions import dnf_to_iris, independent_set_to_ris, parse_dnf, parse_graph
from .regret import SolverConfig, minmax_regret

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3


class InputError(Exception):
    pass


def _load_instance(path: str):
    try:
        instance = instance_from_json(Path(path).read_text())
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read instance {path}: {exc}") from exc
    report = validate(instance)
    if not report.ok:
        raise InputError(f"instance {path} is invalid: " + "; ".join(report.errors))
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return instance


def _load_selection(path: str):
    try:
        return selection_from_json(Path(path).read_text())
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read selection {path}: {exc}") from exc


def _cmd_solve(args) -> int:
    instance = _load_instance(args.instance)
    config = SolverConfig(
        epsilon=Fraction(Decimal(args.eps)),
        iteration_limit=args.iter_limit,
        master_time_limit=args.master_time_limit,
        rng_seed=args.seed,
    )
    if args.heuristic_only:
        try:
            pop = evolve(instance, EvoParams(rng_seed=args.seed))
        except InfeasibleError:
            print("infeasible: the instance has no feasible selection")
            return EXIT_INFEASIBLE
        best, regret = pop.best
        print(f"heuristic best regret: {regret}")
        print(f"solution: {json.dumps(selection_to_dict(best))}")
        return EXIT_OK

    trace_handle = open(args.trace, "w") if args.trace else None
    try:
        on_iter = None
        if trace_handle is not None:
            def on_iter(record):
                trace_handle.write(json.dumps(record, sort_keys=True) + "\n")
        result = minmax_regret(instance, config, on_iteration=on_iter)
    finally:
        if trace_handle is not None:
            trace_handle.close()

    print(f"status: {result.status}")
    if result.status == INFEASIBLE:
        print("infeasible: the instance has no feasible selection")
        return EXIT_INFEASIBLE
    print(f"regret: {result.regret}")
    print(f"bounds: LB={result.lower_bound} UB={result.upper_bound} gap={float(result.gap):.6f}")
    print(f"iterations: {result.iterations}")
    print(f"solution: {json.dumps(selection_to_dict(result.x_star))}")
    return EXIT_OK if result.status == OPTIMAL else EXIT_LIMIT


def _cmd_generate(args) -> int:
    params = GenParams(
        m=args.m, r=args.r, p=args.p, k_pairs=args.k, mode=args.mode, rng_seed=args.seed
    )
    try:
        instance = generate_instance(params)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    Path(args.output).write_text(instance_to_json(instance))
    print(f"wrote {args.output}: m={args.m} r={args.r} p={args.p} |T|={len(instance.forbidden)}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    instance = _load_instance(args.instance)
    selection = _load_selection(args.selection)
    try:
        feasible = is_feasible(instance, selection)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if not feasible:
        print("infeasible: the selection violates a quota or a forbidden pair")
        return EXIT_INFEASIBLE
    report = evaluate_regret(instance, selection)
    print(f"regret: {report.regret}")
    print(f"witness: {json.dumps(selection_to_dict(report.witness))}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    instance = _load_instance(args.instance)
    sc = classify(instance)
    print(f"structure: {sc.variant}")
    if sc.variant == CLIQUE_COMPONENTS:
        print(f"classes: {len(sc.classes)}")
        for k, cls in enumerate(sc.classes):
            members = " ".join(f"({r.set_index},{r.item_index})" for r in cls)
            print(f"  class {k}: {members}")
    if args.dot:
        if sc.variant == GENERAL:
            raise InputError("cannot dump a flow network for a general instance")
        classes = sc.classes
        if sc.variant == UNCONSTRAINED:
            classes = tuple((ref,) for ref in instance.item_refs())
        net = build_network(instance, midpoint_scenario(instance), classes)
        Path(args.dot).write_text(network_to_dot(net))
        print(f"wrote {args.dot}")
    return EXIT_OK


def _cmd_reduce(args) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from exc
    if args.kind == "indepset":
        if args.k is None:
            raise InputError("reduce indepset requires -k (independent set size)")
        try:
            graph = parse_graph(text)
            instance, threshold = independent_set_to_ris(graph, args.k)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        Path(args.output).write_text(instance_to_json(instance))
        print(f"wrote {args.output}: n={graph.n} edges={len(graph.edges)} threshold={threshold}")
        print(f"optimum <= {threshold} iff an independent set of size >= {args.k} exists")
    else:
        try:
            phi = parse_dnf(text)
            B = args.B if args.B is not None else len(phi.clauses) + 1
            artifacts = dnf_to_iris(phi, B)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        Path(args.output).write_text(instance_to_json(artifacts.instance))
        print(
            f"wrote {args.output}: clauses={len(phi.clauses)} B={artifacts.B} Z={artifacts.Z}"
        )
        print(f"formula is positive iff min-max regret <= {artifacts.Z}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        doc = json.loads(Path(args.suite).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read suite {args.suite}: {exc}") from exc
    if isinstance(doc, list):
        doc = {"rows": doc}
    try:
        rows = [
            GenParams(
                m=row["m"],
                r=row["r"],
                p=row["p"],
                k_pairs=row["k"],
                mode=row.get("mode", MODE_NORMAL),
                rng_seed=row.get("seed", 0),
            )
            for row in doc["rows"]
        ]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed suite document: {exc}") from exc
    config = SolverConfig()
    for key, value in doc.get("config", {}).items():
        if key == "epsilon":
            value = Fraction(Decimal(str(value)))
        config = replace(config, **{key: value})
    results = bench_mod.run_benchmark(
        rows,
        instances_per_row=doc.get("instances_per_row", 10),
        config=config,
        verbose=args.verbose,
        measure_time=not args.no_timing,
    )
    csv_text = bench_mod.rows_to_csv(results)
    Path(args.output).write_text(csv_text)
    print(bench_mod.format_table(results), end="")
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riselect",
        description="Solvers for restricted items selection under interval cost uncertainty",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize the maximum regret of an instance")
    p.add_argument("instance")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact cut generation (default)")
    mode.add_argument("--heuristic-only", action="store_true", help="evolutionary search only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write per-iteration JSON lines to this file")
    p.add_argument("--eps", default="0", help="termination tolerance (decimal)")
    p.add_argument("--iter-limit", type=int, default=500)
    p.add_argument("--master-time-limit", type=float, default=60.0)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=[MODE_NORMAL, MODE_TRANSITIVE], default=MODE_NORMAL)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("evaluate", help="regret of a selection")
    p.add_argument("instance")
    p.add_argument("selection")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("classify", help="conflict structure of an instance")
    p.add_argument("instance")
    p.add_argument("--dot", help="write the flow network (midpoint costs) as DOT")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("reduce", help="build an instance from a graph or a formula")
    p.add_argument("kind", choices=["indepset", "dnf"])
    p.add_argument("input")
    p.add_argument("-k", type=int, help="independent set size (indepset)")
    p.add_argument("-B", type=int, help="gadget base cost (dnf); default clauses+1")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("suite")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--verbose", action="store_true")
    p.add_argument(
        "--no-timing",
        action="store_true",
        help="blank the wall-clock columns; the report becomes byte-reproducible",
    )
    p.set_defaults(func=_cmd_bench)

    return parser


def cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    entrypoint()
