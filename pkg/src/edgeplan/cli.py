"""Command-line front end.

Subcommands: gen (seeded scenario file), solve (one algorithm on a scenario),
validate (check an assignment against a scenario), sweep (Monte-Carlo battery
to CSV/SVG), oracle (brute-force reference solve for tiny instances).

Exit codes: 0 success, 1 usage error, 2 infeasible or validation failure,
3 solver limit reached.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import exact, experiments, heuristics, serialize
from .generate import generate
from .model import GenerationParams, evaluate_objective, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="edgeplan", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a scenario file")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--params", help="generation-params JSON file")
    gen.add_argument("--num-tasks", type=int)
    gen.add_argument("--num-services", type=int)
    gen.add_argument("--num-cloudlets", type=int)
    gen.add_argument("--qos-factor", type=float)
    gen.add_argument("--beta", type=float)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="solve a scenario with one algorithm")
    solve.add_argument("scenario")
    solve.add_argument("--alg", required=True, choices=["exact", "local", "global"])
    solve.add_argument("--mode", default=exact.QOS_AWARE,
                       choices=[exact.QOS_AWARE, exact.QOS_LESS])
    solve.add_argument("--backend", default=exact.BUILTIN_BNB,
                       choices=[exact.BUILTIN_BNB, exact.EXTERNAL_MILP])
    solve.add_argument("--node-limit", type=int)
    solve.add_argument("--time-limit", type=float)
    solve.add_argument("--out", help="write assignment + report JSON here")

    val = sub.add_parser("validate", help="check an assignment file against a scenario")
    val.add_argument("scenario")
    val.add_argument("assignment")

    sweep = sub.add_parser("sweep", help="run a sweep spec to CSV or SVG")
    sweep.add_argument("spec", help="sweep-spec JSON file")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--format", default="csv", choices=["csv", "svg"])
    sweep.add_argument("--metric", default="objective", choices=["objective", "drop"])
    sweep.add_argument("--seed", type=int, help="override the spec's seed_base")
    sweep.add_argument("--workers", type=int, default=1)

    oracle = sub.add_parser("oracle", help="brute-force reference solve (tiny instances)")
    oracle.add_argument("scenario")
    oracle.add_argument("--mode", default=exact.QOS_AWARE,
                        choices=[exact.QOS_AWARE, exact.QOS_LESS])
    oracle.add_argument("--out")

    return parser


def _load_params(args) -> GenerationParams:
    if args.params:
        params = serialize.params_from_document(serialize.load(args.params))
    else:
        params = GenerationParams()
    overrides = {}
    for flag in ("num_tasks", "num_services", "num_cloudlets", "qos_factor", "beta"):
        value = getattr(args, flag)
        if value is not None:
            overrides[flag] = value
    return dataclasses.replace(params, **overrides) if overrides else params


def _cmd_gen(args) -> int:
    scenario = generate(_load_params(args), args.seed)
    serialize.save_scenario(scenario, args.out)
    print(f"wrote scenario: {len(scenario.tasks)} tasks, {len(scenario.services)} services, "
          f"{len(scenario.nodes)} nodes -> {args.out}")
    return EXIT_OK


def _print_report(label, status, report) -> None:
    print(f"{label}: {status}")
    if report is None:
        return
    print(f"  objective  {report.total:.6g} (placement {report.placement_cost:.6g}"
          f" + scheduling {report.scheduling_cost:.6g})")
    print(f"  drops      {report.drop_count} ({report.drop_fraction:.1%})")


def _emit_outcome(args, status, assignment, report) -> None:
    if args.out and assignment is not None:
        doc = serialize.assignment_to_document(assignment, report)
        doc["status"] = status
        serialize.dump(doc, args.out)


def _cmd_solve(args) -> int:
    scenario = serialize.load_scenario(args.scenario)
    if args.alg == "local":
        assignment = heuristics.local_serving(scenario)
    elif args.alg == "global":
        assignment = heuristics.global_serving(scenario)
    else:
        options = exact.SolveOptions(mode=args.mode, node_limit=args.node_limit,
                                     time_limit=args.time_limit, backend=args.backend)
        outcome = exact.solve(scenario, options)
        _print_report("exact", outcome.status, outcome.report)
        print(f"  explored   {outcome.nodes_explored} nodes in {outcome.runtime:.3f}s, "
              f"bound {outcome.best_bound:.6g}")
        _emit_outcome(args, outcome.status, outcome.assignment, outcome.report)
        if outcome.status == exact.INFEASIBLE:
            return EXIT_INFEASIBLE
        if outcome.status == exact.LIMIT_REACHED:
            return EXIT_LIMIT
        return EXIT_OK
    report = evaluate_objective(scenario, assignment)
    _print_report(args.alg, "ok", report)
    _emit_outcome(args, "ok", assignment, report)
    return EXIT_OK


def _cmd_validate(args) -> int:
    scenario = serialize.load_scenario(args.scenario)
    assignment = serialize.assignment_from_document(serialize.load(args.assignment))
    records = validate(scenario, assignment)
    if not records:
        print("feasible: all constraints satisfied, all tasks served")
        return EXIT_OK
    for v in records:
        where = " ".join(f"{k}={getattr(v, k)}" for k in ("node", "task", "service")
                         if getattr(v, k) is not None)
        print(f"constraint {v.constraint} violated ({where}): {v.message}")
    return EXIT_INFEASIBLE


def _cmd_sweep(args) -> int:
    spec = experiments.spec_from_document(serialize.load(args.spec))
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed_base=args.seed)
    result = experiments.run_sweep(spec, workers=args.workers)
    if args.format == "csv":
        experiments.write_csv(result, args.out)
    else:
        summary = experiments.summarize(result)
        experiments.write_svg(summary, args.out, metric=args.metric,
                              swept_param=spec.swept)
    print(f"{len(result.rows)} rows -> {args.out}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    scenario = serialize.load_scenario(args.scenario)
    try:
        outcome = exact.brute_force(scenario, exact.SolveOptions(mode=args.mode))
    except exact.InstanceTooLargeError as err:
        print(f"instance too large for brute force: {err}", file=sys.stderr)
        return EXIT_LIMIT
    _print_report("brute force", outcome.status, outcome.report)
    _emit_outcome(args, outcome.status, outcome.assignment, outcome.report)
    return EXIT_OK if outcome.status == exact.OPTIMAL else EXIT_INFEASIBLE


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "validate": _cmd_validate,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (OSError, json.JSONDecodeError, serialize.ParseError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
