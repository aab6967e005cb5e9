"""Command-line front end; a thin shell over the library API.

Exit codes: 0 run completed and quality gate passed; 2 scenario or usage
problem; 3 run completed but the quality gate failed; 4 a pipeline stage
failed; 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .pipeline import (
    PipelineError,
    default_model_config,
    emit_outputs,
    heatmap_csv,
    report_json,
    run_pipeline,
)
from .scenario import (
    ScenarioSpec,
    default_scenario,
    load_scenario,
    ScenarioError,
    validate_scenario,
)
from .synthgen import generate
from .table import DataTable

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_GATE = 3
EXIT_STAGE = 4
EXIT_IO = 5


def _load_spec(args) -> ScenarioSpec:
    spec = load_scenario(args.scenario) if args.scenario else default_scenario()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "n", None) is not None:
        overrides["n"] = args.n
    if overrides:
        import dataclasses
        spec = dataclasses.replace(spec, **overrides)
    return spec


def _print_summary(report, out) -> None:
    head = (report.strategy_evaluation or {}).get("headline", {})
    print("pipeline complete", file=out)
    if report.quality is not None:
        print(f"  quality gate: {'pass' if report.quality['passed'] else 'FAIL'}", file=out)
    for key in sorted(head):
        print(f"  {key}: {head[key]}", file=out)


def cmd_validate(args) -> int:
    spec = _load_spec(args)
    problems = validate_scenario(spec)
    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return EXIT_SCENARIO
    print("scenario is valid")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _load_spec(args)
    table = generate(spec)
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "data.csv")
        table.write_csv(path)
        print(f"wrote {path} ({table.n_rows} rows, {len(table.names)} columns)")
    else:
        sys.stdout.write(table.to_csv())
    return EXIT_OK


def _run_and_emit(args, spec=None, table=None) -> int:
    config = default_model_config()
    try:
        report = run_pipeline(spec=spec, table=table, config=config, boot_b=args.boot)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.out:
            emit_outputs(exc.partial, args.out)
            print(f"partial outputs written to {args.out}", file=sys.stderr)
        return EXIT_STAGE
    if args.out:
        emit_outputs(report, args.out)
    if args.format == "json":
        sys.stdout.write(report_json(report))
    elif args.format == "csv":
        sys.stdout.write(heatmap_csv(report))
    else:
        _print_summary(report, sys.stdout)
    if report.quality is not None and not report.quality["passed"]:
        print("quality gate failed", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


def cmd_pipeline(args) -> int:
    return _run_and_emit(args, spec=_load_spec(args))


def cmd_analyze(args) -> int:
    try:
        table = DataTable.read_csv(args.data)
    except (OSError, ValueError) as exc:
        print(f"error reading '{args.data}': {exc}", file=sys.stderr)
        return EXIT_IO
    spec = None
    if args.scenario:
        spec = load_scenario(args.scenario)
    return _run_and_emit(args, spec=spec, table=table)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structpath",
        description="Simulate firm-response scenarios and run the structural "
                    "path regression pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed_n=True, boot=False, out_dir=True, fmt=False):
        p.add_argument("--scenario", help="scenario JSON file (default: built-in scenario)")
        if seed_n:
            p.add_argument("--seed", type=int, help="override the scenario seed")
            p.add_argument("--n", type=int, help="override the sample size")
        if boot:
            p.add_argument("--boot", type=int, default=5000,
                           help="bootstrap resamples (default 5000)")
        if out_dir:
            p.add_argument("--out", help="output directory")
        if fmt:
            p.add_argument("--format", choices=["json", "csv"],
                           help="write the full report (json) or the heatmap "
                                "matrix (csv) to stdout")

    p_val = sub.add_parser("validate", help="lint a scenario file")
    add_common(p_val, seed_n=False, out_dir=False)
    p_val.set_defaults(func=cmd_validate)

    p_sim = sub.add_parser("simulate", help="generate data.csv from a scenario")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_pipe = sub.add_parser("pipeline", help="simulate and analyze end to end")
    add_common(p_pipe, boot=True, fmt=True)
    p_pipe.set_defaults(func=cmd_pipeline)

    p_an = sub.add_parser("analyze", help="analyze an existing CSV dataset")
    add_common(p_an, seed_n=False, boot=True, fmt=True)
    p_an.add_argument("--data", required=True, help="input CSV file")
    p_an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
