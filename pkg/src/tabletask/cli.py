"""Command-line entry point: generate | solve | simulate | evaluate | report | serve."""

from __future__ import annotations

import argparse
import sys

from .config import apply_flag_overrides, load_config
from .errors import EXIT_BACKEND, EXIT_OK, EXIT_USAGE, EngineError, UsageError
from .stages import (
    parse_type_mix,
    stage_evaluate,
    stage_generate,
    stage_report,
    stage_simulate,
    stage_solve,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="engine config file (JSON)")
    parser.add_argument("--seed", type=int, help="global seed override")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads")
    parser.add_argument("--near-threshold", type=float, dest="near_threshold",
                        help="xy close-distance threshold in meters")
    parser.add_argument("--touch-threshold", type=float, dest="touch_threshold",
                        help="vertical touching threshold in meters")
    parser.add_argument("--between-angle", type=float, dest="between_angle",
                        help="max bend angle for between, in radians")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabletask",
        description="Deterministic tabletop task synthesis, solving, simulation and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate validated, feasible scenarios")
    _add_common(p)
    p.add_argument("--out", required=True, help="output run directory")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--types", help="comma-separated task-type mix (default: all four)")
    p.add_argument("--backend", help="mock | transcript | http")

    p = sub.add_parser("solve", help="construct layouts for generated scenarios")
    _add_common(p)
    p.add_argument("--run", required=True, help="run directory with scenarios")

    p = sub.add_parser("simulate", help="run episodes under a policy")
    _add_common(p)
    p.add_argument("--run", required=True)
    p.add_argument("--policy", default="oracle",
                   help="oracle | null | noisy:<p> | exec:<command>")

    p = sub.add_parser("evaluate", help="score episode logs against goals")
    _add_common(p)
    p.add_argument("--run", required=True)

    p = sub.add_parser("report", help="aggregate SR/SPL tables")
    _add_common(p)
    p.add_argument("--run", required=True)

    p = sub.add_parser("serve", help="serve the curation HTTP API")
    _add_common(p)
    p.add_argument("--store", required=True, help="scenario store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8347)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        config = load_config(args.config)
        config = apply_flag_overrides(
            config,
            seed=args.seed,
            near_threshold=args.near_threshold,
            touch_threshold=args.touch_threshold,
            between_angle=args.between_angle,
            backend=getattr(args, "backend", None),
        )

        if args.command == "generate":
            mix = parse_type_mix(args.types)
            summary = stage_generate(config, args.count, args.out, mix=mix, jobs=args.jobs)
            print(f"generated {summary.processed - len(summary.failures)}/{summary.processed} scenarios")
            if summary.failures:
                for name, msg in summary.failures:
                    print(f"  failed {name}: {msg}", file=sys.stderr)
                return EXIT_BACKEND
            return EXIT_OK

        if args.command == "solve":
            summary = stage_solve(config, args.run, jobs=args.jobs)
            print(f"solved {summary.processed - len(summary.failures)}/{summary.processed} layouts")
            if summary.failures:
                for name, msg in summary.failures:
                    print(f"  infeasible {name}: {msg}", file=sys.stderr)
                return 4
            return EXIT_OK

        if args.command == "simulate":
            summary = stage_simulate(config, args.run, policy_spec=args.policy, jobs=args.jobs)
            print(f"simulated {summary.processed} episodes under {args.policy}")
            return EXIT_OK

        if args.command == "evaluate":
            results = stage_evaluate(config, args.run)
            print(f"evaluated {len(results)} episodes")
            return EXIT_OK

        if args.command == "report":
            bench = stage_report(config, args.run)
            print(bench.format_table())
            return EXIT_OK

        if args.command == "serve":
            from .service import serve

            serve(args.store, config, args.host, args.port)
            return EXIT_OK

        raise UsageError(f"unknown command {args.command}")
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
