"""Command-line harness: run episodes, compare variants, check, benchmark."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .barrier import VARIANTS
from .bench import bench_barrier, check_gradients
from .episode import compare, comparison_json, comparison_table, run_episode
from .scenario import (ParseError, ValidationError, load_scenario,
                       resolve_scenario, with_variant)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpnav",
        description="GP-barrier safety filtering in a deterministic 2D world")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario episode")
    run.add_argument("scenario", help="scenario file path or shipped name")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out-dir", default=None)
    run.add_argument("--variant", choices=VARIANTS, default=None)
    run.add_argument("--dump-field", action="store_true",
                     help="write a barrier-field CSV from the final frame")
    run.add_argument("--dump-perception", action="store_true",
                     help="write per-frame perception JSON-lines")
    run.set_defaults(handler=_cmd_run)

    cmp_parser = sub.add_parser("compare", help="run variants on one scenario")
    cmp_parser.add_argument("scenario")
    cmp_parser.add_argument("--variants", required=True,
                            help="comma-separated variant names")
    cmp_parser.add_argument("--seed", type=int, default=None)
    cmp_parser.add_argument("--out-dir", default=None)
    cmp_parser.set_defaults(handler=_cmd_compare)

    grad = sub.add_parser("check-gradients",
                          help="derivatives vs finite differences")
    grad.add_argument("--cases", type=int, default=100)
    grad.set_defaults(handler=_cmd_check_gradients)

    bench = sub.add_parser("bench", help="time full barrier evaluations")
    bench.add_argument("--sizes", default="1,5,30,60",
                       help="comma-separated dataset sizes")
    bench.add_argument("--reps", type=int, default=50)
    bench.set_defaults(handler=_cmd_bench)
    return parser


def _load(args):
    cfg = load_scenario(resolve_scenario(args.scenario))
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    if args.variant is not None:
        cfg = with_variant(cfg, args.variant)
    _, metrics = run_episode(cfg, out_dir=args.out_dir,
                             dump_field=args.dump_field,
                             dump_perception=args.dump_perception)
    print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    return 1 if metrics.collision else 0


def _cmd_compare(args) -> int:
    cfg = _load(args)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    results = compare(cfg, variants)
    print(comparison_table(results))
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.json").write_text(comparison_json(results))
    return 1 if any(m.collision for m in results.values()) else 0


def _cmd_check_gradients(args) -> int:
    report = check_gradients(cases=args.cases)
    print(json.dumps(report, indent=2, sort_keys=True))
    ok = (report["spatial_max_rel_err"] <= 1e-5
          and report["time_max_rel_err"] <= 1e-5)
    return 0 if ok else 1


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    rows = bench_barrier(sizes, repetitions=args.reps)
    print(f"{'N':>5} {'mean_ms':>10} {'median_ms':>10}")
    for row in rows:
        print(f"{row.size:>5} {row.mean_ms:>10.3f} {row.median_ms:>10.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
