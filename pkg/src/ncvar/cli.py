"""Command-line entry point.

Subcommands: ``suite`` runs the hand-derived cases plus a fuzz campaign,
``check`` runs the checks named in a scenario file, ``mc`` runs a Monte
Carlo scenario. Reports are newline-delimited JSON records (or a CSV
summary); the exit code is 0 when every applicable check passes, 1 on
any violation or statistical failure, and 2 on usage or parse errors.
The NCVAR_THREADS environment variable caps scenario-level parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .fuzz import ALL_CHECKS, Tolerances, run_suite
from .reports import record_failed
from .scenarios import (
    BUILTIN_SCENARIOS,
    ScenarioError,
    builtin_scenario_text,
    load_scenario,
    parse_scenario_text,
    run_scenario_data,
)

__all__ = ["main", "entry"]

CSV_COLUMNS = (
    "index", "scenario", "check", "kind", "name", "verdict", "passed",
    "lhs", "rhs", "slack", "measured", "threshold",
)


def _emit(records: list[dict], fmt: str, out: str | None) -> None:
    if fmt == "ndjson":
        lines = [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in records]
        text = "\n".join(lines) + ("\n" if lines else "")
    else:  # csv-summary
        rows = [",".join(CSV_COLUMNS)]
        for r in records:
            rows.append(",".join(str(r.get(c, "")) for c in CSV_COLUMNS))
        text = "\n".join(rows) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    raw = os.environ.get("NCVAR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _tolerances(tol: float | None) -> Tolerances:
    return Tolerances() if tol is None else Tolerances.uniform(tol)


def _exit_code(records: list[dict]) -> int:
    return 1 if any(record_failed(r) for r in records) else 0


def _load(args) -> dict:
    if args.builtin:
        return parse_scenario_text(builtin_scenario_text(args.builtin),
                                   label=f"builtin:{args.builtin}")
    if not args.scenario:
        raise ScenarioError("no scenario given: pass a path or --builtin NAME")
    return load_scenario(args.scenario)


def _cmd_suite(args) -> int:
    tols = _tolerances(args.tol)
    records = run_suite(
        seed=args.seed,
        fuzz_count=args.fuzz_count,
        max_factors=args.max_factors,
        max_local_dim=args.max_local_dim,
        tols=tols,
        include=ALL_CHECKS,
        threads=_threads(),
    )
    _emit(records, args.format, args.out)
    return _exit_code(records)


def _cmd_check(args) -> int:
    data = _load(args)
    records = run_scenario_data(data, tols=_tolerances(args.tol))
    for i, r in enumerate(records):
        r["index"] = i
    _emit(records, args.format, args.out)
    return _exit_code(records)


def _cmd_mc(args) -> int:
    data = _load(args)
    if data.get("kind") != "montecarlo":
        raise ScenarioError("mc expects a scenario with kind 'montecarlo'")
    overrides = {"n_samples": args.n_samples, "seed": args.seed}
    records = run_scenario_data(data, mc_overrides=overrides)
    for i, r in enumerate(records):
        r["index"] = i
    _emit(records, args.format, args.out)
    return _exit_code(records)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncvar",
        description="Verify variance inequalities over tensor products of "
                    "matrix algebras, plus Monte Carlo checks of their "
                    "classical corollaries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    suite = sub.add_parser("suite", help="run hand-derived cases plus a fuzz campaign")
    suite.add_argument("--seed", type=int, default=42, help="fuzz seed (default 42)")
    suite.add_argument("--fuzz-count", type=int, default=500,
                       help="number of random scenarios (default 500)")
    suite.add_argument("--max-factors", type=int, default=4,
                       help="max tensor factors per scenario (default 4)")
    suite.add_argument("--max-local-dim", type=int, default=3,
                       help="max local factor dimension (default 3)")
    suite.add_argument("--tol", type=float, default=None,
                       help="override every comparison tolerance (default: per-check)")
    suite.add_argument("--out", default=None, help="write reports to this path")
    suite.add_argument("--format", choices=("ndjson", "csv-summary"), default="ndjson",
                       help="report format (default ndjson)")
    suite.set_defaults(func=_cmd_suite)

    check = sub.add_parser("check", help="run the checks named in a scenario file")
    check.add_argument("scenario", nargs="?", default=None, help="scenario JSON path")
    check.add_argument("--builtin", choices=BUILTIN_SCENARIOS, default=None,
                       help="run a bundled scenario instead of a file")
    check.add_argument("--tol", type=float, default=None,
                       help="override every comparison tolerance (default: per-check)")
    check.add_argument("--out", default=None, help="write reports to this path")
    check.add_argument("--format", choices=("ndjson", "csv-summary"), default="ndjson",
                       help="report format (default ndjson)")
    check.set_defaults(func=_cmd_check)

    mc = sub.add_parser("mc", help="run a Monte Carlo scenario")
    mc.add_argument("scenario", nargs="?", default=None, help="scenario JSON path")
    mc.add_argument("--builtin", choices=BUILTIN_SCENARIOS, default=None,
                    help="run a bundled scenario instead of a file")
    mc.add_argument("--n-samples", type=int, default=None, help="override sample count")
    mc.add_argument("--seed", type=int, default=None, help="override seed")
    mc.add_argument("--out", default=None, help="write reports to this path")
    mc.add_argument("--format", choices=("ndjson", "csv-summary"), default="ndjson",
                    help="report format (default ndjson)")
    mc.set_defaults(func=_cmd_mc)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; surface that as our return code
        return int(exc.code) if exc.code else int(exc.code or 0)
    try:
        return args.func(args)
    except (ScenarioError, FileNotFoundError, ValueError) as exc:
        print(f"ncvar: error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
