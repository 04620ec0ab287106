"""Command-line runner for experiment specs and scenario suites.

Exit status is 0 when every bound holds, 1 when any bound fails and 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .scenarios import ExperimentSpec, ScenarioResult, format_csv, load_spec, load_suite, run_scenario

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def bundled_suite(name: str = "paper-bounds") -> Path:
    return Path(str(resources.files("copgambler") / "suites" / name))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="copgambler",
        description="Estimate expected capture times in the cop-versus-gambler game and check them against bounds.",
    )
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", type=Path, help="spec file (key=value sections or JSON)")
    src.add_argument("--suite", help="directory of spec files, or the name of a bundled suite")
    parser.add_argument("--trials", type=int, help="override the trial count of every scenario")
    parser.add_argument("--seed", type=int, help="override the base seed of every scenario")
    parser.add_argument("--workers", type=int, default=1, help="worker processes per scenario (default 1)")
    parser.add_argument("--csv", type=Path, help="write result rows to this CSV file ('-' for stdout)")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary table")
    return parser


def _load(args: argparse.Namespace) -> list[ExperimentSpec]:
    if args.spec is not None:
        return load_spec(args.spec)
    path = Path(args.suite)
    if not path.exists() and (bundled_suite(args.suite)).is_dir():
        path = bundled_suite(args.suite)
    return load_suite(path)


def _summary(results: list[ScenarioResult]) -> str:
    lines = []
    width = max(len(r.spec.name) for r in results)
    for result in sorted(results, key=lambda r: r.spec.name):
        for row in result.rows:
            bounds = []
            if row.lower_bound is not None:
                bounds.append(f">= {row.lower_bound:.4g}")
            if row.bound is not None:
                bounds.append(f"<= {row.bound:.4g}")
            verdict = "PASS" if row.passed else "FAIL"
            lines.append(f"{verdict}  {row.scenario:<{width}}  n={row.n:<4} k={row.k:<3} "
                         f"mean={row.mean:10.4f} se={row.std_error:8.4f} censored={row.censored} "
                         f"{' and '.join(bounds)}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} scenarios passed")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1 or (args.trials is not None and args.trials < 1):
        print("error: --workers and --trials must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        specs = _load(args)
        overrides = {}
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.seed is not None:
            overrides["seed"] = args.seed
        specs = [replace(s, **overrides) for s in specs]
        results = [run_scenario(s, args.workers) for s in sorted(specs, key=lambda s: s.name)]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(_summary(results))
    if args.csv is not None:
        text = format_csv(results)
        if str(args.csv) == "-":
            sys.stdout.write(text)
        else:
            args.csv.write_text(text)
    return EXIT_PASS if all(r.passed for r in results) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
