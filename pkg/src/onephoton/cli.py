"""Command-line front end.

    onephoton run <scenario-file|example-name> [--out DIR] [--no-oracle]
    onephoton validate <scenario-file|example-name>
    onephoton list-examples

Exit codes: 0 on success with every invariant check passing, 1 when a check
fails, 2 for invalid or oversized scenarios.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .scenario import (
    Scenario,
    ScenarioError,
    example_names,
    load_example,
    load_scenario,
    run_scenario,
)

log = logging.getLogger("onephoton")


def _resolve(target: str) -> Scenario:
    path = Path(target)
    if path.exists():
        return load_scenario(path)
    if target in example_names():
        return load_example(target)
    raise ScenarioError(f"no scenario file or example named {target!r}")


def _cmd_run(args) -> int:
    scenario = _resolve(args.scenario)
    report = run_scenario(scenario, oracle=False if args.no_oracle else None)
    out = args.out or scenario.output.dir or str(Path("out") / scenario.name)
    for path in report.write(out):
        log.info("wrote %s", path)
    for name, entry in report.scalars.items():
        value = entry["value"]
        if isinstance(value, float):
            print(f"{name:38s} {value:.12g}")
    for note in report.notes:
        print(f"note: {note}")
    for name, ok in report.checks.items():
        print(f"check {name:32s} {'PASS' if ok else 'FAIL'}")
    return 0 if report.passed else 1


def _cmd_validate(args) -> int:
    scenario = _resolve(args.scenario)
    print(json.dumps(scenario.to_dict(), indent=2))
    return 0


def _cmd_list(args) -> int:
    for name in example_names():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onephoton",
        description="One-photon absorption from coherent, number-state and thermal fields.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write summary.json / timeseries.csv")
    run.add_argument("scenario", help="scenario TOML file or shipped example name")
    run.add_argument("--out", help="output directory (default: output.dir or out/<name>)")
    run.add_argument("--no-oracle", action="store_true", help="skip the brute-force cross-check")
    run.set_defaults(func=_cmd_run)

    validate = sub.add_parser("validate", help="parse a scenario and print it with defaults applied")
    validate.add_argument("scenario")
    validate.set_defaults(func=_cmd_validate)

    examples = sub.add_parser("list-examples", help="list the shipped example scenarios")
    examples.set_defaults(func=_cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
