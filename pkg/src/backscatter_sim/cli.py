"""Command-line front end.

    backscatter-sim validate SCENARIO [--set PATH=VALUE ...]
    backscatter-sim run SCENARIO [--seed N] [--out DIR] [--format csv|json|both]
    backscatter-sim sweep SCENARIO --parameter PATH (--values A,B,.. | --grid START:STOP:STEP)
    backscatter-sim experiment SCENARIO
    backscatter-sim list-presets

SCENARIO is a JSON file or the name of a shipped preset. Exit status is 0 on
success, 1 when the scenario or an override is invalid and 2 for any other
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .engine import simulate
from .experiments import SWEEP_MODES, SweepSpec, output_stem, run_experiment, run_sweep
from .scenario import (
    PRESET_ALIASES,
    ScenarioError,
    apply_overrides,
    load_scenario,
    parse_override_value,
    preset_names,
    read_document,
    read_preset,
    to_document,
)

PROG = "backscatter-sim"
OUTPUT_DIR_ENV = "BACKSCATTER_SIM_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Invalid(Exception):
    """Bad user input that is not a scenario schema problem (exit 1)."""


def _parse_sets(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        path, sep, value = item.partition("=")
        if not sep or not path:
            raise _Invalid(f"--set expects PATH=VALUE, got {item!r}")
        out[path.strip()] = parse_override_value(value)
    return out


def _load(args) -> tuple[dict, str]:
    doc, label = read_document(args.scenario)
    overrides = _parse_sets(args.set)
    if overrides:
        try:
            doc = apply_overrides(doc, overrides)
        except ScenarioError as exc:
            raise ScenarioError(exc.problems, label) from None
    return doc, label


def write_atomic(path: Path, text: str) -> None:
    """Write UTF-8 text via a temporary file in the same directory and rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUTPUT_DIR_ENV) or ".")


def _emit(args, name: str, seed0: int, csv_text: str, json_text: str) -> None:
    stem = output_stem(name, _timestamp(), seed0)
    out = _out_dir(args)
    written = []
    if args.format in ("csv", "both"):
        written.append(out / f"{stem}.csv")
        write_atomic(written[-1], csv_text)
    if args.format in ("json", "both"):
        written.append(out / f"{stem}.json")
        write_atomic(written[-1], json_text)
    for p in written:
        print(p)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


# -- subcommands ------------------------------------------------------------


def cmd_validate(args) -> int:
    doc, label = _load(args)
    scenario = load_scenario(doc, source=label)
    print(f"{label}: valid", file=sys.stderr)
    sys.stdout.write(_dumps(to_document(scenario)))
    return EXIT_OK


def cmd_run(args) -> int:
    doc, label = _load(args)
    scenario = load_scenario(doc, source=label)
    report = simulate(scenario, args.seed)
    _emit(args, scenario.name, report.seed, report.to_csv(), report.to_json())
    return EXIT_OK


def _grid(args) -> list[float]:
    if (args.values is None) == (args.grid is None):
        raise _Invalid("give exactly one of --values or --grid")
    try:
        if args.values is not None:
            return [float(v) for v in args.values.split(",") if v.strip()]
        start, stop, step = (float(x) for x in args.grid.split(":"))
    except ValueError:
        raise _Invalid("--values needs numbers A,B,..; --grid needs START:STOP:STEP") from None
    if step <= 0 or stop < start:
        raise _Invalid("--grid needs STEP > 0 and STOP >= START")
    n = int((stop - start) / step + 1e-9) + 1
    return [start + i * step for i in range(n)]


def cmd_sweep(args) -> int:
    doc, label = _load(args)
    scenario = load_scenario(doc, source=label)
    values = _grid(args)
    if not values:
        raise _Invalid("sweep grid is empty")
    try:
        spec = SweepSpec(
            scenario=doc,
            parameter=args.parameter,
            values=values,
            replications=args.replications,
            base_seed=args.seed,
            ber_threshold=args.threshold,
            mode=args.mode,
            tag=args.tag,
            receiver=args.receiver,
            workers=args.workers,
        )
    except ValueError as exc:
        raise _Invalid(str(exc)) from None
    result = run_sweep(spec)
    summary = {
        "scenario": scenario.name,
        "parameter": result.parameter,
        "mode": args.mode,
        "seeds": list(result.seeds),
        "ber_threshold": result.ber_threshold,
        "max_range": result.max_range,
    }
    _emit(args, scenario.name, result.seeds[0], result.to_csv(), _dumps(summary))
    return EXIT_OK


def cmd_experiment(args) -> int:
    doc, label = _load(args)
    out = run_experiment(doc, label, seed=args.seed, workers=args.workers)
    body = {"experiment": out.name, "kind": out.kind, "seed": out.seed, "summary": out.summary}
    _emit(args, out.name, out.seed, out.csv, _dumps(body))
    return EXIT_OK


def cmd_list_presets(args) -> int:
    for name in preset_names():
        desc = read_preset(name).get("description", "")
        aliases = sorted(a for a, t in PRESET_ALIASES.items() if t == name)
        extra = f" (also: {', '.join(aliases)})" if aliases else ""
        print(f"{name}{extra}\n    {desc}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG, description="Simulate bistatic backscatter links from JSON scenarios."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file or shipped preset name")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="PATH=VALUE",
        help="override a field by dotted path, e.g. nodes.rx.position.0=50 (repeatable)",
    )

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--seed", type=int, default=None, help="RNG seed (default: scenario seed)")
    output.add_argument(
        "--out", default=None, help=f"output directory (default: ${OUTPUT_DIR_ENV} or .)"
    )
    output.add_argument("--format", choices=("csv", "json", "both"), default="both")

    p = sub.add_parser("validate", parents=[common], help="check a scenario and print it resolved")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", parents=[common, output], help="simulate a scenario")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common, output], help="sweep one parameter")
    p.add_argument("--parameter", required=True, help="dotted path of the swept field")
    p.add_argument("--values", help="comma-separated grid values")
    p.add_argument("--grid", help="START:STOP:STEP")
    p.add_argument("--replications", type=int, default=3)
    p.add_argument("--mode", choices=SWEEP_MODES, default="analytic")
    p.add_argument("--threshold", type=float, default=1e-2, help="BER success threshold")
    p.add_argument("--tag", default=None)
    p.add_argument("--receiver", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "experiment", parents=[common, output], help="run the scenario's experiment block"
    )
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("list-presets", help="list shipped presets")
    p.set_defaults(func=cmd_list_presets)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    where = f"{PROG} {args.command}"
    try:
        return args.func(args)
    except ScenarioError as exc:
        for line in str(exc).splitlines():
            print(f"{where}: error: {line}", file=sys.stderr)
        return EXIT_INVALID
    except _Invalid as exc:
        source = getattr(args, "scenario", "-")
        print(f"{where}: error: {source}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report, don't traceback
        source = getattr(args, "scenario", "-")
        print(f"{where}: error: {source}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
