"""Command-line front end: run, sweep, compare, render, validate.

Exit status: 0 success, 1 usage error, 2 validation error, 3 trial failure
under ``--strict``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .arena import BUILTIN_NAMES, ScenarioError, SimParams, load_scenario_file, rasterize, resolve_scenario
from .astar import NoPathError, astar_world_path
from .metrics import (read_records_csv, records_to_csv, run_experiment, run_trial, summarize, summary_table,
                      summary_to_csv)
from .render import LAYERS, RenderError, RenderSpec, render

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_TRIAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    """'1,2,5' or '1-10' or a mix of both."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                a, b = part.split("-", 1) if not part.startswith("-") else (part, "")
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="swarmpath", description="Swarm path formation simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one trial")
    r.add_argument("--scenario", required=True, help="scenario file or bundled name")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--robots", type=int, default=None)
    r.add_argument("--allocation", type=_on_off, default=False, metavar="{on,off}")
    r.add_argument("--trace-out", type=Path, default=None)
    r.add_argument("--strict", action="store_true", help="exit 3 if the trial fails")

    s = sub.add_parser("sweep", help="run a grid of trials")
    s.add_argument("--scenarios", default="all", help="comma-separated names/files, or 'all'")
    s.add_argument("--counts", type=_int_list, default=[60, 80, 100])
    s.add_argument("--seeds", type=_int_list, default=[1, 2, 3, 4, 5])
    s.add_argument("--modes", choices=("on", "off", "both"), default="both")
    s.add_argument("--out-dir", type=Path, required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--strict", action="store_true", help="exit 3 if any trial fails")

    c = sub.add_parser("compare", help="summarize a records CSV per environment")
    c.add_argument("metrics", type=Path)
    c.add_argument("--csv", action="store_true", help="emit CSV instead of a text table")

    d = sub.add_parser("render", help="render SVG frames from a trace")
    d.add_argument("--trace", type=Path, required=True)
    g = d.add_mutually_exclusive_group()
    g.add_argument("--tick", type=int, default=None)
    g.add_argument("--stride", type=int, default=None)
    g.add_argument("--final", action="store_true", help="final frame only (default)")
    d.add_argument("--layers", default=",".join(LAYERS), help=f"comma-separated subset of {','.join(LAYERS)}")
    d.add_argument("--out-dir", type=Path, default=Path("."))
    d.add_argument("--size", type=int, default=800)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("scenario")
    return p


def _load(ref: str):
    try:
        path = resolve_scenario(ref)
    except FileNotFoundError as exc:
        raise ScenarioError(str(exc)) from None
    return load_scenario_file(path)


def _print_params(params: SimParams, stream=None) -> None:
    print("params " + json.dumps(dataclasses.asdict(params), sort_keys=True), file=stream or sys.stderr)


def cmd_run(a) -> int:
    sc = _load(a.scenario)
    _print_params(sc.params)
    rec, trace = run_trial(sc, a.seed, a.robots, a.allocation)
    if a.trace_out is not None:
        a.trace_out.parent.mkdir(parents=True, exist_ok=True)
        trace.write(a.trace_out)
    print(json.dumps(dataclasses.asdict(rec), sort_keys=False))
    return EXIT_TRIAL if a.strict and not rec.success else EXIT_OK


def cmd_sweep(a) -> int:
    refs = list(BUILTIN_NAMES) if a.scenarios == "all" else [x for x in a.scenarios.split(",") if x]
    scenarios = [_load(r) for r in refs]
    _print_params(scenarios[0].params)
    if a.jobs < 1:
        raise UsageError("--jobs must be >= 1")

    def progress(rec):
        print(f"{rec.scenario} n={rec.robot_count} seed={rec.seed} alloc={rec.allocation_enabled} "
              f"success={rec.success}", file=sys.stderr)

    records = run_experiment(scenarios, a.counts, a.seeds, a.modes, jobs=a.jobs, on_record=progress)
    a.out_dir.mkdir(parents=True, exist_ok=True)
    (a.out_dir / "records.csv").write_text(records_to_csv(records))
    (a.out_dir / "summary.csv").write_text(summary_to_csv(summarize(records)))
    print(f"{len(records)} records written to {a.out_dir}")
    return EXIT_TRIAL if a.strict and not all(r.success for r in records) else EXIT_OK


def cmd_compare(a) -> int:
    try:
        records = read_records_csv(a.metrics)
    except OSError as exc:
        raise UsageError(f"cannot read {a.metrics}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed records file: {exc}") from None
    rows = summarize(records)
    print(summary_to_csv(rows) if a.csv else summary_table(rows), end="" if a.csv else "\n")
    return EXIT_OK


def cmd_render(a) -> int:
    layers = tuple(x for x in a.layers.split(",") if x)
    spec = RenderSpec(trace=a.trace, tick=a.tick, stride=a.stride, layers=layers, out_dir=a.out_dir, size=a.size)
    for p in render(spec):
        print(p)
    return EXIT_OK


def cmd_validate(a) -> int:
    sc = _load(a.scenario)
    p = sc.params
    rasterize(sc.arena, p.robot_radius, p.robot_radius)
    try:
        _, path = astar_world_path(sc.arena, p)
    except NoPathError as exc:
        raise ScenarioError(f"goal: unreachable from nest ({exc})") from None
    print(f"{sc.name}: ok ({len(sc.arena.obstacles)} obstacles, {sc.robot_count} robots, "
          f"class {sc.arena.environment_class}, A* length {path.cost:.2f})")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare, "render": cmd_render,
            "validate": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        return COMMANDS[a.command](a)
    except ScenarioError as exc:
        print(f"swarmpath: invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, RenderError) as exc:
        print(f"swarmpath {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
