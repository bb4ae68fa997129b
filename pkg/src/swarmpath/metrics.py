"""Trial metrics, the experiment sweep and the per-environment summary table."""

from __future__ import annotations

import csv
import functools
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, fields
from typing import Callable, Iterable

from .arena import BUILTIN_NAMES, ArenaConfig, Scenario, SimParams
from .astar import NoPathError, astar_world_length
from .chain import STAGES, Chain, ChainIncomplete, chain_length, extract_chain, validate_chain  # noqa: F401
from .engine import Trace, make_world, run


def resource_reduction(deployed: int, allocated: int) -> float:
    if deployed <= 0 or not 0 <= allocated <= deployed:
        raise ValueError("need deployed > 0 and 0 <= allocated <= deployed")
    return 100.0 * (deployed - allocated) / deployed


@dataclass(frozen=True)
class MetricsRecord:
    scenario: str
    robot_count: int
    seed: int
    allocation_enabled: bool
    success: bool
    time_ticks: int
    chain_length_subgoal: float
    chain_length_opt1: float
    chain_length_opt2: float
    astar_length: float
    allocated: int
    deployed: int
    resource_reduction: float
    final_length: float = 0.0
    required: int = 0
    ticks_run: int = 0

    @property
    def key(self) -> tuple:
        return (self.scenario, self.robot_count, self.seed, self.allocation_enabled)


COLUMNS = [f.name for f in fields(MetricsRecord)]


@functools.lru_cache(maxsize=64)
def _astar_cached(arena: ArenaConfig, params: SimParams) -> float:
    try:
        return astar_world_length(arena, params)
    except NoPathError:
        return 0.0


def run_trial(scenario: Scenario, seed: int, robot_count: int | None = None,
              allocation: bool = False, stop=None) -> tuple[MetricsRecord, Trace]:
    world = make_world(scenario, seed, robot_count, allocation)
    trace = run(world, stop, scenario=scenario)
    n = world.n
    lengths = {s: (world.stage_chain[s].length if s in world.stage_chain else 0.0) for s in STAGES}
    done = [s for s in STAGES if s in world.stage_chain]
    success = "subgoal" in world.stage_tick
    allocated = len(world.initiated) if allocation else n
    rec = MetricsRecord(
        scenario=scenario.name, robot_count=n, seed=seed, allocation_enabled=allocation,
        success=success,
        time_ticks=world.stage_tick["subgoal"] if success else world.tick,
        chain_length_subgoal=lengths["subgoal"], chain_length_opt1=lengths["opt1"],
        chain_length_opt2=lengths["opt2"],
        astar_length=_astar_cached(scenario.arena, world.params),
        allocated=allocated, deployed=n,
        resource_reduction=resource_reduction(n, allocated) if n else 0.0,
        final_length=lengths[done[-1]] if done else 0.0,
        required=world.required_n or 0,
        ticks_run=world.tick,
    )
    trace.metrics = asdict(rec)
    trace.success = success
    return rec, trace


def _trial_job(args) -> MetricsRecord:
    scenario, count, seed, alloc = args
    return run_trial(scenario, seed, count, alloc)[0]


def trial_grid(scenarios: Iterable[Scenario], robot_counts: Iterable[int], seeds: Iterable[int],
               allocation: str = "both") -> list[tuple]:
    modes = {"on": (True,), "off": (False,), "both": (False, True)}[allocation]
    return [(sc, c, s, m) for sc in scenarios for c in robot_counts for s in seeds for m in modes]


def run_experiment(scenarios: Iterable[Scenario], robot_counts: Iterable[int], seeds: Iterable[int],
                   allocation: str = "both", jobs: int = 1,
                   on_record: Callable[[MetricsRecord], None] | None = None) -> list[MetricsRecord]:
    """One record per (scenario, count, seed, mode). Paired modes share the seed.
    ``on_record`` sees records in completion order; the return value is sorted."""
    grid = trial_grid(list(scenarios), list(robot_counts), list(seeds), allocation)
    records: list[MetricsRecord] = []

    def accept(rec):
        records.append(rec)
        if on_record is not None:
            on_record(rec)

    def failed(args, exc):
        sc, count, seed, alloc = args
        return MetricsRecord(sc.name, count, seed, alloc, False, 0, 0.0, 0.0, 0.0, 0.0,
                             count if not alloc else 0, count,
                             0.0 if not alloc else 100.0)

    if jobs <= 1:
        for args in grid:
            try:
                accept(_trial_job(args))
            except Exception as exc:  # a broken trial never aborts the sweep
                accept(failed(args, exc))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {pool.submit(_trial_job, a): a for a in grid}
            for fut in as_completed(futs):
                try:
                    accept(fut.result())
                except Exception as exc:
                    accept(failed(futs[fut], exc))
    return sorted(records, key=lambda r: r.key)


# ---------------------------------------------------------------- csv io

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(round(v, 6))
    return str(v)


def records_to_csv(records: Iterable[MetricsRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def write_records_csv(records: Iterable[MetricsRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def read_records_csv(path) -> list[MetricsRecord]:
    types = {f.name: f.type for f in fields(MetricsRecord)}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(COLUMNS[:13]) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            kw = {}
            for name, typ in types.items():
                if name not in row:
                    continue
                v = row[name]
                if typ == "bool":
                    kw[name] = v.strip().lower() in ("true", "1", "yes")
                elif typ == "int":
                    kw[name] = int(float(v))
                elif typ == "float":
                    kw[name] = float(v)
                else:
                    kw[name] = v
            out.append(MetricsRecord(**kw))
    return out


# ---------------------------------------------------------------- summary

SUMMARY_COLUMNS = ["environment", "time_without", "time_with", "astar_length", "length_without",
                   "length_with", "resource_reduction", "success_without", "success_with", "trials"]


def _avg_seeds_then_counts(recs: list[MetricsRecord], value: Callable[[MetricsRecord], float]) -> float:
    by_count: dict[int, list[float]] = {}
    for r in recs:
        by_count.setdefault(r.robot_count, []).append(value(r))
    if not by_count:
        return float("nan")
    return statistics.fmean(statistics.fmean(v) for _, v in sorted(by_count.items()))


def summarize(records: Iterable[MetricsRecord]) -> list[dict]:
    """Per-environment averages (over seeds, then over robot counts)."""
    records = list(records)
    names = sorted({r.scenario for r in records},
                   key=lambda n: (BUILTIN_NAMES.index(n) if n in BUILTIN_NAMES else len(BUILTIN_NAMES), n))
    rows = []
    for name in names:
        mine = [r for r in records if r.scenario == name]
        off = [r for r in mine if not r.allocation_enabled]
        on = [r for r in mine if r.allocation_enabled]
        ok_off = [r for r in off if r.success]
        ok_on = [r for r in on if r.success]
        rows.append({
            "environment": name,
            "time_without": _avg_seeds_then_counts(ok_off, lambda r: r.time_ticks),
            "time_with": _avg_seeds_then_counts(ok_on, lambda r: r.time_ticks),
            "astar_length": _avg_seeds_then_counts(mine, lambda r: r.astar_length),
            "length_without": _avg_seeds_then_counts(ok_off, lambda r: r.final_length),
            "length_with": _avg_seeds_then_counts(ok_on, lambda r: r.final_length),
            "resource_reduction": _avg_seeds_then_counts(on, lambda r: r.resource_reduction),
            "success_without": len(ok_off) / len(off) if off else float("nan"),
            "success_with": len(ok_on) / len(on) if on else float("nan"),
            "trials": len(mine),
        })
    return rows


def summary_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([_fmt_summary(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def _fmt_summary(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.2f}"
    return str(v)


def summary_table(rows: list[dict]) -> str:
    """Fixed-width text rendering of :func:`summarize` output."""
    head = ["environment", "time w/o", "time w/", "A*", "len w/o", "len w/", "reduction %", "succ w/o", "succ w/"]
    keys = SUMMARY_COLUMNS[:9]
    lines = ["  ".join(f"{h:>11s}" for h in head)]
    for row in rows:
        lines.append("  ".join(f"{_fmt_summary(row[k]):>11s}" for k in keys))
    return "\n".join(lines)
