"""SVG snapshots of a recorded trial: arena, robots by LED colour, chain
overlays per stage and the A* reference path."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from .arena import ScenarioError, scenario_from_dict
from .astar import NoPathError, astar_world_path
from .engine import Trace, read_trace
from .robot import LedColor

LAYERS = ("arena", "robots", "chains", "astar")
STAGE_COLORS = {"subgoal": "#1f4fff", "opt1": "#8000c0", "opt2": "#00a040"}
ASTAR_COLOR = "#d62728"
LED_FILL = {
    LedColor.OFF: "#505050", LedColor.GREEN: "#2ca02c", LedColor.YELLOW: "#e6c800",
    LedColor.RED: "#d62728", LedColor.WHITE: "#ffffff", LedColor.PURPLE: "#8000c0",
    LedColor.BLUE: "#1f4fff", LedColor.CYAN: "#00c8c8", LedColor.MAGENTA: "#e600e6",
    LedColor.ORANGE: "#ff8c00",
}


class RenderError(Exception):
    pass


@dataclass
class RenderSpec:
    trace: Trace | str | Path
    tick: int | None = None     # single tick; None with stride None means the final tick
    stride: int | None = None
    layers: tuple[str, ...] = LAYERS
    out_dir: str | Path = "."
    size: int = 800
    _loaded: Trace | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.stride is not None and self.stride < 1:
            raise RenderError("stride must be >= 1")
        if not self.layers or any(layer not in LAYERS for layer in self.layers):
            raise RenderError(f"layers must be a non-empty subset of {LAYERS}")
        if self.size < 16:
            raise RenderError("size must be at least 16 pixels")

    def load(self) -> Trace:
        if self._loaded is None:
            if isinstance(self.trace, Trace):
                self._loaded = self.trace
            else:
                try:
                    self._loaded = read_trace(self.trace)
                except (OSError, ValueError) as exc:
                    raise RenderError(f"unreadable trace: {exc}") from None
        return self._loaded


class _View:
    """World to image transform: uniform scale, y up, 5% margin."""

    def __init__(self, bounds: dict, size: int):
        x0, y0 = bounds["min"]
        x1, y1 = bounds["max"]
        self.x0, self.y0 = x0, y0
        m = 0.05 * size
        self.s = min((size - 2 * m) / (x1 - x0), (size - 2 * m) / (y1 - y0))
        self.w = self.s * (x1 - x0) + 2 * m
        self.h = self.s * (y1 - y0) + 2 * m
        self.m = m

    def x(self, v: float) -> str:
        return f"{self.m + (v - self.x0) * self.s:.2f}"

    def y(self, v: float) -> str:
        return f"{self.h - self.m - (v - self.y0) * self.s:.2f}"

    def r(self, v: float) -> str:
        return f"{v * self.s:.2f}"


def _frames(trace: Trace) -> list[dict]:
    frames = trace.of_kind("frame")
    if not frames:
        raise RenderError("trace contains no pose samples")
    return frames


def _frame_at(frames: list[dict], tick: int) -> dict:
    best = frames[0]
    for f in frames:
        if f["tick"] <= tick:
            best = f
        else:
            break
    return best


def _astar_points(doc: dict | None, params: dict) -> list[tuple[float, float]]:
    if not doc:
        return []
    try:
        sc = scenario_from_dict(doc)
        grid, path = astar_world_path(sc.arena, sc.params)
    except (ScenarioError, NoPathError):
        return []
    return [grid.center_of(c) for c in path.cells]


def render_frame(trace: Trace, tick: int, layers=LAYERS, size: int = 800,
                 astar_pts: list | None = None) -> str:
    doc = trace.header.get("document")
    if doc is None:
        raise RenderError("trace header lacks the scenario document")
    arena = doc["arena"]
    view = _View(arena["bounds"], size)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{view.w:.2f}" '
           f'height="{view.h:.2f}" viewBox="0 0 {view.w:.2f} {view.h:.2f}">',
           f'<title>{escape(str(trace.header.get("scenario", "")))} tick {tick}</title>']
    if "arena" in layers:
        b = arena["bounds"]
        out.append(f'<rect x="{view.x(b["min"][0])}" y="{view.y(b["max"][1])}" '
                   f'width="{view.r(b["max"][0] - b["min"][0])}" height="{view.r(b["max"][1] - b["min"][1])}" '
                   f'fill="none" stroke="#000000" stroke-width="1"/>')
        for ob in arena.get("obstacles", []):
            out.append(f'<rect x="{view.x(ob["min"][0])}" y="{view.y(ob["max"][1])}" '
                       f'width="{view.r(ob["max"][0] - ob["min"][0])}" '
                       f'height="{view.r(ob["max"][1] - ob["min"][1])}" fill="#9a9a9a" stroke="none"/>')
        for key, fill in (("nest", "#7fa7ff"), ("goal", "#ffd27f")):
            p = arena[key]["pos"]
            out.append(f'<circle cx="{view.x(p[0])}" cy="{view.y(p[1])}" r="{view.r(arena["goal"]["radius"])}" '
                       f'fill="{fill}" stroke="#000000" stroke-width="0.5"/>')
    if "astar" in layers:
        pts = astar_pts if astar_pts is not None else _astar_points(doc, trace.header.get("params", {}))
        if len(pts) >= 2:
            out.append(_polyline(view, pts, ASTAR_COLOR, "astar"))
    if "chains" in layers:
        for ev in trace.of_kind("stage"):
            if ev["tick"] <= tick:
                out.append(_polyline(view, ev["waypoints"], STAGE_COLORS[ev["stage"]], ev["stage"]))
    if "robots" in layers:
        frame = _frame_at(_frames(trace), tick)
        radius = trace.header.get("params", {}).get("robot_radius", 3.5)
        for x, y, led in zip(frame["x"], frame["y"], frame["led"]):
            out.append(f'<circle cx="{view.x(x)}" cy="{view.y(y)}" r="{view.r(radius)}" '
                       f'fill="{LED_FILL[LedColor(led)]}" stroke="#000000" stroke-width="0.3"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _polyline(view: _View, pts, color: str, cls: str) -> str:
    coords = " ".join(f"{view.x(p[0])},{view.y(p[1])}" for p in pts)
    return f'<polyline class="{cls}" points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'


def selected_ticks(trace: Trace, spec: RenderSpec) -> list[int]:
    final = _frames(trace)[-1]["tick"]
    if spec.stride is not None:
        return list(range(0, final, spec.stride))
    if spec.tick is None:
        return [final]
    if not 0 <= spec.tick <= final:
        raise RenderError(f"tick {spec.tick} outside 0..{final}")
    return [spec.tick]


def render(spec: RenderSpec) -> list[Path]:
    """Write ``frame_<tick:08d>.svg`` files for the selected ticks."""
    trace = spec.load()
    ticks = selected_ticks(trace, spec)
    pts = _astar_points(trace.header.get("document"), {}) if "astar" in spec.layers else []
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in ticks:
        p = out_dir / f"frame_{t:08d}.svg"
        p.write_text(render_frame(trace, t, spec.layers, spec.size, pts))
        paths.append(p)
    return paths
