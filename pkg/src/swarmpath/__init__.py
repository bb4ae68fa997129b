"""Swarm robotics path formation with optional task allocation, a grid A*
baseline, an experiment harness and an SVG renderer."""

from .arena import ArenaConfig, Scenario, SimParams, load_scenario, load_scenario_file, resolve_scenario
from .astar import astar, astar_world_length
from .engine import Trace, World, make_world, read_trace, run, step
from .metrics import MetricsRecord, run_experiment, run_trial, summarize
from .render import RenderSpec, render

__version__ = "0.1.0"

__all__ = [
    "ArenaConfig", "Scenario", "SimParams", "load_scenario", "load_scenario_file", "resolve_scenario",
    "astar", "astar_world_length", "Trace", "World", "make_world", "read_trace", "run", "step",
    "MetricsRecord", "run_experiment", "run_trial", "summarize", "RenderSpec", "render",
]
