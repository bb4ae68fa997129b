import json
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmpath.arena import (BUILTIN_NAMES, ScenarioParseError, ScenarioValidationError, SimParams,
                             builtin_environments, emit_scenario, load_scenario, load_scenario_file, rasterize,
                             resolve_scenario, scenario_dir, validate_arena)
from swarmpath.astar import astar_world_length

from .conftest import make_arena


def _doc(**over):
    doc = {
        "arena": {
            "bounds": {"min": [0, 0], "max": [300, 300]},
            "obstacles": [],
            "nest": {"pos": [50, 150], "radius": 20},
            "goal": {"pos": [250, 150], "radius": 10},
            "deployment_points": [[50, 150], [60, 150]],
            "class": "open",
        },
        "robots": {"count": 2},
    }
    doc["arena"].update(over)
    return doc


def test_minimal_open_document():
    sc = load_scenario(json.dumps(_doc()))
    assert sc.arena.obstacles == ()
    assert sc.arena.environment_class == "open"
    assert sc.robot_count == 2
    assert sc.params == SimParams()


def test_goal_inside_obstacle_names_goal():
    doc = _doc(obstacles=[{"min": [230, 130], "max": [270, 170]}])
    with pytest.raises(ScenarioValidationError) as ei:
        load_scenario(json.dumps(doc))
    assert "goal" in str(ei.value)
    assert ei.value.field_path.startswith("arena.goal")


def test_malformed_document_is_parse_error():
    with pytest.raises(ScenarioParseError):
        load_scenario("{not json")


def test_unknown_param_rejected():
    doc = _doc()
    doc["params"] = {"warp_speed": 9}
    with pytest.raises(ScenarioValidationError):
        load_scenario(json.dumps(doc))


def test_params_invariants():
    with pytest.raises(ValueError):
        SimParams(detect_range=80.0)  # must stay below subgoal_spacing
    with pytest.raises(ValueError):
        SimParams(robot_speed=0.0)
    with pytest.raises(ValueError):
        SimParams(delta=-1)


def test_delta_defaults_by_class():
    p = SimParams()
    assert (p.delta_for("open"), p.delta_for("obstacle"), p.delta_for("complex")) == (2, 4, 6)
    assert SimParams(delta=5).delta_for("open") == 5


def test_bundled_open_1():
    sc = load_scenario_file(resolve_scenario("open_1"))
    assert sc.arena.environment_class == "open"
    assert len(sc.arena.deployment_points) == 100


def test_builtin_environments():
    envs = builtin_environments()
    assert len(envs) == 8
    assert Counter(e.arena.environment_class for e in envs) == {"open": 3, "obstacle": 3, "complex": 2}
    for e in envs:
        validate_arena(e.arena)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_round_trip_and_reachable(name):
    sc = load_scenario_file(resolve_scenario(name))
    again = load_scenario(emit_scenario(sc), name=name)
    assert again == sc
    assert astar_world_length(sc.arena, sc.params) > 0


def test_builtin_deployment_points_inside_nest(name="open_1"):
    sc = load_scenario_file(resolve_scenario(name))
    a = sc.arena
    far = max(math.dist(p, a.nest) for p in a.deployment_points)
    assert far <= a.nest_radius


def test_scenario_dir_override(tmp_path, monkeypatch):
    (tmp_path / "tiny.json").write_text(json.dumps(_doc()))
    monkeypatch.setenv("SWARMPATH_SCENARIO_DIR", str(tmp_path))
    assert scenario_dir() == tmp_path
    assert resolve_scenario("tiny") == tmp_path / "tiny.json"


def test_rasterize_empty_arena():
    g = rasterize(make_arena(size=(100, 60), nest=(10, 30), goal=(90, 30)), 5.0, 0.0)
    assert (g.width, g.height) == (20, 12)
    assert not g.blocked.any()


def test_rasterize_single_aligned_cell():
    arena = make_arena(size=(100, 100), nest=(12, 12), goal=(88, 88), obstacles=[((40, 50), (50, 60))])
    g = rasterize(arena, 10.0, 0.0)
    assert g.blocked.sum() == 1
    assert g.blocked[5, 4]


def test_rasterize_blocked_goal_cell_is_validation_error():
    arena = make_arena(size=(100, 100), nest=(12, 12), goal=(75, 75), obstacles=[((60, 60), (70, 70))])
    with pytest.raises(ScenarioValidationError):
        rasterize(arena, 10.0, 4.0)


def _sampling_oracle(arena, cell, inflation):
    """A cell is blocked iff one of 16 interior sample points hits an inflated obstacle,
    or the cell pokes out of the bounds."""
    b = arena.bounds
    w = int(math.ceil(b.width / cell - 1e-9))
    h = int(math.ceil(b.height / cell - 1e-9))
    offs = (np.arange(4) + 0.5) / 4.0
    out = np.zeros((h, w), dtype=bool)
    for r in range(h):
        for c in range(w):
            x0, y0 = b.xmin + c * cell, b.ymin + r * cell
            if x0 + cell > b.xmax + 1e-9 or y0 + cell > b.ymax + 1e-9:
                out[r, c] = True
                continue
            xs = x0 + offs * cell
            ys = y0 + offs * cell
            for ob in arena.obstacles:
                g = ob.grown(inflation)
                if ((xs[:, None] > g.min_corner.x) & (xs[:, None] < g.max_corner.x)
                        & (ys[None, :] > g.min_corner.y) & (ys[None, :] < g.max_corner.y)).any():
                    out[r, c] = True
    return out


@st.composite
def quarter_arena(draw):
    # obstacle edges on multiples of cell/4 so a 4x4 sampling grid sees every overlap
    cell = 4.0
    rects = []
    for _ in range(draw(st.integers(0, 4))):
        x0 = draw(st.integers(12, 60))
        y0 = draw(st.integers(12, 60))
        w = draw(st.integers(1, 24))
        h = draw(st.integers(1, 24))
        rects.append(((x0, y0), (x0 + w, y0 + h)))
    infl = draw(st.sampled_from([0.0, 1.0, 2.0, 3.0]))
    return make_arena(size=(100, 100), nest=(1.5, 1.5), goal=(98.5, 98.5), obstacles=rects), cell, infl


@settings(max_examples=60, deadline=None)
@given(quarter_arena())
def test_rasterize_matches_sampling_oracle(case):
    arena, cell, infl = case
    g = rasterize(arena, cell, infl)
    assert np.array_equal(g.blocked, _sampling_oracle(arena, cell, infl))


@settings(max_examples=60, deadline=None)
@given(quarter_arena(), st.floats(0, 3), st.floats(0, 3))
def test_rasterize_monotone_in_inflation(case, r1, r2):
    arena, cell, _ = case
    lo, hi = sorted((r1, r2))
    a = rasterize(arena, cell, lo).blocked
    b = rasterize(arena, cell, hi).blocked
    assert not (a & ~b).any()
