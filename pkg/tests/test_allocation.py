import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmpath.allocation import (TA_EDGES, AllocationEstimate, RecruitLedger, TaMemory, TaState,
                                  allocated_robots, estimate_path_length, homing_field, recruit_founder,
                                  recruit_worker, required_robots, ta_edge_ok, ta_step)
from swarmpath.arena import Scenario, SimParams
from swarmpath.engine import make_world, step
from swarmpath.geometry import Point2
from swarmpath.messages import Ack, GoalFoundInfo, RecruitRequest, RestOrder, Volunteer, broadcast, unicast
from swarmpath.robot import STOP, LedColor, Pose

from .conftest import FixedRng, make_arena, percept_of


def test_estimate_path_length_examples():
    assert estimate_path_length(200, 0.5) == 100.0
    assert estimate_path_length(0, 1.0) == 0.0
    assert estimate_path_length(347, 1.0) == 347.0


def test_required_robots_examples():
    assert required_robots(100, 100) == 1.0
    assert required_robots(700, 100) == 7.0
    assert required_robots(300, 300) == required_robots(100, 100)


def test_allocated_robots_examples():
    assert allocated_robots(700, 100, 2) == 9
    assert allocated_robots(700, 100, 0) == math.ceil(required_robots(700, 100))
    assert allocated_robots(250, 100, 4) == 7


def test_estimate_bad_inputs():
    with pytest.raises(ValueError):
        estimate_path_length(-1, 1.0)
    with pytest.raises(ValueError):
        required_robots(10, 0)
    with pytest.raises(ValueError):
        allocated_robots(10, 5, -1)


@settings(max_examples=1000)
@given(st.floats(0, 1e4), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_required_robots_scale_invariant(l, v, c):
    assert required_robots(c * l, c * v) == pytest.approx(required_robots(l, v), rel=1e-9, abs=1e-9)


def test_allocation_estimate_record():
    e = AllocationEstimate.compute(347, 1.0, 30.0, 2)
    assert e.path_length == 347.0
    assert e.n0 == pytest.approx(347 / 30)
    assert e.n == 12 + 2


def test_edge_table():
    assert sorted(TA_EDGES) == list("abcdef")
    assert ta_edge_ok(TaState.DECISION_MAKING, TaState.INITIATE_TASK, "e")
    assert not ta_edge_ok(TaState.EXPLORING, TaState.RESTING, "d")


def _vols(*ids, to=0):
    return [unicast(i, to, Volunteer(i)) for i in ids]


def test_founder_acks_ascending_then_rest_order():
    ledger = RecruitLedger(needed=2)
    out, ledger = recruit_founder(ledger, _vols(5, 9, 3))
    acks = [m.payload.id for m in out if isinstance(m.payload, Ack)]
    assert acks == [3, 5]
    assert any(isinstance(m.payload, RestOrder) and m.kind == "broadcast" for m in out)
    assert ledger.closed and ledger.acked_ids == [3, 5] and ledger.declined_ids == [9]


def test_founder_needed_zero_closes_immediately():
    out, ledger = recruit_founder(RecruitLedger(needed=0), [])
    assert ledger.closed
    assert [type(m.payload) for m in out] == [RestOrder]


def test_founder_first_tick_broadcasts_request():
    out, ledger = recruit_founder(RecruitLedger(needed=3), [], explore_time=120)
    kinds = {type(m.payload): m for m in out}
    assert kinds[RecruitRequest].payload.needed == 3
    assert kinds[GoalFoundInfo].payload.explore_time == 120
    assert not ledger.closed


def test_founder_volunteers_over_three_ticks():
    ledger = RecruitLedger(needed=3)
    ticks = []
    for vid in (4, 8, 2):
        out, ledger = recruit_founder(ledger, _vols(vid))
        ticks.append([m.payload.id for m in out if isinstance(m.payload, Ack)])
    assert ticks == [[4], [8], [2]]
    assert ledger.closed


def test_founder_patience_closes_short():
    ledger = RecruitLedger(needed=5)
    recruit_founder(ledger, _vols(1))
    for _ in range(3):
        recruit_founder(ledger, [], patience=2)
    assert ledger.closed and ledger.acked_ids == [1]


@settings(max_examples=300)
@given(st.integers(0, 8), st.lists(st.lists(st.integers(1, 40), max_size=6), max_size=8))
def test_ledger_conservation(needed, arrivals):
    ledger = RecruitLedger(needed=needed)
    seen = set()
    for batch in arrivals:
        recruit_founder(ledger, _vols(*batch))
        seen |= set(batch)
    assert len(ledger.acked_ids) <= needed
    assert len(set(ledger.acked_ids)) == len(ledger.acked_ids)
    assert set(ledger.acked_ids).isdisjoint(ledger.declined_ids)
    if ledger.closed:
        # after closing no more volunteers are examined
        assert len(ledger.acked_ids) + len(ledger.declined_ids) <= len(seen)
    else:
        assert set(ledger.acked_ids) | set(ledger.declined_ids) == seen


def test_worker_volunteers_once():
    mem = TaMemory(state=TaState.DECISION_MAKING)
    req = [broadcast(0, RecruitRequest(3))]
    msgs, label = recruit_worker(mem, req, me=7)
    assert [m.payload for m in msgs] == [Volunteer(7)] and msgs[0].receiver == 0 and label is None
    msgs, label = recruit_worker(mem, req, me=7)
    assert msgs == [] and label is None


def test_worker_reacts_to_ack_and_rest():
    mem = TaMemory(state=TaState.DECISION_MAKING, volunteered=True)
    assert recruit_worker(mem, [unicast(0, 7, Ack(7))], me=7)[1] == "e"
    assert recruit_worker(mem, [broadcast(0, RestOrder())], me=7)[1] == "d"


def test_ta_rest_order_engages_resting(params):
    p = percept_of(make_arena(), [(55.0, 150.0)])
    mem = TaMemory(state=TaState.DECISION_MAKING, volunteered=True, deployment_point=Point2(50.0, 150.0))
    out = ta_step(mem, p, [broadcast(0, RestOrder())], params, FixedRng(), me=3)
    assert mem.state == TaState.RESTING and mem.label == "d" and out.led == LedColor.OFF


def test_ta_ack_initiates_task(params):
    p = percept_of(make_arena(), [(55.0, 150.0)])
    mem = TaMemory(state=TaState.DECISION_MAKING, volunteered=True)
    ta_step(mem, p, [unicast(0, 3, Ack(3))], params, FixedRng(), me=3)
    assert mem.state == TaState.INITIATE_TASK and mem.label == "e"


def test_ta_goal_found_makes_founder(params):
    p = percept_of(make_arena(), [(225.0, 150.0)])
    mem = TaMemory(explore_ticks=180)
    out = ta_step(mem, p, [], params, FixedRng(), me=0)
    assert mem.state == TaState.RETURN_TO_NEST and mem.label == "c"
    assert mem.founder and mem.explore_time == 180 and out.led == LedColor.WHITE


def test_ta_timeout_bumps_schedule(params):
    p = percept_of(make_arena(), [(120.0, 150.0)])
    mem = TaMemory(explore_ticks=500, min_explore_time=500.0)
    ta_step(mem, p, [], params, FixedRng(), me=0)
    assert mem.state == TaState.RETURN_TO_NEST and mem.label == "b"
    assert mem.min_explore_time == 750.0


def test_ta_goal_info_moves_explorer_to_decision(params):
    p = percept_of(make_arena(), [(90.0, 150.0)])
    mem = TaMemory()
    ta_step(mem, p, [broadcast(4, GoalFoundInfo(200))], params, FixedRng(), me=1)
    assert mem.state == TaState.DECISION_MAKING and mem.label == "f"


def test_founder_at_nest_computes_n(params):
    p = percept_of(make_arena(), [(55.0, 150.0)])
    mem = TaMemory(state=TaState.RETURN_TO_NEST, founder=True, explore_time=200, goal_pos=Point2(250, 150))
    ta_step(mem, p, [], params, FixedRng(), me=0, delta=2)
    assert mem.state == TaState.DECISION_MAKING and mem.label == "c"
    assert mem.required == math.ceil(200 / params.visual_range) + 2
    assert mem.ledger.needed == mem.required - 1  # the founder fills one slot itself


def test_homing_examples(params):
    home = Point2(10.0, 10.0)
    assert homing_field(Pose(home, 0.3), home, params) == STOP
    cmd = homing_field(Pose(Point2(0.0, 0.0), math.atan2(4, 3)), Point2(3.0, 4.0), params)
    assert cmd.linear == min(params.robot_speed, 5.0)
    assert cmd.angular == pytest.approx(0.0, abs=1e-12)
    near = homing_field(Pose(Point2(0.0, 0.0), 0.0), Point2(0.5, 0.0), params)
    assert near == STOP  # within half a body radius


@pytest.mark.parametrize("start,heading", [((150.0, 60.0), 0.0), ((230.0, 250.0), 2.0), ((20.0, 280.0), -1.0)])
def test_homing_arrives_in_bounded_time(start, heading):
    home = (150.0, 150.0)
    arena = make_arena(nest=home, goal=(290.0, 10.0), deployment=[home])
    sc = Scenario("home", arena, SimParams(), 1)
    w = make_world(sc, 0, 1, allocation=True)
    w.pos[0] = start
    w.heading[0] = heading
    w.memories[0].state = TaState.RESTING
    w.memories[0].known_explore_time = None
    d = math.dist(start, home)
    bound = d / sc.params.robot_speed + math.pi / sc.params.max_turn + 1
    for _ in range(int(bound) + 1):
        step(w)
    assert math.dist(w.pos[0], home) <= sc.params.robot_radius / 2
