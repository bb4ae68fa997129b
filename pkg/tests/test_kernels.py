"""The numba and numpy backends must agree bit for bit."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmpath import kernels

needs_numba = pytest.mark.skipif("numba" not in kernels.IMPLEMENTATIONS, reason="numba unavailable")

BOUNDS = np.array([0.0, 0.0, 200.0, 200.0])
NEST = np.array([30.0, 100.0])
GOAL = np.array([170.0, 100.0])


def _world(seed, n, n_obs):
    rng = np.random.default_rng(seed)
    pos = rng.uniform(5, 195, (n, 2))
    heading = rng.uniform(-math.pi, math.pi, n)
    led = rng.integers(0, kernels.N_COLORS, n).astype(np.int64)
    obs = []
    for _ in range(n_obs):
        x, y = rng.uniform(20, 160, 2)
        w, h = rng.uniform(5, 40, 2)
        obs.append([x, y, x + w, y + h])
    obstacles = np.array(obs, dtype=float).reshape(-1, 4)
    return pos, heading, led, obstacles


def _same(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and np.array_equal(a, b, equal_nan=a.dtype.kind == "f")


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 60), st.integers(0, 5))
def test_perceive_backends_identical(seed, n, n_obs):
    pos, heading, led, obstacles = _world(seed, n, n_obs)
    args = (pos, heading, led, obstacles, BOUNDS, NEST, GOAL, 100.0, 10.0, 3.5)
    a = kernels.IMPLEMENTATIONS["numba"][0](*args)
    b = kernels.IMPLEMENTATIONS["numpy"][0](*args)
    assert all(_same(x, y) for x, y in zip(a, b))


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 60), st.integers(0, 5))
def test_move_resolve_backends_identical(seed, n, n_obs):
    pos, heading, _, obstacles = _world(seed, n, n_obs)
    rng = np.random.default_rng(seed + 1)
    lin = np.where(rng.random(n) < 0.2, 0.0, rng.uniform(0, 1, n))
    ang = rng.uniform(-math.pi, math.pi, n)
    a = kernels.IMPLEMENTATIONS["numba"][1](pos, heading, lin, ang, obstacles, BOUNDS, 3.5)
    b = kernels.IMPLEMENTATIONS["numpy"][1](pos, heading, lin, ang, obstacles, BOUNDS, 3.5)
    assert all(_same(x, y) for x, y in zip(a, b))


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 6))
def test_los_backends_identical(seed, n_obs):
    pos, _, _, obstacles = _world(seed, 30, n_obs)
    a = kernels.IMPLEMENTATIONS["numba"][2](17.0, 33.0, pos, obstacles)
    b = kernels.IMPLEMENTATIONS["numpy"][2](17.0, 33.0, pos, obstacles)
    assert _same(a, b)


def test_move_resolve_never_overlaps():
    pos, heading, _, obstacles = _world(3, 1, 0)
    pos = np.array([[50.0, 50.0], [57.5, 50.0], [65.0, 50.0]])
    lin = np.ones(3)
    ang = np.array([0.0, math.pi, math.pi])
    out, _, moved = kernels.move_resolve(pos, np.zeros(3), lin, ang, np.zeros((0, 4)), BOUNDS, 3.5)
    d = np.linalg.norm(out[:, None] - out[None], axis=-1) + np.eye(3) * 1e9
    assert d.min() >= 7.0 - 1e-9


def test_env_flag_selects_numpy_backend():
    code = "from swarmpath import _jit; print(_jit.BACKEND)"
    env = dict(os.environ, SWARMPATH_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@pytest.mark.slow
@needs_numba
def test_full_trial_identical_across_backends(tmp_path):
    """A whole allocation trial produces the same trace bytes under either backend."""
    outs = []
    for flag in ("0", "1"):
        path = tmp_path / f"trace_{flag}.jsonl"
        env = dict(os.environ, SWARMPATH_NO_NUMBA=flag)
        subprocess.run([sys.executable, "-m", "swarmpath.cli", "run", "--scenario", "open_1", "--seed", "4",
                        "--robots", "60", "--allocation", "on", "--trace-out", str(path)],
                       env=env, capture_output=True, check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
