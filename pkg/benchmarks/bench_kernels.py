"""Compare the numba and numpy kernel backends on a 100-robot obstacle arena,
then time a short full simulation under each backend.

    python3 benchmarks/bench_kernels.py [--robots 100] [--repeat 50]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from swarmpath import kernels
from swarmpath.arena import load_scenario_file, resolve_scenario


def _setup(n: int, seed: int = 0):
    sc = load_scenario_file(resolve_scenario("obstacle_2"))
    a = sc.arena
    rng = np.random.default_rng(seed)
    pts = np.array(a.deployment_points[:n], dtype=float)
    heading = rng.uniform(-np.pi, np.pi, n)
    led = rng.integers(0, kernels.N_COLORS, n).astype(np.int64)
    obstacles = np.ascontiguousarray(a.obstacle_array(), dtype=float)
    bounds = a.bounds.as_array()
    nest = np.array(a.nest, dtype=float)
    goal = np.array(a.goal, dtype=float)
    lin = rng.uniform(0, 1, n)
    ang = rng.uniform(-0.5, 0.5, n)
    p = sc.params
    perceive_args = (pts, heading, led, obstacles, bounds, nest, goal,
                     p.max_visible_range, p.proximity_range, p.robot_radius)
    move_args = (pts, heading, lin, ang, obstacles, bounds, p.robot_radius)
    return perceive_args, move_args


def _time(fn, args, repeat: int) -> float:
    fn(*args)  # warm-up (and JIT compile)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def _sim_seconds(no_numba: bool, ticks: int) -> float:
    code = ("import time;from swarmpath.arena import *;from swarmpath.engine import *;"
            "sc=load_scenario_file(resolve_scenario('open_1'));w=make_world(sc,1,100,False);step(w);"
            f"t=time.perf_counter();[step(w) for _ in range({ticks})];print(time.perf_counter()-t)")
    env = dict(os.environ, SWARMPATH_NO_NUMBA="1" if no_numba else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--robots", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--ticks", type=int, default=300)
    args = ap.parse_args()

    perceive_args, move_args = _setup(args.robots)
    print(f"robots={args.robots} repeat={args.repeat}")
    print(f"{'kernel':<14s}{'backend':<8s}{'ms/call':>10s}")
    for name, (perc, move, _) in sorted(kernels.IMPLEMENTATIONS.items()):
        print(f"{'perceive_all':<14s}{name:<8s}{1e3 * _time(perc, perceive_args, args.repeat):>10.3f}")
        print(f"{'move_resolve':<14s}{name:<8s}{1e3 * _time(move, move_args, args.repeat):>10.3f}")
    if "numba" not in kernels.IMPLEMENTATIONS:
        print("numba unavailable; numpy backend only")
        return
    outs = {k: v[0](*perceive_args) for k, v in kernels.IMPLEMENTATIONS.items()}
    same = all(np.array_equal(a, b, equal_nan=a.dtype.kind == "f") for a, b in zip(outs["numba"], outs["numpy"]))
    print(f"perceive outputs identical across backends: {same}")
    for flag in (False, True):
        s = _sim_seconds(flag, args.ticks)
        print(f"engine {'numpy' if flag else 'numba':<6s} {1e3 * s / args.ticks:8.3f} ms/tick ({args.ticks} ticks)")


if __name__ == "__main__":
    main()
