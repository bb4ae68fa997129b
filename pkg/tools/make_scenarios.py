"""Author the bundled scenario files.

Run from the repository root:  python3 tools/make_scenarios.py
Arena layouts are hand-placed; deployment homes come from ``deployment_grid``.
"""

from pathlib import Path

from swarmpath.arena import (ArenaConfig, Bounds, Scenario, SimParams, deployment_grid,
                             emit_scenario, load_scenario)
from swarmpath.astar import astar_world_length
from swarmpath.geometry import Obstacle, Point2

OUT = Path(__file__).resolve().parents[1] / "src" / "swarmpath" / "scenarios"
SPACING = 2.5 * SimParams().robot_radius

LAYOUTS = {
    "open_1": ("open", (300, 300), (70, 150), (220, 150), []),
    "open_2": ("open", (300, 300), (70, 80), (190, 200), []),
    "open_3": ("open", (300, 300), (60, 220), (220, 110), []),
    "obstacle_1": ("obstacle", (300, 300), (60, 150), (240, 150), [((140, 95), (160, 205))]),
    "obstacle_2": ("obstacle", (360, 300), (60, 80), (280, 210),
                   [((130, 110), (200, 140)), ((220, 150), (240, 260))]),
    "obstacle_3": ("obstacle", (320, 320), (60, 60), (250, 250),
                   [((110, 140), (160, 165)), ((175, 80), (200, 140)), ((150, 205), (175, 280))]),
    "complex_1": ("complex", (400, 400), (60, 200), (330, 200),
                  [((150, 0), (162, 270)), ((240, 130), (252, 400)), ((190, 300), (240, 312))]),
    "complex_2": ("complex", (500, 500), (70, 70), (420, 420),
                  [((0, 170), (330, 182)), ((180, 310), (500, 322)), ((380, 195), (392, 290)),
                   ((100, 400), (112, 500))]),
}


def build(name, cls, size, nest, goal, obstacles, count=100):
    bounds = Bounds(0.0, 0.0, float(size[0]), float(size[1]))
    obs = tuple(Obstacle(Point2(*lo), Point2(*hi)) for lo, hi in obstacles)
    r = SimParams().robot_radius
    pts = deployment_grid(Point2(*nest), count, SPACING, bounds, obs, clearance=r)
    arena = ArenaConfig(bounds, obs, Point2(*map(float, nest)), 55.0, Point2(*map(float, goal)), 10.0,
                        tuple(pts), cls)
    return Scenario(name, arena, SimParams(), count)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (cls, size, nest, goal, obs) in LAYOUTS.items():
        sc = build(name, cls, size, nest, goal, obs)
        text = emit_scenario(sc)
        back = load_scenario(text)
        assert back == sc, name
        print(f"{name:11s} astar={astar_world_length(sc.arena, sc.params):7.2f}")
        (OUT / f"{name}.json").write_text(text)
    # goal buried in an obstacle: fails validation on purpose
    doc = emit_scenario(build("broken", "obstacle", (300, 300), (60, 150), (240, 150), []))
    doc = doc.replace('"obstacles": []', '"obstacles": [{"min": [220.0, 130.0], "max": [260.0, 170.0]}]')
    (OUT / "broken.json").write_text(doc)


if __name__ == "__main__":
    main()
