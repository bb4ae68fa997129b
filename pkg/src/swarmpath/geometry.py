"""Planar geometry on points, angles and axis-aligned rectangular obstacles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

TWO_PI = 2.0 * math.pi
SQRT_HALF = math.sqrt(0.5)


class DegenerateInputError(ValueError):
    """Raised when an operation is undefined for coincident points."""


class Point2(NamedTuple):
    x: float
    y: float


def normalize_angle(a: float) -> float:
    """Wrap ``a`` into (-pi, pi]."""
    return a - TWO_PI * math.ceil((a - math.pi) / TWO_PI)


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned rectangle; the interior is solid."""

    min_corner: Point2
    max_corner: Point2

    def __post_init__(self) -> None:
        lo, hi = self.min_corner, self.max_corner
        if not all(map(math.isfinite, (*lo, *hi))):
            raise ValueError("obstacle corners must be finite")
        if not (lo[0] < hi[0] and lo[1] < hi[1]):
            raise ValueError(f"obstacle min_corner {tuple(lo)} must be < max_corner {tuple(hi)}")
        object.__setattr__(self, "min_corner", Point2(*map(float, lo)))
        object.__setattr__(self, "max_corner", Point2(*map(float, hi)))

    @property
    def as_tuple(self) -> tuple[float, float, float, float]:
        return (*self.min_corner, *self.max_corner)

    def contains(self, p: Point2, strict: bool = True) -> bool:
        x0, y0, x1, y1 = self.as_tuple
        if strict:
            return x0 < p[0] < x1 and y0 < p[1] < y1
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1

    def grown(self, margin: float) -> "Obstacle":
        x0, y0, x1, y1 = self.as_tuple
        return Obstacle(Point2(x0 - margin, y0 - margin), Point2(x1 + margin, y1 + margin))


def distance(a: Point2, b: Point2) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def homing_angle(start: Point2, current: Point2) -> float:
    """Unsigned elevation of the displacement, ``asin(|dy| / d)`` in [0, pi/2]."""
    d = distance(start, current)
    if d == 0.0:
        raise DegenerateInputError("start and current coincide")
    sy = abs(start[1] - current[1]) / d
    if sy <= SQRT_HALF:
        return math.asin(sy)
    # asin is ill-conditioned near 1; the complementary form keeps full precision
    return math.pi / 2 - math.asin(min(1.0, abs(start[0] - current[0]) / d))


def homing_direction(start: Point2, current: Point2) -> float:
    """World heading from ``current`` towards ``start``.

    The unsigned angle from :func:`homing_angle` is placed in its quadrant using
    the signs of ``start - current``.
    """
    alpha = homing_angle(start, current)
    dx = start[0] - current[0]
    dy = start[1] - current[1]
    if dx >= 0.0:
        return alpha if dy >= 0.0 else -alpha
    return math.pi - alpha if dy >= 0.0 else -(math.pi - alpha)


def signed_angle_diff(a: float, b: float) -> float:
    return normalize_angle(a - b)


def segment_hits_rect(ax: float, ay: float, bx: float, by: float,
                      x0: float, y0: float, x1: float, y1: float) -> bool:
    """True iff the segment a-b passes through the open rectangle interior
    along a sub-segment of positive length. Touching the boundary is not a hit.
    Endpoints are put in lexicographic order first so the test is exactly
    symmetric under swapping them."""
    if (bx, by) < (ax, ay):
        ax, ay, bx, by = bx, by, ax, ay
    dx = bx - ax
    dy = by - ay
    t_lo, t_hi = 0.0, 1.0
    if dx == 0.0:
        if not (x0 < ax < x1):
            return False
    else:
        t1 = (x0 - ax) / dx
        t2 = (x1 - ax) / dx
        if t1 > t2:
            t1, t2 = t2, t1
        t_lo = max(t_lo, t1)
        t_hi = min(t_hi, t2)
    if dy == 0.0:
        if not (y0 < ay < y1):
            return False
    else:
        t1 = (y0 - ay) / dy
        t2 = (y1 - ay) / dy
        if t1 > t2:
            t1, t2 = t2, t1
        t_lo = max(t_lo, t1)
        t_hi = min(t_hi, t2)
    return t_lo < t_hi


def line_of_sight(a: Point2, b: Point2, obstacles: Iterable[Obstacle]) -> bool:
    for ob in obstacles:
        if segment_hits_rect(a[0], a[1], b[0], b[1], *ob.as_tuple):
            return False
    return True


def point_rect_distance(p: Point2, ob: Obstacle) -> float:
    """Euclidean distance from ``p`` to the closed rectangle (0 inside)."""
    x0, y0, x1, y1 = ob.as_tuple
    cx = min(max(p[0], x0), x1)
    cy = min(max(p[1], y0), y1)
    return distance(p, (cx, cy))


def nearest_point_on_segment(p: Point2, a: Point2, b: Point2) -> Point2:
    ax, ay = a
    ex, ey = b[0] - ax, b[1] - ay
    ll = ex * ex + ey * ey
    if ll == 0.0:
        return Point2(ax, ay)
    t = ((p[0] - ax) * ex + (p[1] - ay) * ey) / ll
    t = min(1.0, max(0.0, t))
    return Point2(ax + t * ex, ay + t * ey)


def vertex_angle(a: Point2, p: Point2, b: Point2) -> float:
    """Interior angle a-p-b in [0, pi]."""
    ux, uy = a[0] - p[0], a[1] - p[1]
    vx, vy = b[0] - p[0], b[1] - p[1]
    return abs(math.atan2(ux * vy - uy * vx, ux * vx + uy * vy))
