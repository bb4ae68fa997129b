"""Per-tick numeric kernels: batched perception and sequential motion resolution.

Every kernel exists twice: a loop version compiled with numba and a vectorised
numpy version. ``perceive_all`` / ``move_resolve`` / ``los_from_point`` are bound
to the numba versions unless numba is missing or ``SWARMPATH_NO_NUMBA`` is set.
"""

from __future__ import annotations

import math

import numpy as np

from ._jit import HAVE_NUMBA, njit

PI = math.pi
TWO_PI = 2.0 * math.pi
N_COLORS = 10


# ---------------------------------------------------------------- numba path

@njit
def _wrap(a):
    return a - TWO_PI * math.ceil((a - PI) / TWO_PI)


@njit
def _seg_hits_rect(ax, ay, bx, by, x0, y0, x1, y1):
    if bx < ax or (bx == ax and by < ay):
        ax, ay, bx, by = bx, by, ax, ay
    dx = bx - ax
    dy = by - ay
    t_lo = 0.0
    t_hi = 1.0
    if dx == 0.0:
        if not (x0 < ax and ax < x1):
            return False
    else:
        t1 = (x0 - ax) / dx
        t2 = (x1 - ax) / dx
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > t_lo:
            t_lo = t1
        if t2 < t_hi:
            t_hi = t2
    if dy == 0.0:
        if not (y0 < ay and ay < y1):
            return False
    else:
        t1 = (y0 - ay) / dy
        t2 = (y1 - ay) / dy
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > t_lo:
            t_lo = t1
        if t2 < t_hi:
            t_hi = t2
    return t_lo < t_hi


@njit
def _los(ax, ay, bx, by, obstacles):
    for k in range(obstacles.shape[0]):
        if _seg_hits_rect(ax, ay, bx, by, obstacles[k, 0], obstacles[k, 1],
                          obstacles[k, 2], obstacles[k, 3]):
            return False
    return True


@njit
def _perceive_nb(pos, heading, led, obstacles, bounds, nest, goal,
                 max_vis, prox_range, radius):
    n = pos.shape[0]
    rng = np.empty((n, n))
    brg = np.full((n, n), np.nan)
    vis = np.zeros((n, n), dtype=np.bool_)
    near_idx = np.full((n, N_COLORS), -1, dtype=np.int64)
    near_rng = np.full((n, N_COLORS), np.inf)
    nest_info = np.empty((n, 3))
    goal_info = np.empty((n, 3))
    prox = np.empty((n, 2))
    for i in range(n):
        px = pos[i, 0]
        py = pos[i, 1]
        h = heading[i]
        for j in range(n):
            dx = pos[j, 0] - px
            dy = pos[j, 1] - py
            d = math.sqrt(dx * dx + dy * dy)
            rng[i, j] = d
            if j == i or d > max_vis:
                continue
            if not _los(px, py, pos[j, 0], pos[j, 1], obstacles):
                continue
            vis[i, j] = True
            brg[i, j] = _wrap(math.atan2(dy, dx) - h)
            c = led[j]
            if d < near_rng[i, c]:
                near_rng[i, c] = d
                near_idx[i, c] = j
        for which in range(2):
            tx = nest[0] if which == 0 else goal[0]
            ty = nest[1] if which == 0 else goal[1]
            dx = tx - px
            dy = ty - py
            d = math.sqrt(dx * dx + dy * dy)
            seen = d <= max_vis and _los(px, py, tx, ty, obstacles)
            out = nest_info if which == 0 else goal_info
            out[i, 0] = d
            out[i, 1] = _wrap(math.atan2(dy, dx) - h)
            out[i, 2] = 1.0 if seen else 0.0
        # proximity: walls, obstacles, then robot bodies, nearest wins
        best = np.inf
        bx = 0.0
        by = 0.0
        cand = px - bounds[0]
        if cand < best:
            best = cand
            bx = -cand
            by = 0.0
        cand = bounds[2] - px
        if cand < best:
            best = cand
            bx = cand
            by = 0.0
        cand = py - bounds[1]
        if cand < best:
            best = cand
            bx = 0.0
            by = -cand
        cand = bounds[3] - py
        if cand < best:
            best = cand
            bx = 0.0
            by = cand
        for k in range(obstacles.shape[0]):
            cx = min(max(px, obstacles[k, 0]), obstacles[k, 2])
            cy = min(max(py, obstacles[k, 1]), obstacles[k, 3])
            dx = cx - px
            dy = cy - py
            cand = math.sqrt(dx * dx + dy * dy)
            if cand < best:
                best = cand
                bx = dx
                by = dy
        for j in range(n):
            if j == i:
                continue
            cand = rng[i, j] - radius
            if cand < best:
                best = cand
                bx = pos[j, 0] - px
                by = pos[j, 1] - py
        if best <= prox_range:
            prox[i, 0] = best
            prox[i, 1] = _wrap(math.atan2(by, bx) - h)
        else:
            prox[i, 0] = np.inf
            prox[i, 1] = 0.0
    return rng, brg, vis, near_idx, near_rng, nest_info, goal_info, prox


@njit
def _los_from_point_nb(px, py, targets, obstacles):
    out = np.empty(targets.shape[0], dtype=np.bool_)
    for k in range(targets.shape[0]):
        out[k] = _los(px, py, targets[k, 0], targets[k, 1], obstacles)
    return out


@njit
def _disc_free(x, y, i, pos, obstacles, bounds, radius):
    if x - radius < bounds[0] or x + radius > bounds[2]:
        return False
    if y - radius < bounds[1] or y + radius > bounds[3]:
        return False
    for k in range(obstacles.shape[0]):
        cx = min(max(x, obstacles[k, 0]), obstacles[k, 2])
        cy = min(max(y, obstacles[k, 1]), obstacles[k, 3])
        dx = cx - x
        dy = cy - y
        if math.sqrt(dx * dx + dy * dy) < radius:
            return False
    lim = 2.0 * radius
    for j in range(pos.shape[0]):
        if j == i:
            continue
        dx = pos[j, 0] - x
        dy = pos[j, 1] - y
        if math.sqrt(dx * dx + dy * dy) < lim:
            return False
    return True


@njit
def _turn_nb(heading, ang):
    out = np.empty(heading.shape[0])
    for i in range(heading.shape[0]):
        out[i] = _wrap(heading[i] + ang[i])
    return out


# cos and sin live in separate compiled functions: when both appear in one
# function LLVM merges them into sincos, which rounds differently from libm.
@njit
def _cos_nb(a):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = math.cos(a[i])
    return out


@njit
def _sin_nb(a):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = math.sin(a[i])
    return out


@njit
def _advance_nb(pos, lin, cos_h, sin_h, obstacles, bounds, radius):
    n = pos.shape[0]
    out = pos.copy()
    moved = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        if lin[i] == 0.0:
            continue
        x = out[i, 0] + lin[i] * cos_h[i]
        y = out[i, 1] + lin[i] * sin_h[i]
        if _disc_free(x, y, i, out, obstacles, bounds, radius):
            out[i, 0] = x
            out[i, 1] = y
            moved[i] = True
    return out, moved


def _move_resolve_nb(pos, heading, lin, ang, obstacles, bounds, radius):
    new_h = _turn_nb(heading, ang)
    out, moved = _advance_nb(pos, lin, _cos_nb(new_h), _sin_nb(new_h), obstacles, bounds, radius)
    return out, new_h, moved


# ---------------------------------------------------------------- numpy path

# numpy's SIMD transcendental loops can differ from libm in the last bit and
# across CPUs; route them through libm so both backends agree exactly.
_atan2_u = np.frompyfunc(math.atan2, 2, 1)
_sin_u = np.frompyfunc(math.sin, 1, 1)
_cos_u = np.frompyfunc(math.cos, 1, 1)


def _atan2_np(y, x):
    return np.asarray(_atan2_u(y, x), dtype=np.float64)


def _sin_np(a):
    return np.asarray(_sin_u(a), dtype=np.float64)


def _cos_np(a):
    return np.asarray(_cos_u(a), dtype=np.float64)


def _wrap_np(a):
    return a - TWO_PI * np.ceil((a - PI) / TWO_PI)


def _seg_hits_rects_np(ax, ay, bx, by, obstacles):
    """Broadcast segment-vs-rectangle test. Segment arrays share a shape S;
    the result has shape S + (M,)."""
    ax, ay, bx, by = (np.asarray(v, dtype=float)[..., None] for v in (ax, ay, bx, by))
    swap = (bx < ax) | ((bx == ax) & (by < ay))
    ax, ay, bx, by = (np.where(swap, bx, ax), np.where(swap, by, ay),
                      np.where(swap, ax, bx), np.where(swap, ay, by))
    x0, y0, x1, y1 = (obstacles[:, k] for k in range(4))
    dx = bx - ax
    dy = by - ay
    with np.errstate(divide="ignore", invalid="ignore"):
        tx1 = (x0 - ax) / dx
        tx2 = (x1 - ax) / dx
        ty1 = (y0 - ay) / dy
        ty2 = (y1 - ay) / dy
    zx = dx == 0.0
    zy = dy == 0.0
    t_lo = np.zeros(np.broadcast(ax, x0).shape)
    t_hi = np.ones_like(t_lo)
    t_lo = np.where(zx, t_lo, np.maximum(t_lo, np.minimum(tx1, tx2)))
    t_hi = np.where(zx, t_hi, np.minimum(t_hi, np.maximum(tx1, tx2)))
    t_lo = np.where(zy, t_lo, np.maximum(t_lo, np.minimum(ty1, ty2)))
    t_hi = np.where(zy, t_hi, np.minimum(t_hi, np.maximum(ty1, ty2)))
    ok_x = ~zx | ((x0 < ax) & (ax < x1))
    ok_y = ~zy | ((y0 < ay) & (ay < y1))
    return ok_x & ok_y & (t_lo < t_hi)


def _los_np(ax, ay, bx, by, obstacles):
    if obstacles.shape[0] == 0:
        return np.ones(np.broadcast(ax, ay, bx, by).shape, dtype=bool)
    return ~_seg_hits_rects_np(ax, ay, bx, by, obstacles).any(axis=-1)


def _perceive_np(pos, heading, led, obstacles, bounds, nest, goal,
                 max_vis, prox_range, radius):
    n = pos.shape[0]
    px = pos[:, 0][:, None]
    py = pos[:, 1][:, None]
    dx = pos[:, 0][None, :] - px
    dy = pos[:, 1][None, :] - py
    rng = np.sqrt(dx * dx + dy * dy)
    cand = (rng <= max_vis) & ~np.eye(n, dtype=bool)
    vis = np.zeros((n, n), dtype=bool)
    if cand.any():
        ii, jj = np.nonzero(cand)
        vis[ii, jj] = _los_np(pos[ii, 0], pos[ii, 1], pos[jj, 0], pos[jj, 1], obstacles)
    brg = np.where(vis, _wrap_np(_atan2_np(dy, dx) - heading[:, None]), np.nan)
    near_idx = np.full((n, N_COLORS), -1, dtype=np.int64)
    near_rng = np.full((n, N_COLORS), np.inf)
    for c in range(N_COLORS):
        m = vis & (led[None, :] == c)
        if not m.any():
            continue
        r = np.where(m, rng, np.inf)
        j = np.argmin(r, axis=1)
        best = r[np.arange(n), j]
        has = np.isfinite(best)
        near_idx[has, c] = j[has]
        near_rng[has, c] = best[has]

    def target_info(t):
        tdx = t[0] - pos[:, 0]
        tdy = t[1] - pos[:, 1]
        d = np.sqrt(tdx * tdx + tdy * tdy)
        seen = (d <= max_vis) & _los_np(pos[:, 0], pos[:, 1], np.full(n, t[0]), np.full(n, t[1]), obstacles)
        return np.stack([d, _wrap_np(_atan2_np(tdy, tdx) - heading), seen.astype(float)], axis=1)

    nest_info = target_info(nest)
    goal_info = target_info(goal)

    # candidate columns: 4 walls, M obstacles, N robots; argmin keeps first-in-order ties
    x = pos[:, 0]
    y = pos[:, 1]
    wall_r = np.stack([x - bounds[0], bounds[2] - x, y - bounds[1], bounds[3] - y], axis=1)
    zero = np.zeros(n)
    wall_vx = np.stack([-(x - bounds[0]), bounds[2] - x, zero, zero], axis=1)
    wall_vy = np.stack([zero, zero, -(y - bounds[1]), bounds[3] - y], axis=1)
    m = obstacles.shape[0]
    if m:
        cx = np.minimum(np.maximum(x[:, None], obstacles[None, :, 0]), obstacles[None, :, 2])
        cy = np.minimum(np.maximum(y[:, None], obstacles[None, :, 1]), obstacles[None, :, 3])
        ox = cx - x[:, None]
        oy = cy - y[:, None]
        ob_r = np.sqrt(ox * ox + oy * oy)
    else:
        ox = oy = ob_r = np.zeros((n, 0))
    rob_r = rng - radius
    rob_r[np.arange(n), np.arange(n)] = np.inf
    all_r = np.concatenate([wall_r, ob_r, rob_r], axis=1)
    all_vx = np.concatenate([wall_vx, ox, dx], axis=1)
    all_vy = np.concatenate([wall_vy, oy, dy], axis=1)
    k = np.argmin(all_r, axis=1)
    rows = np.arange(n)
    best = all_r[rows, k]
    within = best <= prox_range
    prox = np.empty((n, 2))
    prox[:, 0] = np.where(within, best, np.inf)
    prox[:, 1] = np.where(within, _wrap_np(_atan2_np(all_vy[rows, k], all_vx[rows, k]) - heading), 0.0)
    return rng, brg, vis, near_idx, near_rng, nest_info, goal_info, prox


def _los_from_point_np(px, py, targets, obstacles):
    k = targets.shape[0]
    return _los_np(np.full(k, px), np.full(k, py), targets[:, 0], targets[:, 1], obstacles)


def _disc_free_np(x, y, i, pos, obstacles, bounds, radius):
    if x - radius < bounds[0] or x + radius > bounds[2]:
        return False
    if y - radius < bounds[1] or y + radius > bounds[3]:
        return False
    if obstacles.shape[0]:
        cx = np.minimum(np.maximum(x, obstacles[:, 0]), obstacles[:, 2])
        cy = np.minimum(np.maximum(y, obstacles[:, 1]), obstacles[:, 3])
        dx = cx - x
        dy = cy - y
        if (np.sqrt(dx * dx + dy * dy) < radius).any():
            return False
    dx = pos[:, 0] - x
    dy = pos[:, 1] - y
    d = np.sqrt(dx * dx + dy * dy)
    if i >= 0:
        d[i] = np.inf
    return not (d < 2.0 * radius).any()


def _move_resolve_np(pos, heading, lin, ang, obstacles, bounds, radius):
    out = pos.copy()
    new_h = _wrap_np(heading + ang)
    moved = np.zeros(pos.shape[0], dtype=bool)
    cos_h = _cos_np(new_h)
    sin_h = _sin_np(new_h)
    for i in np.nonzero(lin != 0.0)[0]:
        x = out[i, 0] + lin[i] * cos_h[i]
        y = out[i, 1] + lin[i] * sin_h[i]
        if _disc_free_np(x, y, i, out, obstacles, bounds, radius):
            out[i, 0] = x
            out[i, 1] = y
            moved[i] = True
    return out, new_h, moved


# ---------------------------------------------------------------- dispatch

if HAVE_NUMBA:
    perceive_all = _perceive_nb
    move_resolve = _move_resolve_nb
    los_from_point = _los_from_point_nb
else:
    perceive_all = _perceive_np
    move_resolve = _move_resolve_np
    los_from_point = _los_from_point_np

IMPLEMENTATIONS = {
    "numpy": (_perceive_np, _move_resolve_np, _los_from_point_np),
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = (_perceive_nb, _move_resolve_nb, _los_from_point_nb)
