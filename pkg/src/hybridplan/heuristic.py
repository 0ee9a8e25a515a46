"""Obstacle-aware 2D cost-to-goal field and the paths extracted from it.

The field doubles as the planner's distance heuristic and as the source of
the coarse routes whose divergence between timesteps triggers replanning.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from .geometry import Pose2D
from .grid import OCCUPIED, OccupancyGrid

PLANNING_RESOLUTION = 0.625   # [m] coarse planning grid
DIVERGENCE_STEP = 0.625       # [m] arc-length resampling for path matching


class GoalBlockedError(ValueError):
    pass


class NoRouteError(ValueError):
    pass


@dataclass(frozen=True)
class DistanceMap:
    """2D cost-to-goal in meters on the coarse grid; +inf where unreachable."""

    values: np.ndarray
    blocked: np.ndarray
    goal_cell: Tuple[int, int]
    planning_resolution: float
    origin: Pose2D

    def cell_of(self, x: float, y: float) -> Tuple[int, int]:
        ix = int(math.floor((x - self.origin.x) / self.planning_resolution))
        iy = int(math.floor((y - self.origin.y) / self.planning_resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> Tuple[float, float]:
        return (self.origin.x + (ix + 0.5) * self.planning_resolution,
                self.origin.y + (iy + 0.5) * self.planning_resolution)

    def value_at(self, x: float, y: float) -> float:
        ix, iy = self.cell_of(x, y)
        h, w = self.values.shape
        if not (0 <= ix < w and 0 <= iy < h):
            return math.inf
        return float(self.values[iy, ix])

    def nearest_reachable_cell(self, x: float, y: float,
                               radius_cells: int = 2) -> Optional[Tuple[int, int]]:
        """The finite-valued cell closest to (x, y) within a small window."""
        ix0, iy0 = self.cell_of(x, y)
        h, w = self.values.shape
        best = None
        for iy in range(max(0, iy0 - radius_cells), min(h, iy0 + radius_cells + 1)):
            for ix in range(max(0, ix0 - radius_cells), min(w, ix0 + radius_cells + 1)):
                if not math.isfinite(self.values[iy, ix]):
                    continue
                cx, cy = self.cell_center(ix, iy)
                key = ((cx - x) ** 2 + (cy - y) ** 2, iy * w + ix)
                if best is None or key < best[0]:
                    best = (key, (ix, iy))
        return None if best is None else best[1]

    def route_distance(self, x: float, y: float) -> float:
        """Cost-to-goal from the nearest reachable cell around (x, y)."""
        cell = self.nearest_reachable_cell(x, y)
        if cell is None:
            return math.inf
        return float(self.values[cell[1], cell[0]])


def _downsample_blocked(fine_blocked: np.ndarray, factor: int) -> np.ndarray:
    """Max-pool: a coarse cell is blocked if any fine cell inside it is."""
    h, w = fine_blocked.shape
    ch = -(-h // factor)
    cw = -(-w // factor)
    padded = np.zeros((ch * factor, cw * factor), dtype=bool)
    padded[:h, :w] = fine_blocked
    return padded.reshape(ch, factor, cw, factor).any(axis=(1, 3))


def build_distance_map(belief: OccupancyGrid, goal: Pose2D,
                       planning_resolution: float = PLANNING_RESOLUTION,
                       inflation_radius: float = 1.0) -> DistanceMap:
    """Flood the cost-to-goal over the 8-connected coarse grid.

    Unknown cells count as free (optimistic planner); occupied cells are
    inflated by `inflation_radius` before max-pool downsampling.  Straight
    moves cost the planning resolution, diagonal moves sqrt(2) times that.
    """
    factor = planning_resolution / belief.resolution
    if abs(factor - round(factor)) > 1e-9 or round(factor) < 1:
        raise ValueError("planning_resolution must be an integer multiple of the grid resolution")
    factor = int(round(factor))

    fine_occ = belief.cells == OCCUPIED
    if inflation_radius > 0.0 and fine_occ.any():
        fine_blocked = belief.distance_field() <= inflation_radius
    else:
        fine_blocked = fine_occ
    blocked = _downsample_blocked(fine_blocked, factor)
    ch, cw = blocked.shape

    gx = int(math.floor((goal.x - belief.origin.x) / planning_resolution))
    gy = int(math.floor((goal.y - belief.origin.y) / planning_resolution))
    if not (0 <= gx < cw and 0 <= gy < ch) or blocked[gy, gx]:
        raise GoalBlockedError("goal blocked")

    values = _flood_from(blocked, (gx, gy), planning_resolution)
    return DistanceMap(values=values, blocked=blocked, goal_cell=(gx, gy),
                       planning_resolution=planning_resolution, origin=belief.origin)


def _flood_from(blocked: np.ndarray, goal_cell: Tuple[int, int], resolution: float) -> np.ndarray:
    """Single-source shortest paths over the free cells (sparse Dijkstra)."""
    h, w = blocked.shape
    free = ~blocked
    idx = np.full((h, w), -1, dtype=np.int64)
    idx[free] = np.arange(int(free.sum()))
    n = int(free.sum())

    rows = []
    cols = []
    data = []
    diag = resolution * math.sqrt(2.0)
    for dy, dx, cost in ((0, 1, resolution), (1, 0, resolution),
                         (1, 1, diag), (1, -1, diag)):
        src_y = slice(max(0, -dy), h - max(0, dy))
        src_x = slice(max(0, -dx), w - max(0, dx))
        dst_y = slice(max(0, dy), h - max(0, -dy))
        dst_x = slice(max(0, dx), w - max(0, -dx))
        ok = free[src_y, src_x] & free[dst_y, dst_x]
        a = idx[src_y, src_x][ok]
        b = idx[dst_y, dst_x][ok]
        rows.append(a)
        cols.append(b)
        data.append(np.full(a.shape, cost))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    graph = coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

    gx, gy = goal_cell
    dist = csgraph_dijkstra(graph, directed=False, indices=int(idx[gy, gx]))
    values = np.full((h, w), np.inf)
    values[free] = dist
    return values


@dataclass(frozen=True)
class AStarPath:
    """8-connected chain of coarse cell centers toward the goal."""

    points: np.ndarray        # (n, 2) world coordinates
    cumulative_s: np.ndarray  # (n,) arc length from the start

    @property
    def length(self) -> float:
        return float(self.cumulative_s[-1])


def extract_astar_path(dmap: DistanceMap, start: Pose2D) -> AStarPath:
    """Steepest-descent walk over the cost-to-goal field down to the goal.

    Each step moves along an optimal edge (the neighbor minimizing value +
    edge cost, ties broken by lowest row-major index), so the chain's length
    equals the start cell's cost-to-goal.
    """
    cell = dmap.nearest_reachable_cell(start.x, start.y)
    if cell is None:
        raise NoRouteError("no 2D route")
    h, w = dmap.values.shape
    res = dmap.planning_resolution
    diag = res * math.sqrt(2.0)

    ix, iy = cell
    points = [dmap.cell_center(ix, iy)]
    cum = [0.0]
    for _ in range(h * w):
        if (ix, iy) == dmap.goal_cell:
            break
        best = None
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                nx, ny = ix + dx, iy + dy
                if not (0 <= nx < w and 0 <= ny < h):
                    continue
                v = dmap.values[ny, nx]
                if not math.isfinite(v):
                    continue
                edge = diag if dx != 0 and dy != 0 else res
                key = (v + edge, ny * w + nx)
                if best is None or key < best[0]:
                    best = (key, nx, ny, edge)
        if best is None:
            raise NoRouteError("no 2D route")
        _, ix, iy, edge = best
        points.append(dmap.cell_center(ix, iy))
        cum.append(cum[-1] + edge)
    else:
        raise NoRouteError("descent did not reach the goal cell")
    return AStarPath(points=np.array(points), cumulative_s=np.array(cum))


def waypose_at(path: AStarPath, s_w: float) -> Pose2D:
    """Pose at arc length s_w along the path; heading from the owning segment."""
    if path.points.shape[0] < 2:
        raise ValueError("path too short for waypose")
    s = min(max(s_w, 0.0), path.length)
    idx = int(np.searchsorted(path.cumulative_s, s, side="left"))
    idx = max(1, min(idx, path.points.shape[0] - 1))
    p0 = path.points[idx - 1]
    p1 = path.points[idx]
    seg = path.cumulative_s[idx] - path.cumulative_s[idx - 1]
    frac = 0.0 if seg <= 0.0 else (s - path.cumulative_s[idx - 1]) / seg
    pos = p0 + frac * (p1 - p0)
    yaw = math.atan2(p1[1] - p0[1], p1[0] - p0[0])
    return Pose2D(float(pos[0]), float(pos[1]), yaw)


def _resample(path: AStarPath, s_values: np.ndarray) -> np.ndarray:
    xs = np.interp(s_values, path.cumulative_s, path.points[:, 0])
    ys = np.interp(s_values, path.cumulative_s, path.points[:, 1])
    return np.column_stack([xs, ys])


def detect_divergence(prev: AStarPath, curr: AStarPath, d_div: float,
                      step: float = DIVERGENCE_STEP) -> Optional[float]:
    """Arc length along `prev` where the two routes first drift apart.

    Both paths are resampled at a fixed arc-length step and compared
    element-wise up to the shorter length; returns the smallest arc length
    whose distance exceeds d_div, or None if they never diverge.
    """
    limit = min(prev.length, curr.length)
    n = int(math.floor(limit / step))
    s_values = np.arange(n + 1) * step
    a = _resample(prev, s_values)
    b = _resample(curr, s_values)
    d = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])
    over = np.nonzero(d > d_div)[0]
    if over.size == 0:
        return None
    return float(s_values[over[0]])
