"""Occupancy grids, sensing and derived obstacle fields.

Grid convention: cells[iy, ix] with iy increasing toward +y; cell (0, 0)
has its center at origin + (resolution/2, resolution/2).  The ASCII map
format stores rows top-down (row 0 is the maximum-y row).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .geometry import Pose2D

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

_CHAR_TO_CELL = {"?": UNKNOWN, ".": FREE, "#": OCCUPIED}
_CELL_TO_CHAR = {UNKNOWN: "?", FREE: ".", OCCUPIED: "#"}


@dataclass
class OccupancyGrid:
    resolution: float
    cells: np.ndarray                      # uint8, shape (height, width)
    origin: Pose2D = field(default_factory=lambda: Pose2D(0.0, 0.0, 0.0))
    version: int = 0                       # bumped on every mutation

    def __post_init__(self) -> None:
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise ValueError("cells must be a non-empty 2D array")
        self.cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        self._df_cache = {}

    def mark_dirty(self) -> None:
        """Invalidate derived-field caches after direct cell edits."""
        self.version += 1
        self._df_cache = {}

    def distance_field(self, unknown_as_occupied: bool = False) -> np.ndarray:
        """Memoized obstacle distance transform for the current cells."""
        key = unknown_as_occupied
        if key not in self._df_cache:
            self._df_cache[key] = distance_transform(self, unknown_as_occupied)
        return self._df_cache[key]

    @classmethod
    def filled(cls, width_cells: int, height_cells: int, resolution: float,
               value: int = FREE, origin: Optional[Pose2D] = None) -> "OccupancyGrid":
        cells = np.full((height_cells, width_cells), value, dtype=np.uint8)
        return cls(resolution, cells, origin or Pose2D(0.0, 0.0, 0.0))

    @property
    def width_cells(self) -> int:
        return self.cells.shape[1]

    @property
    def height_cells(self) -> int:
        return self.cells.shape[0]

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.resolution, self.cells.copy(), self.origin)

    def world_to_cell(self, x: float, y: float) -> Tuple[int, int]:
        ix = int(math.floor((x - self.origin.x) / self.resolution))
        iy = int(math.floor((y - self.origin.y) / self.resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> Tuple[float, float]:
        return (self.origin.x + (ix + 0.5) * self.resolution,
                self.origin.y + (iy + 0.5) * self.resolution)

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width_cells and 0 <= iy < self.height_cells

    def occupied_mask(self, unknown_as_occupied: bool = False) -> np.ndarray:
        if unknown_as_occupied:
            return self.cells != FREE
        return self.cells == OCCUPIED

    def set_box(self, x0: float, y0: float, x1: float, y1: float, value: int) -> None:
        """Fill the cells whose centers fall inside the world-space box."""
        ix0 = max(0, int(math.ceil((x0 - self.origin.x) / self.resolution - 0.5)))
        iy0 = max(0, int(math.ceil((y0 - self.origin.y) / self.resolution - 0.5)))
        ix1 = min(self.width_cells, int(math.floor((x1 - self.origin.x) / self.resolution - 0.5)) + 1)
        iy1 = min(self.height_cells, int(math.floor((y1 - self.origin.y) / self.resolution - 0.5)) + 1)
        if ix0 < ix1 and iy0 < iy1:
            self.cells[iy0:iy1, ix0:ix1] = value
            self.mark_dirty()

    def set_disk(self, cx: float, cy: float, radius: float, value: int) -> None:
        """Fill the cells whose centers fall inside the world-space disk."""
        h, w = self.cells.shape
        xs = self.origin.x + (np.arange(w) + 0.5) * self.resolution
        ys = self.origin.y + (np.arange(h) + 0.5) * self.resolution
        mask = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2 <= radius * radius
        self.cells[mask] = value
        self.mark_dirty()


def save_map(grid: OccupancyGrid, path) -> None:
    """Write the ASCII map format: `W H RESOLUTION` then rows top-down."""
    lines = [f"{grid.width_cells} {grid.height_cells} {grid.resolution!r}"]
    for row in grid.cells[::-1]:
        lines.append("".join(_CELL_TO_CHAR[int(c)] for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_map(path) -> OccupancyGrid:
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}: empty map file")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"{path}: header must be 'W H RESOLUTION'")
    w, h = int(header[0]), int(header[1])
    resolution = float(header[2])
    rows = lines[1:1 + h]
    if len(rows) != h:
        raise ValueError(f"{path}: expected {h} rows, found {len(rows)}")
    cells = np.empty((h, w), dtype=np.uint8)
    for file_row, line in enumerate(rows):
        if len(line) != w:
            raise ValueError(f"{path}: row {file_row} has {len(line)} chars, expected {w}")
        try:
            cells[h - 1 - file_row] = [_CHAR_TO_CELL[c] for c in line]
        except KeyError as exc:
            raise ValueError(f"{path}: bad cell character {exc} in row {file_row}") from None
    return OccupancyGrid(resolution, cells)


def distance_transform(grid: OccupancyGrid, unknown_as_occupied: bool = False) -> np.ndarray:
    """Per-cell Euclidean distance in meters to the nearest occupied cell center.

    Occupied cells map to 0; a grid without any occupied cell maps to +inf.
    """
    occupied = grid.occupied_mask(unknown_as_occupied)
    if not occupied.any():
        return np.full(grid.cells.shape, np.inf)
    return ndimage.distance_transform_edt(~occupied) * grid.resolution


@dataclass(frozen=True)
class VoronoiField:
    """Normalized obstacle proximity in [0, 1]; 1 inside obstacles."""

    values: np.ndarray
    resolution: float
    origin: Pose2D

    def sample(self, x: float, y: float) -> float:
        ix = int(math.floor((x - self.origin.x) / self.resolution))
        iy = int(math.floor((y - self.origin.y) / self.resolution))
        h, w = self.values.shape
        if not (0 <= ix < w and 0 <= iy < h):
            return 1.0
        return float(self.values[iy, ix])


def voronoi_field(grid: OccupancyGrid, alpha: float = 10.0, d_max: float = 10.0) -> VoronoiField:
    """Obstacle-proximity field falling to 0 both far from obstacles and on
    the edges equidistant between distinct obstacle components.
    """
    if alpha <= 0.0 or d_max <= 0.0:
        raise ValueError("alpha and d_max must be positive")
    occupied = grid.occupied_mask()
    shape = grid.cells.shape
    if not occupied.any():
        return VoronoiField(np.zeros(shape), grid.resolution, grid.origin)

    edt, (ind_y, ind_x) = ndimage.distance_transform_edt(~occupied, return_indices=True)
    d_obs = edt * grid.resolution

    labels, n_labels = ndimage.label(occupied, structure=np.ones((3, 3), dtype=int))
    nearest = labels[ind_y, ind_x]

    if n_labels >= 2:
        ridge = np.zeros(shape, dtype=bool)
        ridge[:-1, :] |= nearest[:-1, :] != nearest[1:, :]
        ridge[1:, :] |= nearest[1:, :] != nearest[:-1, :]
        ridge[:, :-1] |= nearest[:, :-1] != nearest[:, 1:]
        ridge[:, 1:] |= nearest[:, 1:] != nearest[:, :-1]
        ridge &= ~occupied
        if ridge.any():
            d_vor = ndimage.distance_transform_edt(~ridge) * grid.resolution
        else:
            d_vor = np.full(shape, np.inf)
    else:
        d_vor = np.full(shape, np.inf)

    with np.errstate(invalid="ignore"):
        vor_term = np.where(np.isinf(d_vor), 1.0, d_vor / np.where(d_obs + d_vor == 0.0, 1.0, d_obs + d_vor))
    values = (alpha / (alpha + d_obs)) * vor_term * ((d_obs - d_max) ** 2 / d_max ** 2)
    values[d_obs > d_max] = 0.0
    values[occupied] = 1.0
    return VoronoiField(np.clip(values, 0.0, 1.0), grid.resolution, grid.origin)


def raytrace_reveal(truth: OccupancyGrid, belief: OccupancyGrid, sensor_pose: Pose2D,
                    sensor_range: float, n_rays: int = 720) -> int:
    """Reveal belief cells by casting rays on the ground-truth map.

    Rays march cell-by-cell (integer grid traversal) from the sensor along
    n_rays equally spaced bearings.  Free truth cells are copied to the
    belief until the first occupied cell, which is also copied, stopping
    the ray.  Returns the number of cells that left the UNKNOWN state.
    """
    if truth.cells.shape != belief.cells.shape or truth.resolution != belief.resolution:
        raise ValueError("truth and belief grids must share shape and resolution")
    if sensor_range <= 0.0:
        raise ValueError("sensor_range must be positive")
    if n_rays < 8:
        raise ValueError("n_rays must be at least 8")

    res = truth.resolution
    ix0, iy0 = truth.world_to_cell(sensor_pose.x, sensor_pose.y)
    if not truth.in_bounds(ix0, iy0):
        return 0

    unknown_before = int(np.count_nonzero(belief.cells == UNKNOWN))
    occ = truth.cells == OCCUPIED
    h, w = occ.shape

    bearings = np.arange(n_rays) * (2.0 * math.pi / n_rays)
    dir_x = np.cos(bearings)
    dir_y = np.sin(bearings)

    ix = np.full(n_rays, ix0, dtype=np.int64)
    iy = np.full(n_rays, iy0, dtype=np.int64)
    step_x = np.where(dir_x >= 0.0, 1, -1)
    step_y = np.where(dir_y >= 0.0, 1, -1)

    # parametric distance to the first x/y cell boundary, then per-cell deltas
    rel_x = sensor_pose.x - truth.origin.x - ix0 * res
    rel_y = sensor_pose.y - truth.origin.y - iy0 * res
    with np.errstate(divide="ignore", invalid="ignore"):
        t_max_x = np.where(dir_x >= 0.0, (res - rel_x) / dir_x, rel_x / -dir_x)
        t_max_y = np.where(dir_y >= 0.0, (res - rel_y) / dir_y, rel_y / -dir_y)
        t_delta_x = res / np.abs(dir_x)
        t_delta_y = res / np.abs(dir_y)
    # axis-parallel rays never cross the other axis' boundaries
    t_max_x = np.where(np.abs(dir_x) < 1e-300, np.inf, t_max_x)
    t_max_y = np.where(np.abs(dir_y) < 1e-300, np.inf, t_max_y)

    # reveal the sensor's own cell first
    belief.cells[iy0, ix0] = truth.cells[iy0, ix0]
    active = ~np.full(n_rays, occ[iy0, ix0])

    max_steps = int(2.0 * sensor_range / res) + 4
    for _ in range(max_steps):
        if not active.any():
            break
        go_x = t_max_x <= t_max_y
        t_entry = np.where(go_x, t_max_x, t_max_y)
        ix = np.where(active & go_x, ix + step_x, ix)
        iy = np.where(active & ~go_x, iy + step_y, iy)
        t_max_x = np.where(active & go_x, t_max_x + t_delta_x, t_max_x)
        t_max_y = np.where(active & ~go_x, t_max_y + t_delta_y, t_max_y)
        active &= t_entry <= sensor_range
        active &= (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        if not active.any():
            break
        ay = iy[active]
        ax = ix[active]
        belief.cells[ay, ax] = truth.cells[ay, ax]
        hit = np.zeros(n_rays, dtype=bool)
        hit[active] = occ[ay, ax]
        active &= ~hit

    unknown_after = int(np.count_nonzero(belief.cells == UNKNOWN))
    revealed = unknown_before - unknown_after
    if revealed:
        belief.mark_dirty()
    return revealed
