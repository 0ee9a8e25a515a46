from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from hybridplan.grid import FREE, OCCUPIED, OccupancyGrid

GRID_RES = 0.15625


def bordered_grid(width_m: float, height_m: float, res: float = GRID_RES,
                  wall: float = 0.5) -> OccupancyGrid:
    g = OccupancyGrid.filled(int(round(width_m / res)), int(round(height_m / res)),
                             res, FREE)
    g.set_box(0, 0, width_m, wall, OCCUPIED)
    g.set_box(0, height_m - wall, width_m, height_m, OCCUPIED)
    g.set_box(0, 0, wall, height_m, OCCUPIED)
    g.set_box(width_m - wall, 0, width_m, height_m, OCCUPIED)
    return g


def angles_close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs((a - b + math.pi) % (2.0 * math.pi) - math.pi) <= tol


def pose_close(p, q, pos_tol: float = 1e-6, yaw_tol: float = 1e-6) -> bool:
    return (math.hypot(p.x - q.x, p.y - q.y) <= pos_tol
            and angles_close(p.yaw, q.yaw, yaw_tol))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
