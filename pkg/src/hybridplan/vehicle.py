"""Vehicle kinematics, footprint disks and collision checks.

The pose reference point is the rear-axle center: the bicycle model pivots
about it and the in-place rotation of the second system model is a pure yaw
change there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .geometry import Pose2D, move_along_arc, normalize_angle

# Distance-field lookups are quantized to cell centers; pad every disk
# radius by half a cell diagonal so the checks stay conservative.
def cell_pad(resolution: float) -> float:
    return resolution * math.sqrt(2.0) / 2.0


@dataclass(frozen=True)
class VehicleSpec:
    length: float = 4.0
    width: float = 2.0
    wheelbase: float = 2.5
    rear_overhang: float = 1.5       # rear axle to rear bumper
    max_steer: float = math.radians(31.51)
    n_disks: int = 3
    model_switch_time: float = 5.0   # seconds to change system model

    def __post_init__(self) -> None:
        if not (0.0 < self.wheelbase <= self.length):
            raise ValueError("need 0 < wheelbase <= length")
        if not (0.0 <= self.rear_overhang < self.length):
            raise ValueError("need 0 <= rear_overhang < length")
        if not (0.0 < self.max_steer < math.pi / 2.0):
            raise ValueError("max_steer must be in (0, pi/2)")
        if self.n_disks < 1:
            raise ValueError("n_disks must be >= 1")

    @property
    def min_turn_radius(self) -> float:
        return self.wheelbase / math.tan(self.max_steer)

    def footprint_corners(self, pose: Pose2D) -> List[Tuple[float, float]]:
        """The four rectangle corners, rear-axle anchored."""
        c, s = math.cos(pose.yaw), math.sin(pose.yaw)
        lon0, lon1 = -self.rear_overhang, self.length - self.rear_overhang
        half_w = self.width / 2.0
        return [(pose.x + lon * c - lat * s, pose.y + lon * s + lat * c)
                for lon in (lon0, lon1) for lat in (-half_w, half_w)]


def ushift_spec() -> VehicleSpec:
    """The U-Shift style preset: 4 m x 2 m, rotation about the rear axle."""
    return VehicleSpec()


@dataclass(frozen=True)
class DiskSet:
    """Footprint cover by disks centered on the longitudinal axis."""

    centers: Tuple[float, ...]   # offsets along the axis from the rear-axle point
    radius: float

    @property
    def swept_radius(self) -> float:
        """Radius of the circle containing the footprint for any yaw."""
        return max(abs(c) for c in self.centers) + self.radius


def make_disk_set(spec: VehicleSpec) -> DiskSet:
    d = spec.length / (2.0 * spec.n_disks)
    first = -spec.rear_overhang + d
    centers = tuple(first + 2.0 * d * i for i in range(spec.n_disks))
    radius = math.hypot(d, spec.width / 2.0)
    return DiskSet(centers=centers, radius=radius)


def bicycle_step(pose: Pose2D, steer: float, arc_len: float, wheelbase: float) -> Pose2D:
    """Exact arc integration of the bicycle model; arc_len < 0 reverses."""
    kappa = math.tan(steer) / wheelbase if steer != 0.0 else 0.0
    x, y, yaw = move_along_arc(pose.x, pose.y, pose.yaw, kappa, arc_len)
    return Pose2D(x, y, yaw)


def rotate_in_place(pose: Pose2D, delta_yaw: float) -> Pose2D:
    return Pose2D(pose.x, pose.y, normalize_angle(pose.yaw + delta_yaw))


def _field_at(distance_field: np.ndarray, resolution: float, x: float, y: float,
              origin_x: float = 0.0, origin_y: float = 0.0) -> float:
    ix = int(math.floor((x - origin_x) / resolution))
    iy = int(math.floor((y - origin_y) / resolution))
    h, w = distance_field.shape
    if not (0 <= ix < w and 0 <= iy < h):
        return -math.inf  # outside the grid counts as colliding
    return float(distance_field[iy, ix])


def pose_collides(pose: Pose2D, disks: DiskSet, distance_field: np.ndarray,
                  resolution: float, origin_x: float = 0.0, origin_y: float = 0.0) -> bool:
    """Disk test against the obstacle distance field (conservative)."""
    threshold = disks.radius + cell_pad(resolution)
    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    for offset in disks.centers:
        cx = pose.x + offset * c
        cy = pose.y + offset * s
        if _field_at(distance_field, resolution, cx, cy, origin_x, origin_y) < threshold:
            return True
    return False


def rotation_collides(pose: Pose2D, delta_yaw: float, disks: DiskSet,
                      distance_field: np.ndarray, resolution: float,
                      origin_x: float = 0.0, origin_y: float = 0.0) -> bool:
    """Conservative swept check: the circle around the rear-axle point that
    contains the footprint at every yaw must be obstacle free."""
    threshold = disks.swept_radius + cell_pad(resolution)
    return _field_at(distance_field, resolution, pose.x, pose.y, origin_x, origin_y) < threshold
