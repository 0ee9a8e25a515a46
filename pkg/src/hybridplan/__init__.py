"""Kinematic path planning with guided Hybrid A* and in-place rotations."""

from .geometry import Pose2D, RSPath, RSSegment, normalize_angle, sample_path
from .grid import (FREE, OCCUPIED, UNKNOWN, OccupancyGrid, VoronoiField,
                   distance_transform, load_map, raytrace_reveal, save_map,
                   voronoi_field)
from .heuristic import (AStarPath, DistanceMap, GoalBlockedError, NoRouteError,
                        build_distance_map, detect_divergence, extract_astar_path,
                        waypose_at)
from .mission import (MissionConfig, MissionState, TickResult, check_path_collision,
                      compute_replan_start, mission_tick)
from .planner import (BudgetExceededError, DriveSegment, NoPathError, PlannedPath,
                      PlannerConfig, PlannerFailure, RotationSegment, SearchStats,
                      analytic_expansions, cost_of, geometric_extension, plan)
from .reeds_shepp import rs_path_length, rs_shortest_path
from .simulate import (EventRecord, MetricsReport, ScenarioSpec, kappa_dot_rms,
                       proximity_stats, run_scenario)
from .vehicle import (DiskSet, VehicleSpec, bicycle_step, make_disk_set,
                      pose_collides, rotate_in_place, rotation_collides, ushift_spec)

__all__ = [
    "Pose2D", "RSPath", "RSSegment", "normalize_angle", "sample_path",
    "FREE", "OCCUPIED", "UNKNOWN", "OccupancyGrid", "VoronoiField",
    "distance_transform", "load_map", "raytrace_reveal", "save_map", "voronoi_field",
    "AStarPath", "DistanceMap", "GoalBlockedError", "NoRouteError",
    "build_distance_map", "detect_divergence", "extract_astar_path", "waypose_at",
    "MissionConfig", "MissionState", "TickResult", "check_path_collision",
    "compute_replan_start", "mission_tick",
    "BudgetExceededError", "DriveSegment", "NoPathError", "PlannedPath",
    "PlannerConfig", "PlannerFailure", "RotationSegment", "SearchStats",
    "analytic_expansions", "cost_of", "geometric_extension", "plan",
    "rs_path_length", "rs_shortest_path",
    "EventRecord", "MetricsReport", "ScenarioSpec", "kappa_dot_rms",
    "proximity_stats", "run_scenario",
    "DiskSet", "VehicleSpec", "bicycle_step", "make_disk_set", "pose_collides",
    "rotate_in_place", "rotation_collides", "ushift_spec",
]
