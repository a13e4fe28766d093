"""Per-frame perception: scan -> occupancy grid -> clusters -> tracked ellipses.

The pipeline is a single-owner sequential stage; it mutates only its own
track store and returns an immutable snapshot of everything the barrier
needs for the current frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import NOISE, dbscan
from .ellipse import Ellipse, fit_mvee
from .grid import (GridSpec, ObstacleGridMap, VelocityGridMap,
                   build_velocity_grid, update_obstacle_grid)
from .tracking import ObstacleTracker, TrackerParams


@dataclass(frozen=True)
class PerceptionParams:
    grid: GridSpec = field(default_factory=GridSpec)
    eps: float = 0.35              # m; above the 0.283 m cell diagonal so
    min_pts: int = 2               # adjacent cells of one obstacle connect
    mvee_tolerance: float = 1e-4
    tracker: TrackerParams = field(default_factory=TrackerParams)
    dataset_cap: int = 60

    def __post_init__(self) -> None:
        if self.eps <= 0.0:
            raise ValueError("eps must be > 0")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")
        if self.dataset_cap < 1:
            raise ValueError("dataset_cap must be >= 1")


@dataclass
class PerceptionFrame:
    """Snapshot of one frame's perception outputs."""

    obstacle_grid: ObstacleGridMap
    velocity_grid: VelocityGridMap
    points: np.ndarray             # (M, 2) occupied cell centers
    labels: np.ndarray             # (M,) cluster ids, NOISE for outliers
    ellipses: list[Ellipse]
    cluster_ids: list[int]         # cluster id per ellipse
    track_ids: list[int]           # track id per ellipse


class PerceptionPipeline:
    def __init__(self, params: PerceptionParams | None = None) -> None:
        self.params = params or PerceptionParams()
        self.tracker = ObstacleTracker(self.params.tracker)

    def process(self, scan, robot, dt: float) -> PerceptionFrame:
        """Run one full perception frame and refresh the track store."""
        params = self.params
        grid = update_obstacle_grid(scan, robot, params.grid)
        points = grid.occupied_points()
        if len(points) > 0:
            labels = dbscan(points, params.eps, params.min_pts)
        else:
            labels = np.zeros(0, dtype=int)

        cluster_ids = sorted(int(c) for c in np.unique(labels) if c != NOISE)
        ellipses = [fit_mvee(points[labels == cid], tolerance=params.mvee_tolerance)
                    for cid in cluster_ids]

        assignment = self.tracker.step(ellipses, dt)
        tracker_params = params.tracker
        velocity_by_cluster = {
            cid: assignment[j].velocity(tracker_params.min_velocity_age,
                                        tracker_params.min_speed)
            for j, cid in enumerate(cluster_ids) if j in assignment
        }
        velocity_grid = build_velocity_grid(grid, labels, velocity_by_cluster)
        track_ids = [assignment[j].track_id if j in assignment else -1
                     for j in range(len(ellipses))]
        return PerceptionFrame(obstacle_grid=grid, velocity_grid=velocity_grid,
                               points=points, labels=labels, ellipses=ellipses,
                               cluster_ids=cluster_ids, track_ids=track_ids)

    def debug_record(self, frame: PerceptionFrame, t: float) -> dict:
        """JSON-serializable dump of one frame for golden-file regression."""
        return {
            "t": round(t, 6),
            "origin": frame.obstacle_grid.origin.tolist(),
            "resolution": frame.obstacle_grid.spec.resolution,
            "occupied_cells": frame.obstacle_grid.occupied_cells().tolist(),
            "labels": frame.labels.tolist(),
            "ellipses": [e.as_vector().tolist() for e in frame.ellipses],
            "fit_gaps": [e.fit_gap for e in frame.ellipses],
            "cluster_ids": frame.cluster_ids,
            "track_ids": frame.track_ids,
            "tracks": [{
                "id": tr.track_id,
                "state": tr.state.tolist(),
                "age": tr.age,
                "misses": tr.misses,
            } for tr in self.tracker.tracks],
        }
