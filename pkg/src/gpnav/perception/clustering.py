"""DBSCAN clustering of 2D points (occupied cell centers)."""

from __future__ import annotations

import numpy as np

NOISE = -1


def dbscan(points, eps: float, min_pts: int) -> np.ndarray:
    """Label each point with its cluster id, or NOISE (-1) for outliers.

    Standard semantics: a point is a core point when its eps-neighborhood
    (itself included) holds at least min_pts points; clusters grow by
    density-reachability from core points. Cluster ids are assigned in
    discovery order over the input.
    """
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    labels = np.full(n, NOISE, dtype=int)
    if n == 0:
        return labels

    # pairwise adjacency; frame point counts are small enough for O(n^2)
    diff = pts[:, None, :] - pts[None, :, :]
    within = np.einsum("ijk,ijk->ij", diff, diff) <= eps * eps
    neighbor_counts = within.sum(axis=1)
    core = neighbor_counts >= min_pts

    cluster = 0
    visited = np.zeros(n, dtype=bool)
    for start in range(n):
        if visited[start] or not core[start]:
            continue
        # breadth-first expansion from a fresh core point
        labels[start] = cluster
        visited[start] = True
        frontier = list(np.flatnonzero(within[start]))
        while frontier:
            idx = frontier.pop()
            if labels[idx] == NOISE:
                labels[idx] = cluster
            if visited[idx]:
                continue
            visited[idx] = True
            labels[idx] = cluster
            if core[idx]:
                frontier.extend(np.flatnonzero(within[idx]))
        cluster += 1
    return labels
