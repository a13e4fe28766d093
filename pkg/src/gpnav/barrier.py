"""Log-GP barrier synthesis: value, spatial gradient, and time derivative.

The barrier is h = -scale * log(mu) - margin_shift, where mu is the GP
posterior mean over obstacle boundary points labeled 1. The log transform
keeps the value and gradient informative far from data, where a plain GP
mean saturates toward its prior. Obstacle motion enters through the time
derivative of mu along the tracked per-point velocities.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .gp import (GpModel, KernelParams, build_model, cov_matrix_time_derivative,
                 mean_gradient, predictive_mean, query_cov_time_derivative)
from .perception.grid import ObstacleGridMap, VelocityGridMap


class EmptyDataset(Exception):
    """Barrier queried without any training data; caller falls back to nominal."""


class ClampedRegion(Exception):
    """Posterior mean fell to the clamp floor; derivatives are unreliable there."""


VARIANTS = ("dlgp", "dlgp-no-dhdt", "gp-linear")


@dataclass(frozen=True)
class BarrierParams:
    """Barrier shaping parameters.

    scale multiplies the log term, margin_shift shifts the zero level to
    carve a safety margin around the data, and mu_floor bounds the mean away
    from zero before the logarithm (far from all data the posterior mean can
    round to or below zero). linear_prior is the offset used by the non-log
    ablation variant, h = linear_prior - mu.
    """

    scale: float = 1.0
    margin_shift: float = 0.1
    mu_floor: float = 1e-12
    linear_prior: float = 0.9

    def __post_init__(self) -> None:
        if self.scale <= 0.0:
            raise ValueError("scale must be > 0")
        if self.margin_shift <= 0.0:
            raise ValueError("margin_shift must be > 0")
        if not 0.0 < self.mu_floor <= 1e-9:
            raise ValueError("mu_floor must be in (0, 1e-9]")


@dataclass
class BarrierEvaluation:
    """Barrier value and derivatives at one query position.

    grad_state is (dh/dx, dh/dy, dh/dheading); the heading component is
    exactly zero because the barrier depends on position only.
    """

    value: float
    grad_state: np.ndarray
    time_derivative: float
    mu: float
    clamped: bool


def build_datasets(obstacle_grid: ObstacleGridMap, velocity_grid: VelocityGridMap,
                   cap: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Turn occupied cells into training points with index-aligned velocities.

    Points are cell centers in world coordinates, enumerated in row-major
    occupied order. When the occupied count exceeds the cap, every stride-th
    cell is kept (stride = ceil(count / cap)), so repeated runs subsample
    identically. An empty grid yields empty arrays.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    cells = obstacle_grid.occupied_cells()
    points = obstacle_grid.occupied_points()
    velocities = velocity_grid.velocities_at(cells)
    count = len(points)
    if count > cap:
        stride = int(np.ceil(count / cap))
        points = points[::stride]
        velocities = velocities[::stride]
    return points, velocities


def evaluate(model: GpModel, params: BarrierParams, position) -> float:
    """Barrier value -scale * log(max(mu, mu_floor)) - margin_shift."""
    if model is None or model.size == 0:
        raise EmptyDataset("barrier evaluated without training points")
    mu = predictive_mean(model, position)
    return -params.scale * np.log(max(mu, params.mu_floor)) - params.margin_shift


def spatial_gradient(model: GpModel, params: BarrierParams, position) -> np.ndarray:
    """Barrier gradient w.r.t. the robot state, shape (3,); heading entry is 0."""
    if model is None or model.size == 0:
        raise EmptyDataset("barrier evaluated without training points")
    mu = predictive_mean(model, position)
    if mu <= params.mu_floor:
        raise ClampedRegion(f"posterior mean {mu:.3e} at or below the clamp floor")
    grad_pos = -params.scale * mean_gradient(model, position) / mu
    return np.array([grad_pos[0], grad_pos[1], 0.0])


def time_derivative(model: GpModel, params: BarrierParams, position, velocities) -> float:
    """Barrier rate of change induced by the motion of the training points.

    Uses the dense forms: dmu/dt = kdot~^T alpha - (K^-1 k~)^T Kdot alpha,
    and dh/dt = -scale * (dmu/dt) / mu. Zero whenever all velocities vanish.
    """
    if model is None or model.size == 0:
        raise EmptyDataset("barrier evaluated without training points")
    kv = model.kernel_vector(position)
    mu = float(kv @ model.alpha)
    if mu <= params.mu_floor:
        raise ClampedRegion(f"posterior mean {mu:.3e} at or below the clamp floor")
    return -params.scale * _mean_rate(model, kv, position, velocities) / mu


def _mean_rate(model: GpModel, kernel_vec: np.ndarray, position, velocities) -> float:
    """d(mu)/dt as the training points move with the given velocities."""
    kdot = cov_matrix_time_derivative(model, velocities)
    kvec_dot = query_cov_time_derivative(model, position, velocities)
    w = model.solve(kernel_vec)
    return float(kvec_dot @ model.alpha - w @ (kdot @ model.alpha))


def evaluate_full(model: GpModel, params: BarrierParams, position, velocities,
                  variant: str = "dlgp") -> BarrierEvaluation:
    """Value, gradient and time derivative in one pass, with variant dispatch.

    Unlike the single-quantity functions this never raises on a clamped
    region; it sets the flag and zeroes the derivatives so the controller can
    fall back without exception plumbing.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown barrier variant {variant!r}")
    if model is None or model.size == 0:
        raise EmptyDataset("barrier evaluated without training points")
    pos = np.asarray(position, dtype=float)
    kv = model.kernel_vector(pos)
    mu = float(kv @ model.alpha)

    if variant == "gp-linear":
        value = params.linear_prior - mu
        grad_pos = -mean_gradient(model, pos)
        dhdt = -_mean_rate(model, kv, pos, velocities)
        return BarrierEvaluation(value=value,
                                 grad_state=np.array([grad_pos[0], grad_pos[1], 0.0]),
                                 time_derivative=dhdt, mu=mu, clamped=False)

    clamped = mu <= params.mu_floor
    value = -params.scale * np.log(max(mu, params.mu_floor)) - params.margin_shift
    if clamped:
        return BarrierEvaluation(value=value, grad_state=np.zeros(3),
                                 time_derivative=0.0, mu=mu, clamped=True)
    grad_pos = -params.scale * mean_gradient(model, pos) / mu
    if variant == "dlgp-no-dhdt":
        dhdt = 0.0
    else:
        dhdt = -params.scale * _mean_rate(model, kv, pos, velocities) / mu
    return BarrierEvaluation(value=value,
                             grad_state=np.array([grad_pos[0], grad_pos[1], 0.0]),
                             time_derivative=dhdt, mu=mu, clamped=clamped)


def model_from_datasets(points: np.ndarray, kernel: KernelParams) -> GpModel | None:
    """Build the barrier GP for a frame, or None when no points were observed."""
    if len(points) == 0:
        return None
    return build_model(points, params=kernel)


def export_field(model: GpModel, params: BarrierParams, path,
                 x_range: tuple[float, float], y_range: tuple[float, float],
                 resolution: float = 0.1) -> int:
    """Write an (x, y, h) CSV grid of barrier values over a rectangle.

    Returns the number of rows written. Intended for external surface or
    contour plotting of the barrier landscape.
    """
    if resolution <= 0.0:
        raise ValueError("resolution must be > 0")
    xs = np.arange(x_range[0], x_range[1] + 0.5 * resolution, resolution)
    ys = np.arange(y_range[0], y_range[1] + 0.5 * resolution, resolution)
    rows = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "y", "h"])
        for x in xs:
            for y in ys:
                h = evaluate(model, params, (x, y))
                writer.writerow([f"{x:.6f}", f"{y:.6f}", f"{h:.9f}"])
                rows += 1
    return rows
