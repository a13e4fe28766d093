"""Deterministic 2D world: unicycle integration, moving circular obstacles,
and a planar ray-cast range sensor."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def wrap_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    return float((theta + np.pi) % (2.0 * np.pi) - np.pi)


@dataclass
class RobotState:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        self.theta = wrap_angle(self.theta)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


MOTION_KINDS = ("static", "velocity", "sinusoid")


@dataclass(frozen=True)
class MotionSpec:
    """Obstacle motion: static, constant velocity, or sinusoidal oscillation."""

    kind: str = "static"
    velocity: tuple[float, float] = (0.0, 0.0)
    axis: tuple[float, float] = (1.0, 0.0)
    amplitude: float = 0.0
    period: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in MOTION_KINDS:
            raise ValueError(f"unknown motion kind {self.kind!r}")
        if self.kind == "sinusoid":
            if self.period <= 0.0:
                raise ValueError("sinusoid period must be > 0")
            if np.linalg.norm(self.axis) == 0.0:
                raise ValueError("sinusoid axis must be nonzero")


@dataclass
class Obstacle:
    """Circular obstacle; spawn is the center at t = 0."""

    obstacle_id: str
    radius: float
    spawn: np.ndarray
    motion: MotionSpec = field(default_factory=MotionSpec)
    center: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("obstacle radius must be > 0")
        self.spawn = np.asarray(self.spawn, dtype=float)
        if self.center is None:
            self.center = self.spawn.copy()

    def advance(self, t_next: float, dt: float) -> None:
        if self.motion.kind == "velocity":
            self.center = self.center + np.asarray(self.motion.velocity) * dt
        elif self.motion.kind == "sinusoid":
            axis = np.asarray(self.motion.axis, dtype=float)
            axis = axis / np.linalg.norm(axis)
            phase = 2.0 * np.pi * t_next / self.motion.period
            # closed-form position so long episodes accumulate no drift
            self.center = self.spawn + axis * self.motion.amplitude * np.sin(phase)


class World:
    """Owns the obstacles and the simulation clock."""

    def __init__(self, obstacles: list[Obstacle] | None = None) -> None:
        self.obstacles = obstacles or []
        self.time = 0.0

    def advance(self, dt: float) -> None:
        if dt <= 0.0:
            raise ValueError("dt must be > 0")
        t_next = self.time + dt
        for obstacle in self.obstacles:
            obstacle.advance(t_next, dt)
        self.time = t_next

    def clearance(self, point) -> float:
        """Distance from a point to the nearest obstacle boundary (inf if none)."""
        p = np.asarray(point, dtype=float)
        if not self.obstacles:
            return float("inf")
        return min(float(np.linalg.norm(p - ob.center)) - ob.radius
                   for ob in self.obstacles)


@dataclass(frozen=True)
class LidarSpec:
    beam_count: int = 360
    max_range: float = 6.0
    noise_sigma: float = 0.0       # m, Gaussian range noise on hits

    def __post_init__(self) -> None:
        if self.beam_count < 1:
            raise ValueError("beam_count must be >= 1")
        if self.max_range <= 0.0:
            raise ValueError("max_range must be > 0")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class LidarScan:
    """Beam angles are in the robot frame; range == max_range marks a miss."""

    angles: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray


def step_dynamics(state: RobotState, control, dt: float) -> RobotState:
    """Integrate the unicycle one step with RK4 under a held control input.

    control provides .v (m/s) and .omega (rad/s). The heading is wrapped
    after the step.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    v, omega = float(control.v), float(control.omega)

    def deriv(theta: float) -> np.ndarray:
        return np.array([v * np.cos(theta), v * np.sin(theta), omega])

    y0 = np.array([state.x, state.y, state.theta])
    k1 = deriv(y0[2])
    k2 = deriv(y0[2] + 0.5 * dt * k1[2])
    k3 = deriv(y0[2] + 0.5 * dt * k2[2])
    k4 = deriv(y0[2] + dt * k3[2])
    y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return RobotState(x=float(y1[0]), y=float(y1[1]), theta=wrap_angle(float(y1[2])))


def cast_lidar(world: World, robot: RobotState, spec: LidarSpec,
               rng: np.random.Generator | None = None) -> LidarScan:
    """Exact ray-circle intersection for every beam; nearest positive root wins.

    Optional Gaussian range noise is drawn from the provided generator and
    applied to hit ranges only, clipped so a noisy hit can never turn into a
    max-range miss.
    """
    beams = spec.beam_count
    angles = 2.0 * np.pi * np.arange(beams) / beams
    dirs = np.stack([np.cos(robot.theta + angles), np.sin(robot.theta + angles)], axis=1)
    best = np.full(beams, np.inf)
    origin = robot.position
    for obstacle in world.obstacles:
        to_center = obstacle.center - origin
        along = dirs @ to_center
        closest_sq = float(to_center @ to_center) - obstacle.radius**2
        disc = along * along - closest_sq
        feasible = disc >= 0.0
        if not np.any(feasible):
            continue
        root = np.sqrt(disc[feasible])
        near = along[feasible] - root
        far = along[feasible] + root
        dist = np.where(near > 1e-9, near, np.where(far > 1e-9, far, np.inf))
        best[feasible] = np.minimum(best[feasible], dist)

    hits = best < spec.max_range
    ranges = np.where(hits, best, spec.max_range)
    if spec.noise_sigma > 0.0 and rng is not None and np.any(hits):
        noisy = ranges[hits] + rng.normal(0.0, spec.noise_sigma, int(hits.sum()))
        ranges[hits] = np.clip(noisy, 1e-6, np.nextafter(spec.max_range, 0.0))
    return LidarScan(angles=angles, ranges=ranges, hits=hits)
