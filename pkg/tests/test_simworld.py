"""Unicycle integration, obstacle motion, and ray-cast sensor geometry."""

import numpy as np
import pytest

from gpnav.controller import ControlInput
from gpnav.simworld import (LidarSpec, MotionSpec, Obstacle, RobotState, World,
                            cast_lidar, step_dynamics, wrap_angle)


class TestDynamics:
    def test_straight_line_unit_step(self):
        state = step_dynamics(RobotState(0.0, 0.0, 0.0), ControlInput(1.0, 0.0), 1.0)
        assert state.x == pytest.approx(1.0, abs=1e-12)
        assert state.y == pytest.approx(0.0, abs=1e-12)
        assert state.theta == pytest.approx(0.0, abs=1e-15)

    def test_zero_input_keeps_state(self):
        start = RobotState(2.0, -1.0, 0.7)
        state = step_dynamics(start, ControlInput(0.0, 0.0), 0.05)
        assert (state.x, state.y, state.theta) == (start.x, start.y, start.theta)

    def test_full_circle_returns_to_start(self):
        # v = omega = 1 for a total time of 2*pi: unit circle; integrate in
        # 126 RK4 substeps so the fourth-order error stays below 1e-6
        steps = 126
        dt = 2.0 * np.pi / steps
        state = RobotState(0.0, 0.0, 0.0)
        for _ in range(steps):
            state = step_dynamics(state, ControlInput(1.0, 1.0), dt)
        assert abs(state.x) <= 1e-6 and abs(state.y) <= 1e-6

    def test_heading_constant_without_omega(self):
        state = RobotState(0.0, 0.0, 0.3)
        for _ in range(100):
            state = step_dynamics(state, ControlInput(0.8, 0.0), 0.05)
        assert state.theta == pytest.approx(0.3, abs=1e-15)

    def test_heading_wraps(self):
        state = RobotState(0.0, 0.0, 3.0)
        state = step_dynamics(state, ControlInput(0.0, 2.0), 0.2)
        assert -np.pi <= state.theta < np.pi

    def test_dt_validation(self):
        with pytest.raises(ValueError):
            step_dynamics(RobotState(0, 0, 0), ControlInput(1.0, 0.0), 0.0)


class TestObstacles:
    def test_static_unchanged(self):
        world = World([Obstacle("s", 0.5, np.array([1.0, 2.0]))])
        world.advance(0.05)
        assert np.allclose(world.obstacles[0].center, [1.0, 2.0])

    def test_constant_velocity_step(self):
        world = World([Obstacle("m", 0.5, np.array([0.0, 0.0]),
                                MotionSpec(kind="velocity", velocity=(1.0, 0.0)))])
        world.advance(0.05)
        assert np.allclose(world.obstacles[0].center, [0.05, 0.0])

    def test_sinusoid_closed_form_no_drift(self):
        motion = MotionSpec(kind="sinusoid", axis=(0.0, 1.0), amplitude=1.0,
                            period=4.0)
        world = World([Obstacle("b", 0.5, np.array([2.0, 0.0]), motion)])
        for _ in range(20):     # 20 x 0.05 = 1.0 s
            world.advance(0.05)
        # displacement amplitude * sin(2 pi t / T) = 1.0 at t = 1, T = 4
        assert np.allclose(world.obstacles[0].center, [2.0, 1.0], atol=1e-12)

    def test_clearance(self):
        world = World([Obstacle("a", 0.5, np.array([0.0, 0.0])),
                       Obstacle("b", 1.0, np.array([5.0, 0.0]))])
        assert world.clearance((2.0, 0.0)) == pytest.approx(1.5)
        assert World([]).clearance((0.0, 0.0)) == np.inf

    def test_motion_validation(self):
        with pytest.raises(ValueError):
            MotionSpec(kind="teleport")
        with pytest.raises(ValueError):
            MotionSpec(kind="sinusoid", period=0.0)
        with pytest.raises(ValueError):
            Obstacle("bad", 0.0, np.zeros(2))


class TestLidar:
    SPEC = LidarSpec(beam_count=360, max_range=6.0)

    def test_circle_dead_ahead(self):
        world = World([Obstacle("c", 0.5, np.array([2.0, 0.0]))])
        scan = cast_lidar(world, RobotState(0.0, 0.0, 0.0), self.SPEC)
        assert scan.hits[0]
        assert scan.ranges[0] == pytest.approx(1.5, abs=1e-12)

    def test_empty_world_all_misses(self):
        scan = cast_lidar(World([]), RobotState(0.0, 0.0, 0.0), self.SPEC)
        assert not np.any(scan.hits)
        assert np.all(scan.ranges == self.SPEC.max_range)

    def test_obstacle_behind_does_not_hit_forward_beam(self):
        world = World([Obstacle("c", 0.5, np.array([-2.0, 0.0]))])
        scan = cast_lidar(world, RobotState(0.0, 0.0, 0.0), self.SPEC)
        assert not scan.hits[0]
        assert scan.ranges[0] == self.SPEC.max_range
        back = 180
        assert scan.hits[back]
        assert scan.ranges[back] == pytest.approx(1.5, abs=1e-12)

    def test_miss_iff_max_range(self):
        world = World([Obstacle("c", 0.8, np.array([3.0, 1.0]))])
        scan = cast_lidar(world, RobotState(0.0, 0.0, 0.4), self.SPEC)
        assert np.all((scan.ranges == self.SPEC.max_range) == ~scan.hits)

    def test_heading_rotates_beam_frame(self):
        world = World([Obstacle("c", 0.5, np.array([0.0, 2.0]))])
        # robot facing +y: the obstacle sits on beam 0
        scan = cast_lidar(world, RobotState(0.0, 0.0, np.pi / 2), self.SPEC)
        assert scan.hits[0]
        assert scan.ranges[0] == pytest.approx(1.5, abs=1e-12)

    def test_inside_circle_returns_exit_distance(self):
        world = World([Obstacle("c", 2.0, np.array([0.0, 0.0]))])
        scan = cast_lidar(world, RobotState(0.5, 0.0, 0.0), self.SPEC)
        assert scan.ranges[0] == pytest.approx(1.5, abs=1e-12)

    def test_matches_ray_march_oracle(self):
        rng = np.random.default_rng(0)
        world = World([Obstacle(f"o{i}", rng.uniform(0.3, 1.0),
                                rng.uniform(-4, 4, 2)) for i in range(5)])
        spec = LidarSpec(beam_count=40, max_range=6.0)
        checked = 0
        for _ in range(25):
            robot = RobotState(*rng.uniform(-3, 3, 2), rng.uniform(-np.pi, np.pi))
            if world.clearance(robot.position) <= 0.05:
                continue
            scan = cast_lidar(world, robot, spec)
            for b in range(spec.beam_count):
                marched = _ray_march(world, robot.position,
                                     robot.theta + scan.angles[b], spec.max_range)
                assert abs(scan.ranges[b] - marched) <= 1e-3
                checked += 1
        assert checked >= 900

    def test_noise_clipped_below_max_range(self):
        world = World([Obstacle("c", 0.5, np.array([5.9, 0.0]))])
        spec = LidarSpec(beam_count=4, max_range=6.0, noise_sigma=0.5)
        rng = np.random.default_rng(1)
        for _ in range(50):
            scan = cast_lidar(world, RobotState(0.0, 0.0, 0.0), spec, rng)
            assert np.all((scan.ranges == spec.max_range) == ~scan.hits)
            assert np.all(scan.ranges > 0.0)

    def test_deterministic_without_noise(self):
        world = World([Obstacle("c", 0.5, np.array([2.0, 1.0]))])
        robot = RobotState(0.0, 0.0, 0.2)
        a = cast_lidar(world, robot, self.SPEC)
        b = cast_lidar(world, robot, self.SPEC)
        assert np.array_equal(a.ranges, b.ranges)


def _ray_march(world, origin, angle, max_range, step=1e-4):
    """Brute-force reference: walk the ray until entering any obstacle."""
    direction = np.array([np.cos(angle), np.sin(angle)])
    # coarse-to-fine march keeps the runtime tolerable at 1e-4 resolution
    t = 0.0
    coarse = 0.01
    while t < max_range:
        point = origin + (t + coarse) * direction
        if world.clearance(point) <= 0.0:
            lo, hi = t, t + coarse
            while hi - lo > step / 2:
                mid = (lo + hi) / 2
                if world.clearance(origin + mid * direction) <= 0.0:
                    hi = mid
                else:
                    lo = mid
            return hi
        t += coarse
    return max_range


def test_wrap_angle_range():
    for theta in np.linspace(-10, 10, 101):
        wrapped = wrap_angle(theta)
        assert -np.pi <= wrapped < np.pi
        assert abs((wrapped - theta) % (2 * np.pi)) < 1e-9
