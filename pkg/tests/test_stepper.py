"""Tests for the footstep simulator."""

import io
import math

import numpy as np
import pytest

from goto_bench.geometry import Pose2, orientation_error, position_error
from goto_bench.stepper import (
    FootstepAction,
    StepperConfig,
    clamp_action,
    is_settled,
    mirror_action,
    mirror_pose,
    mirror_state,
    nominal_feet,
    reset,
    step,
    write_trace_csv,
)

CFG = StepperConfig()


def assert_pose_close(a: Pose2, b: Pose2, tol=1e-12):
    assert abs(a.x - b.x) < tol and abs(a.y - b.y) < tol
    assert orientation_error(a.theta, b.theta) < tol


def random_action(rng) -> FootstepAction:
    if rng.uniform() < 0.15:
        return FootstepAction.stand()
    return FootstepAction(
        float(rng.uniform(-0.6, 0.6)),
        float(rng.uniform(-0.4, 0.4)),
        float(rng.uniform(-0.8, 0.8)),
    )


class TestReset:
    def test_nominal_stance_at_origin(self):
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        assert_pose_close(s.left_foot, Pose2(0, 0.15, 0))
        assert_pose_close(s.right_foot, Pose2(0, -0.15, 0))
        assert_pose_close(s.base, Pose2(0, 0, 0))
        assert s.clock == 0.0 and s.energy == 0.0 and s.step_log == ()

    def test_same_seed_same_state(self):
        a = reset(Pose2(1, 2, 0.5), 0.02, np.random.default_rng(42))
        b = reset(Pose2(1, 2, 0.5), 0.02, np.random.default_rng(42))
        assert a == b

    def test_perturbation_bound(self):
        start = Pose2(0.5, -0.5, 0.3)
        nl, nr = nominal_feet(start, CFG)
        for seed in range(1000):
            s = reset(start, 0.02, np.random.default_rng(seed))
            for foot, nominal in ((s.left_foot, nl), (s.right_foot, nr)):
                assert abs(foot.x - nominal.x) <= 0.02
                assert abs(foot.y - nominal.y) <= 0.02
                assert orientation_error(foot.theta, nominal.theta) <= 0.02


class TestStep:
    def test_place_right_foot_forward(self):
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0), swing_is_left=False)
        s = step(s, FootstepAction(0.2, 0.0, 0.0), CFG)
        assert_pose_close(s.right_foot, Pose2(0.2, -0.15, 0))
        assert_pose_close(s.left_foot, Pose2(0, 0.15, 0))
        assert_pose_close(s.base, Pose2(0.1, 0, 0))
        assert s.swing_is_left is True
        # Foot travelled 0.2 m: k_lin * 0.04 + e_base.
        assert s.energy == pytest.approx(1.0 * 0.04 + 0.2)

    def test_stand_action(self):
        s0 = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        s1 = step(s0, FootstepAction.stand(), CFG)
        assert s1.footstep_count == 0
        assert s1.energy == 0.0
        assert s1.clock == pytest.approx(0.4)
        assert s1.left_foot == s0.left_foot and s1.right_foot == s0.right_foot
        assert s1.stand_streak == 1

    def test_clamp_saturates_length(self):
        a = clamp_action(FootstepAction(1.0, 0.0, 0.0), True, CFG)
        assert math.hypot(a.dx, a.dy) == pytest.approx(0.4, abs=1e-15)

    def test_clamp_saturates_yaw(self):
        a = clamp_action(FootstepAction(0.0, 0.0, 2.0), True, CFG)
        assert a.dyaw == 0.5
        a = clamp_action(FootstepAction(0.0, 0.0, -2.0), True, CFG)
        assert a.dyaw == -0.5

    def test_clamp_lateral_margin(self):
        # Left swing pulled toward/past the right stance foot stops at
        # the margin; signed offset = stance_width + dy >= margin.
        a = clamp_action(FootstepAction(0.0, -0.5, 0.0), True, CFG)
        assert CFG.stance_width + a.dy >= CFG.lateral_margin - 1e-15
        a = clamp_action(FootstepAction(0.0, 0.5, 0.0), False, CFG)
        assert -(-CFG.stance_width + a.dy) >= CFG.lateral_margin - 1e-15

    def test_clamp_preserves_both_constraints(self):
        rng = np.random.default_rng(3)
        for _ in range(2000):
            raw = FootstepAction(*rng.uniform(-1.5, 1.5, size=3))
            swing_left = bool(rng.integers(2))
            a = clamp_action(raw, swing_left, CFG)
            assert math.hypot(a.dx, a.dy) <= CFG.max_step_len + 1e-12
            assert abs(a.dyaw) <= CFG.max_step_yaw
            s = 1.0 if swing_left else -1.0
            assert s * (s * CFG.stance_width + a.dy) >= CFG.lateral_margin - 1e-12

    def test_rejects_non_finite_action(self):
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            step(s, FootstepAction(float("nan"), 0, 0), CFG)


class TestTrajectoryInvariants:
    def test_determinism(self):
        rng = np.random.default_rng(9)
        actions = [random_action(rng) for _ in range(60)]

        def run():
            s = reset(Pose2(0.2, -0.1, 0.4), 0.01, np.random.default_rng(7))
            for a in actions:
                s = step(s, a, CFG)
            return s

        assert run() == run()

    def test_energy_additivity(self):
        rng = np.random.default_rng(21)
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        for _ in range(80):
            s = step(s, random_action(rng), CFG)
        assert s.energy == pytest.approx(sum(r.energy_j for r in s.step_log), abs=1e-9)

    def test_footstep_count_and_clock(self):
        rng = np.random.default_rng(33)
        actions = [random_action(rng) for _ in range(50)]
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        for a in actions:
            s = step(s, a, CFG)
        assert s.footstep_count == sum(1 for a in actions if not a.is_stand)
        assert s.clock == pytest.approx(50 * CFG.step_duration)

    def test_clock_and_energy_nondecreasing(self):
        rng = np.random.default_rng(8)
        s = reset(Pose2(0, 0, 0), 0.01, np.random.default_rng(1))
        for _ in range(50):
            prev = s
            s = step(s, random_action(rng), CFG)
            assert s.clock > prev.clock
            assert s.energy >= prev.energy

    def test_base_recomputed_from_feet(self):
        rng = np.random.default_rng(13)
        s = reset(Pose2(0, 0, 0), 0.02, np.random.default_rng(2))
        for _ in range(40):
            s = step(s, random_action(rng), CFG)
            assert s.base.x == pytest.approx(0.5 * (s.left_foot.x + s.right_foot.x))
            assert s.base.y == pytest.approx(0.5 * (s.left_foot.y + s.right_foot.y))

    def test_reachability_of_recorded_steps(self):
        # Recompute each placement's offset from the nominal mirrored
        # slot; it must respect the clamps.
        rng = np.random.default_rng(55)
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        for _ in range(100):
            prev = s
            a = random_action(rng)
            s = step(s, a, CFG)
            if a.is_stand:
                continue
            stance = prev.right_foot if prev.swing_is_left else prev.left_foot
            placed = s.left_foot if prev.swing_is_left else s.right_foot
            sgn = 1.0 if prev.swing_is_left else -1.0
            c, si = math.cos(stance.theta), math.sin(stance.theta)
            wx, wy = placed.x - stance.x, placed.y - stance.y
            rel = (c * wx + si * wy, -si * wx + c * wy - sgn * CFG.stance_width)
            assert math.hypot(*rel) <= CFG.max_step_len + 1e-9
            dyaw = orientation_error(placed.theta, stance.theta)
            assert dyaw <= CFG.max_step_yaw + 1e-12

    def test_mirror_equivariance(self):
        rng = np.random.default_rng(77)
        for trial in range(20):
            start = Pose2(
                float(rng.uniform(-1, 1)),
                float(rng.uniform(-1, 1)),
                float(rng.uniform(-3, 3)),
            )
            actions = [random_action(rng) for _ in range(40)]
            s = reset(start, 0.0, np.random.default_rng(0), swing_is_left=True)
            m = reset(
                mirror_pose(start), 0.0, np.random.default_rng(0), swing_is_left=False
            )
            for a in actions:
                s = step(s, a, CFG)
                m = step(m, mirror_action(a), CFG)
                expect = mirror_state(s)
                assert_pose_close(m.left_foot, expect.left_foot)
                assert_pose_close(m.right_foot, expect.right_foot)
                assert_pose_close(m.base, expect.base)
                assert m.energy == pytest.approx(expect.energy, abs=1e-12)


class TestSettling:
    def settled_state(self, base: Pose2):
        s = reset(base, 0.0, np.random.default_rng(0))
        s = step(s, FootstepAction.stand(), CFG)
        s = step(s, FootstepAction.stand(), CFG)
        return s

    def test_at_goal_after_two_stands(self):
        s = self.settled_state(Pose2(0, 0, 0))
        assert is_settled(s, Pose2(0, 0, 0))

    def test_not_settled_mid_step(self):
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        s = step(s, FootstepAction.stand(), CFG)
        s = step(s, FootstepAction(0.05, 0, 0), CFG)
        assert not is_settled(s, Pose2(0.025, 0, 0))

    def test_one_stand_insufficient(self):
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        s = step(s, FootstepAction.stand(), CFG)
        assert not is_settled(s, Pose2(0, 0, 0))

    def test_threshold_boundary(self):
        s = self.settled_state(Pose2(0.049, 0, 0))
        assert is_settled(s, Pose2(0, 0, 0))
        s = self.settled_state(Pose2(0.051, 0, 0))
        assert not is_settled(s, Pose2(0, 0, 0))

    def test_heading_tolerance(self):
        s = self.settled_state(Pose2(0, 0, 0.09))
        assert is_settled(s, Pose2(0, 0, 0))
        s = self.settled_state(Pose2(0, 0, 0.11))
        assert not is_settled(s, Pose2(0, 0, 0))

    def test_split_feet_not_settled(self):
        # Base on the goal but one foot far from its stance slot.
        s = reset(Pose2(-0.15, 0, 0), 0.0, np.random.default_rng(0))
        s = step(s, FootstepAction(0.3, 0, 0), CFG)  # base moves to origin
        s = step(s, FootstepAction.stand(), CFG)
        s = step(s, FootstepAction.stand(), CFG)
        assert position_error(s.base, Pose2(0, 0, 0)) < 1e-12
        assert not is_settled(s, Pose2(0, 0, 0))


class TestTraceExport:
    def test_schema_and_rows(self):
        s = reset(Pose2(0, 0, 0), 0.0, np.random.default_rng(0))
        s = step(s, FootstepAction(0.2, 0, 0.1), CFG)
        s = step(s, FootstepAction.stand(), CFG)
        s = step(s, FootstepAction(0.2, 0, 0), CFG)
        buf = io.StringIO()
        write_trace_csv(s.step_log, buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "step_index,time_s,foot,x_m,y_m,theta_rad,energy_j"
        assert len(lines) == 1 + 2
        first = lines[1].split(",")
        assert first[0] == "0" and first[2] in ("L", "R")

    def test_deterministic_bytes(self):
        def trace():
            s = reset(Pose2(0, 0, 0), 0.01, np.random.default_rng(4))
            for a in [FootstepAction(0.2, 0.05, 0.2), FootstepAction(-0.1, 0, -0.3)]:
                s = step(s, a, CFG)
            buf = io.StringIO()
            write_trace_csv(s.step_log, buf)
            return buf.getvalue()

        assert trace() == trace()
