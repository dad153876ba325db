"""Tests for SE(2) pose algebra and constellation geometry."""

import math

import numpy as np
import pytest

from goto_bench.geometry import (
    Constellation,
    Pose2,
    constellation_distance,
    make_circle_constellation,
    orientation_error,
    pose_delta,
    position_error,
    wrap_angle,
)


def brute_force_distance(a: Pose2, b: Pose2, c: Constellation) -> float:
    """Independent oracle: numpy rigid transform + mean squared distance."""
    pts = np.asarray(c.points)

    def world(p: Pose2) -> np.ndarray:
        rot = np.array(
            [[math.cos(p.theta), -math.sin(p.theta)], [math.sin(p.theta), math.cos(p.theta)]]
        )
        return pts @ rot.T + np.array([p.x, p.y])

    return float(np.mean(np.sum((world(a) - world(b)) ** 2, axis=1)))


class TestWrapAngle:
    def test_zero(self):
        assert wrap_angle(0.0) == 0.0

    def test_three_half_pi(self):
        assert wrap_angle(1.5 * math.pi) == pytest.approx(-0.5 * math.pi)

    def test_boundary_maps_to_positive_pi(self):
        # Half-open convention: the branch point is +pi, never -pi.
        assert wrap_angle(-3.0 * math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-3.0 * math.pi) > 0.0
        assert wrap_angle(math.pi) == math.pi
        assert wrap_angle(-math.pi) == math.pi

    def test_range_over_random_inputs(self):
        rng = np.random.default_rng(7)
        for theta in rng.uniform(-50.0, 50.0, size=1000):
            w = wrap_angle(float(theta))
            assert -math.pi < w <= math.pi
            # Same point on the circle.
            assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-9)
            assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-9)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            wrap_angle(float("nan"))
        with pytest.raises(ValueError):
            wrap_angle(float("inf"))


class TestPose2:
    def test_theta_normalized_on_construction(self):
        assert Pose2(0, 0, 5 * math.pi).theta == pytest.approx(math.pi)

    def test_identity_composition(self):
        p = Pose2(1.0, 2.0, 0.3)
        assert p.compose(Pose2.identity()) == p
        q = Pose2.identity().compose(p)
        assert (q.x, q.y, q.theta) == (p.x, p.y, p.theta)

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            p = Pose2(*rng.uniform(-5, 5, size=2), rng.uniform(-math.pi, math.pi))
            r = p.compose(p.inverse())
            assert abs(r.x) < 1e-12 and abs(r.y) < 1e-12 and abs(r.theta) < 1e-12


class TestPoseDelta:
    def test_world_frame_goal(self):
        assert pose_delta(Pose2(0, 0, 0), Pose2(1, 2, 0.5)) == pytest.approx((1, 2, 0.5))

    def test_rotated_current_frame(self):
        # Oracle: R(-pi/2) @ world delta (0, 1) = (1, 0).
        rot = np.array([[math.cos(-math.pi / 2), -math.sin(-math.pi / 2)],
                        [math.sin(-math.pi / 2), math.cos(-math.pi / 2)]])
        expected = rot @ np.array([0.0, 1.0])
        np.testing.assert_allclose(expected, [1.0, 0.0], atol=1e-15)
        d = pose_delta(Pose2(1, 1, math.pi / 2), Pose2(1, 2, math.pi / 2))
        assert d == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)

    def test_identity(self):
        p = Pose2(0.4, -0.2, 1.1)
        assert pose_delta(p, p) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)

    def test_consistent_with_compose(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            cur = Pose2(*rng.uniform(-3, 3, size=2), rng.uniform(-math.pi, math.pi))
            goal = Pose2(*rng.uniform(-3, 3, size=2), rng.uniform(-math.pi, math.pi))
            dx, dy, dth = pose_delta(cur, goal)
            back = cur.offset(dx, dy, dth)
            assert position_error(back, goal) < 1e-9
            assert orientation_error(back.theta, goal.theta) < 1e-9


class TestConstellation:
    def test_circle_moment_is_radius_squared(self):
        assert make_circle_constellation(1.0, 8).moment == pytest.approx(1.0, abs=1e-12)
        assert make_circle_constellation(0.5, 16).moment == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("radius", [0.25, 0.5, 1.0, 2.0])
    def test_circle_moment_all_counts(self, radius):
        for count in range(2, 65):
            c = make_circle_constellation(radius, count)
            assert abs(c.moment - radius * radius) < 1e-12

    def test_general_constructor_moment(self):
        # Hand summation oracle: centroid (0, 2/3), offsets (1,-2/3),
        # (-1,-2/3), (0,4/3); mean squared norm = 14/9.
        pts = [(1.0, 0.0), (-1.0, 0.0), (0.0, 2.0)]
        cx = sum(p[0] for p in pts) / 3
        cy = sum(p[1] for p in pts) / 3
        oracle = sum((px - cx) ** 2 + (py - cy) ** 2 for px, py in pts) / 3
        assert oracle == pytest.approx(14.0 / 9.0, abs=1e-15)
        c = Constellation(tuple(pts))
        assert c.moment == pytest.approx(14.0 / 9.0, abs=1e-12)

    def test_points_recentred(self):
        c = Constellation(((1.0, 0.0), (-1.0, 0.0), (0.0, 2.0)))
        cx = sum(p[0] for p in c.points) / 3
        cy = sum(p[1] for p in c.points) / 3
        assert abs(cx) < 1e-15 and abs(cy) < 1e-15

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            make_circle_constellation(0.0, 8)
        with pytest.raises(ValueError):
            make_circle_constellation(1.0, 1)
        with pytest.raises(ValueError):
            Constellation(((0.5, 0.5), (0.5, 0.5)))


class TestConstellationDistance:
    def test_identity_pose_pair(self):
        c = make_circle_constellation(1.0, 8)
        p = Pose2(0.3, -0.7, 1.2)
        d = constellation_distance(p, p, c)
        assert d.total == 0.0
        assert d.positional == 0.0
        assert d.rotational_exact == 0.0

    def test_unit_circle_translation_plus_quarter_turn(self):
        c = make_circle_constellation(1.0, 8)
        a, b = Pose2(0, 0, 0), Pose2(1, 0, math.pi / 2)
        assert brute_force_distance(a, b, c) == pytest.approx(3.0, abs=1e-12)
        d = constellation_distance(a, b, c)
        assert d.total == pytest.approx(3.0, abs=1e-12)
        assert d.positional == pytest.approx(1.0, abs=1e-12)
        assert d.rotational_exact == pytest.approx(2.0, abs=1e-12)

    def test_unit_circle_half_turn(self):
        c = make_circle_constellation(1.0, 8)
        a, b = Pose2(0, 0, 0), Pose2(0, 0, math.pi)
        assert brute_force_distance(a, b, c) == pytest.approx(4.0, abs=1e-12)
        d = constellation_distance(a, b, c)
        assert d.total == pytest.approx(4.0, abs=1e-12)

    def test_matches_brute_force_on_random_inputs(self):
        rng = np.random.default_rng(19)
        for _ in range(300):
            n = int(rng.integers(2, 20))
            c = Constellation(tuple(map(tuple, rng.uniform(-2, 2, size=(n, 2)))))
            a = Pose2(*rng.uniform(-5, 5, size=2), rng.uniform(-math.pi, math.pi))
            b = Pose2(*rng.uniform(-5, 5, size=2), rng.uniform(-math.pi, math.pi))
            d = constellation_distance(a, b, c)
            assert d.total == pytest.approx(brute_force_distance(a, b, c), abs=1e-10)

    def test_decomposition_identity(self):
        rng = np.random.default_rng(23)
        for _ in range(2000):
            n = int(rng.integers(2, 65))
            c = Constellation(tuple(map(tuple, rng.uniform(-2, 2, size=(n, 2)))))
            a = Pose2(*rng.uniform(-5, 5, size=2), rng.uniform(-math.pi, math.pi))
            b = Pose2(*rng.uniform(-5, 5, size=2), rng.uniform(-math.pi, math.pi))
            d = constellation_distance(a, b, c)
            assert abs(d.total - (d.positional + d.rotational_exact)) < 1e-9

    def test_frame_invariance(self):
        rng = np.random.default_rng(29)
        c = make_circle_constellation(1.0, 12)
        for _ in range(500):
            a = Pose2(*rng.uniform(-3, 3, size=2), rng.uniform(-math.pi, math.pi))
            b = Pose2(*rng.uniform(-3, 3, size=2), rng.uniform(-math.pi, math.pi))
            t = Pose2(*rng.uniform(-3, 3, size=2), rng.uniform(-math.pi, math.pi))
            d0 = constellation_distance(a, b, c).total
            d1 = constellation_distance(t.compose(a), t.compose(b), c).total
            assert abs(d0 - d1) < 1e-9

    def test_rotational_term_periodic_and_zero_at_origin(self):
        c = make_circle_constellation(1.0, 8)
        assert c.rotational_exact(0.0) == 0.0
        for dth in np.linspace(-math.pi, math.pi, 33):
            assert c.rotational_exact(dth) == pytest.approx(
                c.rotational_exact(dth + 2 * math.pi), abs=1e-12
            )

    def test_monotone_in_centroid_distance(self):
        c = make_circle_constellation(1.0, 8)
        totals = [
            constellation_distance(Pose2(0, 0, 0), Pose2(x, 0, 0.5), c).total
            for x in np.linspace(0.0, 3.0, 20)
        ]
        assert all(b > a for a, b in zip(totals, totals[1:]))

    def test_monotone_in_heading_error(self):
        c = make_circle_constellation(1.0, 8)
        totals = [
            constellation_distance(Pose2(0, 0, 0), Pose2(1, 1, th), c).total
            for th in np.linspace(0.0, math.pi, 20)
        ]
        assert all(b > a for a, b in zip(totals, totals[1:]))

    def test_small_angle_accessor_is_an_approximation(self):
        c = make_circle_constellation(1.0, 8)
        assert c.rotational_small_angle(0.001) == pytest.approx(
            c.rotational_exact(0.001), rel=1e-6
        )
        # Far from zero the two forms are distinct by design.
        assert c.rotational_small_angle(math.pi) != pytest.approx(
            c.rotational_exact(math.pi), rel=0.1
        )


class TestScalarMetrics:
    def test_position_error_345(self):
        assert position_error(Pose2(0, 0, 0), Pose2(3, 4, 1)) == 5.0

    def test_position_error_zero(self):
        assert position_error(Pose2(1, 1, 0), Pose2(1, 1, 2)) == 0.0

    def test_position_error_at_success_threshold(self):
        assert position_error(Pose2(0.03, 0.04, 0), Pose2(0, 0, 0)) == pytest.approx(0.05)

    def test_orientation_error_wraps(self):
        assert orientation_error(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
        assert orientation_error(math.pi, -math.pi) == pytest.approx(0.0)
        assert orientation_error(0.0, math.pi / 4) == pytest.approx(math.pi / 4)

    def test_orientation_error_range(self):
        rng = np.random.default_rng(31)
        for tf, tg in rng.uniform(-10, 10, size=(500, 2)):
            e = orientation_error(float(tf), float(tg))
            assert 0.0 <= e <= math.pi
            alt = abs(tf - tg) % (2 * math.pi)
            assert e == pytest.approx(min(alt, 2 * math.pi - alt), abs=1e-9)
