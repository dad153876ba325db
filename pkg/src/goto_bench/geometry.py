"""SE(2) pose algebra and constellation geometry.

Poses are (x, y, theta) with theta kept in the half-open interval
(-pi, pi]. A Constellation is a rigid planar point set anchored to a
pose; aligning two constellations measures translation and rotation
error in one number, with the trade-off governed by the set's planar
moment of inertia.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle to the half-open interval (-pi, pi].

    Args:
        theta: Angle in radians, any finite value.

    Returns:
        The equivalent angle in (-pi, pi]. The boundary maps to +pi,
        so wrap_angle(-pi) == wrap_angle(pi) == pi.

    Raises:
        ValueError: If theta is NaN or infinite.
    """
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta}")
    w = math.fmod(theta, TWO_PI)
    if w > math.pi:
        w -= TWO_PI
    elif w <= -math.pi:
        w += TWO_PI
    return w


@dataclass(frozen=True)
class Pose2:
    """A planar rigid pose: position in meters, heading in radians.

    The heading is normalized to (-pi, pi] on construction, so any
    Pose2 obtained from composition or inversion satisfies the same
    convention.
    """

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("pose coordinates must be finite")

    @staticmethod
    def identity() -> "Pose2":
        return Pose2(0.0, 0.0, 0.0)

    def compose(self, other: "Pose2") -> "Pose2":
        """Chain two poses: the result maps other's frame to the world."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def inverse(self) -> "Pose2":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2(-(c * self.x + s * self.y), -(-s * self.x + c * self.y), -self.theta)

    def apply(self, px: float, py: float) -> Tuple[float, float]:
        """Transform a body-frame point into the world frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return (self.x + c * px - s * py, self.y + s * px + c * py)

    def offset(self, dx: float, dy: float, dtheta: float = 0.0) -> "Pose2":
        """Compose with a body-frame displacement given as scalars."""
        wx, wy = self.apply(dx, dy)
        return Pose2(wx, wy, self.theta + dtheta)


def pose_delta(current: Pose2, goal: Pose2) -> Tuple[float, float, float]:
    """Goal pose expressed relative to the current pose.

    The translation is rotated into the current pose's body frame and
    the heading difference is wrapped.

    Returns:
        (dx_body, dy_body, dtheta) in meters, meters, radians.
    """
    c, s = math.cos(current.theta), math.sin(current.theta)
    wx = goal.x - current.x
    wy = goal.y - current.y
    return (c * wx + s * wy, -s * wx + c * wy, wrap_angle(goal.theta - current.theta))


@dataclass(frozen=True)
class Constellation:
    """A rigid planar point set stored relative to its own centroid.

    Storing centroid-relative offsets makes the positional/rotational
    decomposition of the alignment distance exact by construction: the
    centroid of the transformed set coincides with the pose position.

    Attributes:
        points: centroid-relative offsets in meters, ((x, y), ...).
        moment: mean squared offset norm in square meters (cached).
    """

    points: Tuple[Tuple[float, float], ...]
    moment: float = field(init=False)

    def __post_init__(self):
        pts = tuple((float(px), float(py)) for px, py in self.points)
        if len(pts) < 2:
            raise ValueError("constellation needs at least 2 points")
        n = len(pts)
        cx = math.fsum(p[0] for p in pts) / n
        cy = math.fsum(p[1] for p in pts) / n
        centered = tuple((px - cx, py - cy) for px, py in pts)
        moment = math.fsum(px * px + py * py for px, py in centered) / n
        if moment <= 0.0:
            raise ValueError("constellation points are coincident; orientation unobservable")
        object.__setattr__(self, "points", centered)
        object.__setattr__(self, "moment", moment)

    def rotational_exact(self, dtheta: float) -> float:
        """Mean squared point displacement under a pure rotation.

        Exact for any angle: 2 * moment * (1 - cos dtheta).
        """
        return 2.0 * self.moment * (1.0 - math.cos(dtheta))

    def rotational_small_angle(self, dtheta: float) -> float:
        """Small-angle approximation moment * dtheta**2.

        Provided for reference only; all distances in this package use
        the exact form, which agrees to O(dtheta**4) near zero.
        """
        return self.moment * dtheta * dtheta


def make_circle_constellation(radius: float, count: int = 8) -> Constellation:
    """Equally spaced points on a circle of the given radius.

    The moment of a centered circle is radius**2 regardless of count,
    which is why the alignment distance below has an N-independent
    closed form for this geometry.

    Args:
        radius: circle radius in meters, > 0.
        count: number of points, >= 2.
    """
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    if count < 2:
        raise ValueError(f"count must be at least 2, got {count}")
    pts = []
    for k in range(count):
        a = TWO_PI * k / count
        pts.append((radius * math.cos(a), radius * math.sin(a)))
    return Constellation(tuple(pts))


@dataclass(frozen=True)
class DistanceBreakdown:
    """Constellation alignment distance and its exact decomposition.

    total = positional + rotational_exact holds as an identity (no
    small-angle approximation), because the points are stored
    centroid-relative.

    Attributes:
        total: mean squared distance between corresponding points, m^2.
        positional: squared centroid distance, m^2.
        rotational_exact: 2 * moment * (1 - cos heading_error), m^2.
        heading_error: wrapped heading difference, radians.
    """

    total: float
    positional: float
    rotational_exact: float
    heading_error: float


def constellation_distance(a: Pose2, b: Pose2, c: Constellation) -> DistanceBreakdown:
    """Alignment distance between the constellation anchored at two poses.

    The total is computed by explicit per-point summation; the
    positional and rotational components come from the centroids and
    the exact rotational form, and sum to the total up to roundoff.

    Args:
        a: first anchor pose (e.g. the robot).
        b: second anchor pose (e.g. the goal).
        c: shared body-frame point set.
    """
    ca, sa = math.cos(a.theta), math.sin(a.theta)
    cb, sb = math.cos(b.theta), math.sin(b.theta)
    acc = 0.0
    for px, py in c.points:
        dx = (a.x + ca * px - sa * py) - (b.x + cb * px - sb * py)
        dy = (a.y + sa * px + ca * py) - (b.y + sb * px + cb * py)
        acc += dx * dx + dy * dy
    total = acc / len(c.points)
    dpos = (a.x - b.x) ** 2 + (a.y - b.y) ** 2
    dth = wrap_angle(b.theta - a.theta)
    return DistanceBreakdown(
        total=total,
        positional=dpos,
        rotational_exact=c.rotational_exact(dth),
        heading_error=dth,
    )


def position_error(final: Pose2, goal: Pose2) -> float:
    """Euclidean distance between two pose positions, meters."""
    return math.hypot(final.x - goal.x, final.y - goal.y)


def orientation_error(theta_f: float, theta_g: float) -> float:
    """Absolute angular difference on the circle, in [0, pi].

    Equivalent to min(|tf - tg|, 2*pi - |tf - tg|) for angles already
    in a 2*pi window, but safe for unwrapped inputs.
    """
    return abs(wrap_angle(theta_f - theta_g))
