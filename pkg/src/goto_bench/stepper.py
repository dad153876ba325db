"""Deterministic footstep-level planar walking simulator.

The robot is reduced to two feet and a base pose derived from them:
position at the feet midpoint, heading the circular mean of the foot
headings. One action places the swing foot relative to the stance
foot's nominal mirrored slot, subject to reachability clamps; a stand
action only advances the clock. There is no balance or contact model,
so every trajectory is an exact function of (start, actions, config).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import IO, Iterable, Optional, Tuple

import numpy as np

from .geometry import Pose2, orientation_error, position_error, wrap_angle

# Success thresholds for "at the target pose" (position m, heading rad).
DEFAULT_POS_TOL = 0.05
DEFAULT_ANG_TOL = 0.1

TRACE_HEADER = ("step_index", "time_s", "foot", "x_m", "y_m", "theta_rad", "energy_j")


@dataclass(frozen=True)
class StepperConfig:
    """Kinematic and energetic limits of the walker.

    Attributes:
        max_step_len: reach of one placement relative to the nominal
            slot, meters.
        max_step_yaw: heading change of one placement relative to the
            stance foot, radians.
        stance_width: lateral distance between the feet in nominal
            stance, meters.
        lateral_margin: minimum signed lateral offset of the swing foot
            from the stance foot, meters; prevents foot crossing.
        step_duration: wall time per action (step or stand), seconds.
        settle_duration: extra time charged once at trial end, seconds.
        k_lin: energy per squared meter of foot travel, J/m^2.
        k_ang: energy per squared radian of foot rotation, J/rad^2.
        e_base: fixed energy cost per placement, J.
    """

    max_step_len: float = 0.4
    max_step_yaw: float = 0.5
    stance_width: float = 0.3
    lateral_margin: float = 0.05
    step_duration: float = 0.4
    settle_duration: float = 0.5
    k_lin: float = 1.0
    k_ang: float = 0.5
    e_base: float = 0.2

    def __post_init__(self):
        for name in (
            "max_step_len",
            "max_step_yaw",
            "stance_width",
            "lateral_margin",
            "step_duration",
            "settle_duration",
            "k_lin",
            "k_ang",
            "e_base",
        ):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if self.lateral_margin >= self.stance_width:
            raise ValueError("lateral_margin must be smaller than stance_width")


@dataclass(frozen=True)
class FootstepAction:
    """Displacement of the swing foot from its nominal mirrored slot.

    dx, dy are meters in the stance foot frame, dyaw radians relative
    to the stance foot heading. A stand action requests no placement.
    """

    dx: float = 0.0
    dy: float = 0.0
    dyaw: float = 0.0
    is_stand: bool = False

    @staticmethod
    def stand() -> "FootstepAction":
        return FootstepAction(0.0, 0.0, 0.0, is_stand=True)


@dataclass(frozen=True)
class StepRecord:
    """One executed placement, as it appears in the trace export."""

    time_s: float
    foot: str  # "L" or "R"
    pose: Pose2
    energy_j: float


@dataclass(frozen=True)
class StepperState:
    """Full simulator state; immutable, so rollouts can share prefixes."""

    left_foot: Pose2
    right_foot: Pose2
    base: Pose2
    swing_is_left: bool
    clock: float
    energy: float
    step_log: Tuple[StepRecord, ...]
    stand_streak: int

    @property
    def footstep_count(self) -> int:
        return len(self.step_log)


def _base_from_feet(left: Pose2, right: Pose2) -> Pose2:
    # Circular mean keeps the heading exact under y-reflection.
    heading = math.atan2(
        math.sin(left.theta) + math.sin(right.theta),
        math.cos(left.theta) + math.cos(right.theta),
    )
    return Pose2(0.5 * (left.x + right.x), 0.5 * (left.y + right.y), heading)


def nominal_feet(base: Pose2, cfg: StepperConfig) -> Tuple[Pose2, Pose2]:
    """Left and right foot poses of the nominal stance about a base pose."""
    half = 0.5 * cfg.stance_width
    return base.offset(0.0, half), base.offset(0.0, -half)


def reset(
    start: Pose2,
    perturb_scale: float,
    rng: np.random.Generator,
    cfg: StepperConfig = StepperConfig(),
    swing_is_left: bool = True,
) -> StepperState:
    """Initial state: nominal stance about `start`, optionally perturbed.

    Each foot coordinate (x, y, theta) is independently offset by a
    uniform draw in [-perturb_scale, +perturb_scale]; the same scalar
    is used for meters and radians. Six draws are consumed in a fixed
    order (left x, y, theta, then right), so a seeded generator gives
    a reproducible state.
    """
    if perturb_scale < 0.0:
        raise ValueError("perturb_scale must be >= 0")
    left, right = nominal_feet(start, cfg)
    if perturb_scale > 0.0:
        d = rng.uniform(-perturb_scale, perturb_scale, size=6)
        left = Pose2(left.x + d[0], left.y + d[1], left.theta + d[2])
        right = Pose2(right.x + d[3], right.y + d[4], right.theta + d[5])
    return StepperState(
        left_foot=left,
        right_foot=right,
        base=_base_from_feet(left, right),
        swing_is_left=swing_is_left,
        clock=0.0,
        energy=0.0,
        step_log=(),
        stand_streak=0,
    )


def clamp_action(
    action: FootstepAction, swing_is_left: bool, cfg: StepperConfig
) -> FootstepAction:
    """Project an action onto the reachable set.

    Lateral margin first (shift dy away from the stance foot), then the
    radial length clamp; scaling toward zero can only increase the
    margin, so both constraints hold afterwards. Yaw is clipped
    independently.
    """
    if action.is_stand:
        return FootstepAction.stand()
    s = 1.0 if swing_is_left else -1.0
    dx, dy = action.dx, action.dy
    # Signed lateral offset of the swing foot from the stance foot.
    if s * (s * cfg.stance_width + dy) < cfg.lateral_margin:
        dy = s * (cfg.lateral_margin - cfg.stance_width)
    norm = math.hypot(dx, dy)
    if norm > cfg.max_step_len:
        f = cfg.max_step_len / norm
        dx *= f
        dy *= f
    dyaw = min(max(action.dyaw, -cfg.max_step_yaw), cfg.max_step_yaw)
    return FootstepAction(dx, dy, dyaw, is_stand=False)


def step(state: StepperState, action: FootstepAction, cfg: StepperConfig) -> StepperState:
    """Advance one control tick.

    A stand action only advances the clock. A placement clamps the
    action, moves the swing foot to the stance-relative target, charges
    energy quadratic in the foot's world displacement plus a fixed base
    cost, flips the swing side, and appends to the step log.
    """
    if not (
        math.isfinite(action.dx)
        and math.isfinite(action.dy)
        and math.isfinite(action.dyaw)
    ):
        raise ValueError("non-finite footstep action")
    clock = state.clock + cfg.step_duration
    if action.is_stand:
        return replace(state, clock=clock, stand_streak=state.stand_streak + 1)

    a = clamp_action(action, state.swing_is_left, cfg)
    s = 1.0 if state.swing_is_left else -1.0
    stance = state.right_foot if state.swing_is_left else state.left_foot
    old = state.left_foot if state.swing_is_left else state.right_foot
    placed = stance.offset(a.dx, s * cfg.stance_width + a.dy, a.dyaw)

    dlin2 = (placed.x - old.x) ** 2 + (placed.y - old.y) ** 2
    dang = wrap_angle(placed.theta - old.theta)
    step_energy = cfg.k_lin * dlin2 + cfg.k_ang * dang * dang + cfg.e_base

    if state.swing_is_left:
        left, right = placed, state.right_foot
        foot_id = "L"
    else:
        left, right = state.left_foot, placed
        foot_id = "R"
    record = StepRecord(time_s=clock, foot=foot_id, pose=placed, energy_j=step_energy)
    return StepperState(
        left_foot=left,
        right_foot=right,
        base=_base_from_feet(left, right),
        swing_is_left=not state.swing_is_left,
        clock=clock,
        energy=state.energy + step_energy,
        step_log=state.step_log + (record,),
        stand_streak=0,
    )


def ready_to_settle(
    state: StepperState,
    goal: Pose2,
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
    cfg: StepperConfig = StepperConfig(),
) -> bool:
    """Pose conditions of a settled stand, ignoring the stand streak.

    True when the base is within tolerance of the goal and both feet
    are within the same tolerances of their nominal stance slots.
    Controllers use this to decide when standing will terminate the
    trial.
    """
    if position_error(state.base, goal) >= pos_tol:
        return False
    if orientation_error(state.base.theta, goal.theta) >= ang_tol:
        return False
    nominal_left, nominal_right = nominal_feet(state.base, cfg)
    for foot, slot in ((state.left_foot, nominal_left), (state.right_foot, nominal_right)):
        if position_error(foot, slot) >= pos_tol:
            return False
        if orientation_error(foot.theta, state.base.theta) >= ang_tol:
            return False
    return True


def is_settled(
    state: StepperState,
    goal: Pose2,
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
    cfg: StepperConfig = StepperConfig(),
) -> bool:
    """Settled means at the goal, feet in stance, after two stand ticks.

    The two consecutive stand actions are the footstep-level analogue
    of the near-zero velocity condition in a dynamic simulator.
    """
    return state.stand_streak >= 2 and ready_to_settle(state, goal, pos_tol, ang_tol, cfg)


def mirror_pose(p: Pose2) -> Pose2:
    """Reflect a pose across the x axis (negate y and heading)."""
    return Pose2(p.x, -p.y, -p.theta)


def mirror_action(a: FootstepAction) -> FootstepAction:
    """Reflect an action across the x axis (negate dy and dyaw)."""
    if a.is_stand:
        return FootstepAction.stand()
    return FootstepAction(a.dx, -a.dy, -a.dyaw)


def mirror_state(state: StepperState) -> StepperState:
    """Reflect a full state across the x axis; foot roles swap."""
    return StepperState(
        left_foot=mirror_pose(state.right_foot),
        right_foot=mirror_pose(state.left_foot),
        base=mirror_pose(state.base),
        swing_is_left=not state.swing_is_left,
        clock=state.clock,
        energy=state.energy,
        step_log=tuple(
            StepRecord(
                time_s=r.time_s,
                foot="L" if r.foot == "R" else "R",
                pose=mirror_pose(r.pose),
                energy_j=r.energy_j,
            )
            for r in state.step_log
        ),
        stand_streak=state.stand_streak,
    )


def write_trace_csv(records: Iterable[StepRecord], out: IO[str]) -> None:
    """Write the footstep trace in the interchange CSV schema."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for i, r in enumerate(records):
        w.writerow(
            [i, repr(r.time_s), r.foot, repr(r.pose.x), repr(r.pose.y), repr(r.pose.theta), repr(r.energy_j)]
        )
