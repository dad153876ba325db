"""Baseline controllers mapping (state, goal) to footstep actions.

Four strategies share one interface:

* fsm       -- face the target, walk a trapezoidal step-length profile,
               then orient to the final heading.
* agility3  -- same phase order with a fixed nominal step length.
* agility2  -- orient to the final heading first, then crab-walk to the
               position while holding heading.
* hier      -- learned velocity commands tracked by the gait generator.

A trained "goto" policy emits footstep actions directly and needs no
phase state. The deterministic controllers finish every trial with the
same two-step settle maneuver: place the swing foot on its exact goal
stance slot, square up the other foot, then stand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

from .geometry import Pose2, position_error, wrap_angle
from .policy import PolicyNet, PolicyParams, observation, scaled_output, wants_stand
from .stepper import (
    DEFAULT_ANG_TOL,
    DEFAULT_POS_TOL,
    FootstepAction,
    StepperConfig,
    StepperState,
    clamp_action,
    ready_to_settle,
)

# Hand-tuned thresholds of the phase machines (the reference systems
# publish no values): heading alignment that ends an orient phase, the
# position error below which a translate phase is skipped entirely, and
# the trapezoid ramp length in steps.
HEADING_TOL = 0.05
SKIP_TRANSLATE_TOL = 0.1
RAMP_STEPS = 3

CONTROLLER_NAMES = ("fsm", "agility2", "agility3", "hier", "goto")

# Per-controller phase chains; a trial's recorded phase indices are
# nondecreasing along its controller's chain.
PHASE_CHAINS = {
    "fsm": ("orient_bearing", "translate", "orient_final", "settle"),
    "agility3": ("orient_bearing", "translate", "orient_final", "settle"),
    "agility2": ("orient_final", "translate", "settle"),
}


@dataclass(frozen=True)
class ControllerPhase:
    """Caller-owned phase of a deterministic controller within a trial."""

    stage: str
    forward_steps: int = 0  # translate-phase step counter (ramp input)


@dataclass(frozen=True)
class VelocityCommand:
    """Body-frame velocity request: m/s forward/left, rad/s yaw."""

    vx: float
    vy: float
    omega: float


def gait_generator(cmd: VelocityCommand, cfg: StepperConfig) -> FootstepAction:
    """Convert a velocity command into one footstep.

    Displacements are velocity times the step duration; the simulator's
    reachability clamps apply on execution. An exactly zero command is
    a stand request.
    """
    if not all(math.isfinite(v) for v in (cmd.vx, cmd.vy, cmd.omega)):
        raise ValueError("non-finite velocity command")
    if cmd.vx == 0.0 and cmd.vy == 0.0 and cmd.omega == 0.0:
        return FootstepAction.stand()
    return FootstepAction(
        cmd.vx * cfg.step_duration,
        cmd.vy * cfg.step_duration,
        cmd.omega * cfg.step_duration,
    )


def _stance_foot(state: StepperState) -> Pose2:
    return state.right_foot if state.swing_is_left else state.left_foot


def _swing_sign(state: StepperState) -> float:
    return 1.0 if state.swing_is_left else -1.0


def _pose_action(state: StepperState, target: Pose2, cfg: StepperConfig) -> FootstepAction:
    """Unclamped action that would place the swing foot at `target`."""
    stance = _stance_foot(state)
    c, s = math.cos(stance.theta), math.sin(stance.theta)
    wx, wy = target.x - stance.x, target.y - stance.y
    return FootstepAction(
        c * wx + s * wy,
        -s * wx + c * wy - _swing_sign(state) * cfg.stance_width,
        wrap_angle(target.theta - stance.theta),
    )


def _slot_action(state: StepperState, base: Pose2, cfg: StepperConfig) -> FootstepAction:
    """Action placing the swing foot on its stance slot for `base`."""
    return _pose_action(
        state, base.offset(0.0, _swing_sign(state) * 0.5 * cfg.stance_width), cfg
    )


def _turn_action(
    state: StepperState, increment: float, anchor: Pose2, cfg: StepperConfig
) -> FootstepAction:
    """Turn step: advance the stance-relative heading, hold `anchor`."""
    stance = _stance_foot(state)
    return _slot_action(
        state, Pose2(anchor.x, anchor.y, stance.theta + increment), cfg
    )


def finish_action(
    state: StepperState, goal: Pose2, cfg: StepperConfig
) -> Optional[FootstepAction]:
    """Settle maneuver step, if reachable without clamping.

    Places the swing foot on its exact stance slot for the goal pose.
    Issued twice in a row it leaves both feet squared on the goal, so a
    feasible finish guarantees an exact settle two steps later.
    """
    sign = _swing_sign(state)
    a = _pose_action(
        state, goal.offset(0.0, sign * 0.5 * cfg.stance_width), cfg
    )
    eps = 1e-12
    if math.hypot(a.dx, a.dy) > cfg.max_step_len + eps:
        return None
    if abs(a.dyaw) > cfg.max_step_yaw + eps:
        return None
    if sign * (sign * cfg.stance_width + a.dy) < cfg.lateral_margin - eps:
        return None
    return a


def _bearing_to(base: Pose2, goal: Pose2) -> float:
    return math.atan2(goal.y - base.y, goal.x - base.x)


def _toward_goal_step(
    state: StepperState, goal: Pose2, length: float, cfg: StepperConfig
) -> FootstepAction:
    """Heading-preserving step of the given length toward the goal."""
    stance = _stance_foot(state)
    c, s = math.cos(stance.theta), math.sin(stance.theta)
    wx, wy = goal.x - state.base.x, goal.y - state.base.y
    bx, by = c * wx + s * wy, -s * wx + c * wy
    norm = math.hypot(bx, by)
    if norm == 0.0:
        return FootstepAction(0.0, 0.0, 0.0)
    f = length / norm
    return FootstepAction(bx * f, by * f, 0.0)


def _settle_or_none(
    state: StepperState,
    goal: Pose2,
    phase: ControllerPhase,
    cfg: StepperConfig,
    pos_tol: float,
    ang_tol: float,
    finish_ok: bool,
) -> Optional[Tuple[FootstepAction, ControllerPhase]]:
    """Stand when settled, run the finish maneuver when permitted.

    finish_ok gates the settle maneuver on the controller's own phase
    prerequisites, so a finish never shortcuts the phase structure that
    defines the baseline.
    """
    if ready_to_settle(state, goal, pos_tol, ang_tol, cfg):
        return FootstepAction.stand(), replace(phase, stage="settle")
    if finish_ok:
        fin = finish_action(state, goal, cfg)
        if fin is not None:
            return fin, replace(phase, stage="settle")
    return None


def _fsm_like(
    state: StepperState,
    goal: Pose2,
    phase: Optional[ControllerPhase],
    cfg: StepperConfig,
    trapezoid: bool,
    pos_tol: float,
    ang_tol: float,
) -> Tuple[FootstepAction, ControllerPhase]:
    """Orient to the bearing, walk straight at it, orient to the goal."""
    if phase is None:
        phase = ControllerPhase(stage="orient_bearing")
    done = _settle_or_none(
        state,
        goal,
        phase,
        cfg,
        pos_tol,
        ang_tol,
        finish_ok=phase.stage in ("orient_final", "settle"),
    )
    if done is not None:
        return done

    stance = _stance_foot(state)
    stage = phase.stage

    if stage == "orient_bearing":
        if position_error(state.base, goal) < SKIP_TRANSLATE_TOL:
            stage = "orient_final"  # nothing worth walking to
        else:
            beta = wrap_angle(_bearing_to(state.base, goal) - stance.theta)
            if abs(beta) < HEADING_TOL:
                stage = "translate"
            else:
                inc = min(max(beta, -cfg.max_step_yaw), cfg.max_step_yaw)
                return (
                    _turn_action(state, inc, state.base, cfg),
                    replace(phase, stage=stage),
                )

    if stage == "translate":
        err = position_error(state.base, goal)
        if err < pos_tol:
            stage = "orient_final"
        else:
            if trapezoid:
                ramp_up = cfg.max_step_len * (phase.forward_steps + 1) / RAMP_STEPS
                ramp_down = max(err / RAMP_STEPS, cfg.max_step_len / RAMP_STEPS)
                length = min(ramp_up, cfg.max_step_len, ramp_down, err)
            else:
                length = min(cfg.max_step_len, err)
            return (
                _toward_goal_step(state, goal, length, cfg),
                ControllerPhase(stage=stage, forward_steps=phase.forward_steps + 1),
            )

    beta = wrap_angle(goal.theta - stance.theta)
    if abs(beta) < HEADING_TOL:
        # Aligned but the finish is not yet reachable: close the
        # remaining position gap while holding the heading.
        return (
            _slot_action(state, Pose2(goal.x, goal.y, stance.theta), cfg),
            replace(phase, stage="orient_final"),
        )
    inc = min(max(beta, -cfg.max_step_yaw), cfg.max_step_yaw)
    anchor = goal if stage == "orient_final" else state.base
    return _turn_action(state, inc, anchor, cfg), replace(phase, stage="orient_final")


def fsm_controller(
    state: StepperState,
    goal: Pose2,
    phase: Optional[ControllerPhase] = None,
    cfg: StepperConfig = StepperConfig(),
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
) -> Tuple[FootstepAction, ControllerPhase]:
    """Face the target, walk a trapezoidal profile, orient, settle."""
    return _fsm_like(state, goal, phase, cfg, True, pos_tol, ang_tol)


def agility3_controller(
    state: StepperState,
    goal: Pose2,
    phase: Optional[ControllerPhase] = None,
    cfg: StepperConfig = StepperConfig(),
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
) -> Tuple[FootstepAction, ControllerPhase]:
    """Same phase order as fsm with a fixed nominal step length."""
    return _fsm_like(state, goal, phase, cfg, False, pos_tol, ang_tol)


def agility2_controller(
    state: StepperState,
    goal: Pose2,
    phase: Optional[ControllerPhase] = None,
    cfg: StepperConfig = StepperConfig(),
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
) -> Tuple[FootstepAction, ControllerPhase]:
    """Orient to the goal heading first, then crab-walk to the position.

    Holding the final heading throughout lets it finish goals behind or
    beside the robot without ever turning mid-translation.
    """
    if phase is None:
        phase = ControllerPhase(stage="orient_final")
    stance = _stance_foot(state)
    aligned = abs(wrap_angle(goal.theta - stance.theta)) < HEADING_TOL
    done = _settle_or_none(
        state, goal, phase, cfg, pos_tol, ang_tol, finish_ok=aligned
    )
    if done is not None:
        return done

    if phase.stage == "orient_final":
        beta = wrap_angle(goal.theta - stance.theta)
        if abs(beta) >= HEADING_TOL:
            inc = min(max(beta, -cfg.max_step_yaw), cfg.max_step_yaw)
            return _turn_action(state, inc, state.base, cfg), phase
        phase = replace(phase, stage="translate")

    # Omnidirectional steps, heading held; the finish maneuver above is
    # the only exit.
    length = min(cfg.max_step_len, position_error(state.base, goal))
    return (
        _toward_goal_step(state, goal, length, cfg),
        ControllerPhase(stage="translate", forward_steps=phase.forward_steps + 1),
    )


def goto_controller(
    policy: PolicyParams, state: StepperState, goal: Pose2
) -> FootstepAction:
    """Trained end-to-end policy: scaled network output as a footstep."""
    if policy.mode != "goto":
        raise ValueError(f"goto controller needs a goto policy, got {policy.mode!r}")
    net = PolicyNet(policy.params, policy.layer_sizes)
    out = scaled_output(net, observation(state, goal), policy.action_scale)
    if wants_stand(out):
        return FootstepAction.stand()
    return FootstepAction(float(out[0]), float(out[1]), float(out[2]))


def hierarchical_controller(
    policy: PolicyParams,
    state: StepperState,
    goal: Pose2,
    cfg: StepperConfig = StepperConfig(),
) -> FootstepAction:
    """Learned velocity commands tracked by the gait generator."""
    if policy.mode != "hier":
        raise ValueError(f"hier controller needs a hier policy, got {policy.mode!r}")
    net = PolicyNet(policy.params, policy.layer_sizes)
    out = scaled_output(net, observation(state, goal), policy.action_scale)
    if wants_stand(out):
        return FootstepAction.stand()
    return gait_generator(
        VelocityCommand(float(out[0]), float(out[1]), float(out[2])), cfg
    )


ControllerFn = Callable[
    [StepperState, Pose2, Optional[ControllerPhase]],
    Tuple[FootstepAction, Optional[ControllerPhase]],
]


def make_controller(
    name: str,
    cfg: StepperConfig = StepperConfig(),
    policy: Optional[PolicyParams] = None,
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
) -> ControllerFn:
    """Uniform (state, goal, phase) -> (action, phase) interface.

    Learned controllers ignore the phase argument and return it
    unchanged; they keep no state between calls.
    """
    if name in ("fsm", "agility2", "agility3"):
        fn = {
            "fsm": fsm_controller,
            "agility2": agility2_controller,
            "agility3": agility3_controller,
        }[name]

        def stepper_fn(state, goal, phase):
            return fn(state, goal, phase, cfg, pos_tol, ang_tol)

        return stepper_fn
    if name == "goto":
        if policy is None:
            raise ValueError("goto controller requires a trained policy")
        return lambda state, goal, phase: (goto_controller(policy, state, goal), phase)
    if name == "hier":
        if policy is None:
            raise ValueError("hier controller requires a trained policy")
        return lambda state, goal, phase: (
            hierarchical_controller(policy, state, goal, cfg),
            phase,
        )
    raise ValueError(f"unknown controller {name!r}; expected one of {CONTROLLER_NAMES}")
