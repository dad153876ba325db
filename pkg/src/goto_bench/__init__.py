"""Desk-scale benchmark suite for short-range SE(2)-target locomotion."""

from .geometry import (
    Constellation,
    DistanceBreakdown,
    Pose2,
    constellation_distance,
    make_circle_constellation,
    orientation_error,
    pose_delta,
    position_error,
    wrap_angle,
)
from .reward import (
    RewardConfig,
    additive_reward,
    constellation_reward,
    regularization_reward,
    total_reward,
)
from .stepper import (
    FootstepAction,
    StepperConfig,
    StepperState,
    is_settled,
    reset,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "Constellation",
    "DistanceBreakdown",
    "FootstepAction",
    "Pose2",
    "RewardConfig",
    "StepperConfig",
    "StepperState",
    "additive_reward",
    "constellation_distance",
    "constellation_reward",
    "is_settled",
    "make_circle_constellation",
    "orientation_error",
    "pose_delta",
    "position_error",
    "regularization_reward",
    "reset",
    "step",
    "total_reward",
    "wrap_angle",
]
