"""Training rewards built on the constellation distance.

The main reward is a negative exponential of the alignment distance,
which factors into a product of positional and rotational terms. The
additive form used by earlier velocity-tracking systems is kept for
ablation. A small regularization term penalizes action chatter and
step energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .geometry import DistanceBreakdown


@dataclass(frozen=True)
class RewardConfig:
    """Weights for the reward terms.

    Attributes:
        w_c: constellation distance decay, 1/m^2.
        a_p, a_o: additive-reward mixing weights (ablation arm).
        w_p: additive positional decay, 1/m^2.
        w_o: additive rotational decay, 1/rad^2.
        k_action: action-smoothness penalty weight.
        k_energy: energy penalty weight, 1/J.
    """

    w_c: float = 0.2
    a_p: float = 0.5
    a_o: float = 0.5
    w_p: float = 0.5
    w_o: float = 0.5
    k_action: float = 0.05
    k_energy: float = 0.01

    def __post_init__(self):
        for name in ("w_c", "a_p", "a_o", "w_p", "w_o", "k_action", "k_energy"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def constellation_reward(d: DistanceBreakdown, cfg: RewardConfig) -> float:
    """exp(-w_c * total distance), in (0, 1] and 1.0 exactly at the goal.

    Because the distance decomposes additively, this equals the product
    exp(-w_c * positional) * exp(-w_c * rotational) up to roundoff; the
    coupling between the two errors is multiplicative, not a tuned sum.
    """
    return math.exp(-cfg.w_c * d.total)


def additive_reward(d_p: float, d_o: float, cfg: RewardConfig) -> float:
    """Independently weighted position/orientation reward (ablation).

    Args:
        d_p: squared centroid distance, m^2.
        d_o: squared heading error, rad^2.
    """
    if cfg.a_p + cfg.a_o <= 0.0:
        raise ValueError("additive reward requires a_p + a_o > 0")
    return cfg.a_p * math.exp(-cfg.w_p * d_p) + cfg.a_o * math.exp(-cfg.w_o * d_o)


def regularization_reward(
    prev_action: Sequence[float],
    action: Sequence[float],
    step_energy: float,
    cfg: RewardConfig,
) -> float:
    """Non-positive penalty on action change and energy spent this step."""
    if len(prev_action) != len(action):
        raise ValueError(
            f"action dimension mismatch: {len(prev_action)} vs {len(action)}"
        )
    sq = 0.0
    for p, a in zip(prev_action, action):
        sq += (a - p) * (a - p)
    return -cfg.k_action * sq - cfg.k_energy * step_energy


def total_reward(
    d: DistanceBreakdown,
    prev_action: Sequence[float],
    action: Sequence[float],
    step_energy: float,
    cfg: RewardConfig,
) -> float:
    """Constellation reward plus regularization; at most 1.0 per step."""
    return constellation_reward(d, cfg) + regularization_reward(
        prev_action, action, step_energy, cfg
    )
