"""Feedforward policy over the footstep state, with a flat-file format.

The network is deliberately small: 6 inputs, two tanh hidden layers of
32 units, 3 tanh outputs scaled to the action bounds. The same
architecture drives either footstep actions directly ("goto" mode) or
body velocity commands for a fixed gait layer ("hier" mode).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .geometry import Pose2, pose_delta
from .stepper import StepperState

LAYER_SIZES = (6, 32, 32, 3)

# Output magnitudes below this (in scaled action units) request a stand.
STAND_THRESHOLD = 0.05

# Observation time feature is clock divided by this, clipped to [0, 1];
# equals the training horizon (60 steps at 0.4 s).
TIME_SCALE = 24.0

# Output scaling per mode: footstep bounds for goto, velocity limits
# (bounds divided by the step duration) for hier.
ACTION_SCALES = {
    "goto": (0.4, 0.4, 0.5),
    "hier": (1.0, 1.0, 1.25),
}


def param_count(layer_sizes: Tuple[int, ...] = LAYER_SIZES) -> int:
    """Number of weights and biases in the fully connected stack."""
    return sum(
        n_out * n_in + n_out for n_in, n_out in zip(layer_sizes, layer_sizes[1:])
    )


PARAM_COUNT = param_count()


@dataclass(frozen=True)
class PolicyParams:
    """A trained (or candidate) policy: mode, flat weights, metadata."""

    mode: str
    params: np.ndarray
    action_scale: Tuple[float, float, float] = field(default=None)  # type: ignore[assignment]
    seed: int = 0
    layer_sizes: Tuple[int, ...] = LAYER_SIZES

    def __post_init__(self):
        if self.mode not in ACTION_SCALES:
            raise ValueError(f"unknown policy mode {self.mode!r}")
        arr = np.ascontiguousarray(self.params, dtype=np.float64)
        expected = param_count(self.layer_sizes)
        if arr.shape != (expected,):
            raise ValueError(
                f"expected {expected} parameters for layers {self.layer_sizes}, "
                f"got shape {arr.shape}"
            )
        object.__setattr__(self, "params", arr)
        if self.action_scale is None:
            object.__setattr__(self, "action_scale", ACTION_SCALES[self.mode])
        object.__setattr__(self, "action_scale", tuple(float(v) for v in self.action_scale))
        object.__setattr__(self, "layer_sizes", tuple(int(v) for v in self.layer_sizes))


class PolicyNet:
    """Unpacked weight views over a flat parameter vector."""

    def __init__(self, params: np.ndarray, layer_sizes: Tuple[int, ...] = LAYER_SIZES):
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (param_count(layer_sizes),):
            raise ValueError(
                f"parameter vector has {params.size} entries, expected "
                f"{param_count(layer_sizes)}"
            )
        self.layers = []
        i = 0
        for n_in, n_out in zip(layer_sizes, layer_sizes[1:]):
            w = params[i : i + n_out * n_in].reshape(n_out, n_in)
            i += n_out * n_in
            b = params[i : i + n_out]
            i += n_out
            self.layers.append((w, b))

    def forward(self, obs: np.ndarray) -> np.ndarray:
        """All-tanh forward pass; output components lie in (-1, 1)."""
        h = obs
        for w, b in self.layers:
            h = np.tanh(w @ h + b)
        return h


def observation(state: StepperState, goal: Pose2) -> np.ndarray:
    """Policy input: goal delta in the body frame plus gait context.

    Components: dx_body, dy_body, sin(dtheta), cos(dtheta), swing side
    as -1/+1, and the trial clock normalized by TIME_SCALE.
    """
    dx, dy, dth = pose_delta(state.base, goal)
    return np.array(
        [
            dx,
            dy,
            math.sin(dth),
            math.cos(dth),
            1.0 if state.swing_is_left else -1.0,
            min(state.clock / TIME_SCALE, 1.0),
        ]
    )


def scaled_output(net: PolicyNet, obs: np.ndarray, action_scale) -> np.ndarray:
    """Network output scaled to action bounds."""
    return net.forward(obs) * np.asarray(action_scale)


def wants_stand(scaled: np.ndarray) -> bool:
    """Stand request: commanded magnitude below the trigger threshold."""
    return float(np.dot(scaled, scaled)) < STAND_THRESHOLD * STAND_THRESHOLD


def save_policy(policy: PolicyParams, path: Union[str, Path]) -> None:
    """Write a policy file: one JSON header line, then raw float64 bytes.

    The byte layout is fixed little-endian, so files are identical
    across platforms and reruns.
    """
    header = {
        "mode": policy.mode,
        "layer_sizes": list(policy.layer_sizes),
        "action_scale": list(policy.action_scale),
        "seed": policy.seed,
    }
    blob = json.dumps(header, sort_keys=True).encode() + b"\n"
    blob += policy.params.astype("<f8").tobytes()
    Path(path).write_bytes(blob)


def load_policy(path: Union[str, Path]) -> PolicyParams:
    """Read a policy file written by save_policy."""
    blob = Path(path).read_bytes()
    nl = blob.index(b"\n")
    header = json.loads(blob[:nl].decode())
    params = np.frombuffer(blob[nl + 1 :], dtype="<f8").astype(np.float64)
    return PolicyParams(
        mode=header["mode"],
        params=params,
        action_scale=tuple(header["action_scale"]),
        seed=int(header["seed"]),
        layer_sizes=tuple(header["layer_sizes"]),
    )
