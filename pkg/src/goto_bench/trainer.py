"""Cross-entropy training of the footstep and velocity policies.

The policy search is a plain diagonal-Gaussian CEM: sample a
population around the mean, score each candidate on a task set shared
across the population (common random numbers), refit mean and std to
the elites, repeat. Rollouts are exact and noise-free, so a master
seed pins the entire run down to the final parameter vector.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Callable, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Constellation, Pose2, constellation_distance, make_circle_constellation
from .policy import (
    ACTION_SCALES,
    PARAM_COUNT,
    PolicyNet,
    PolicyParams,
    observation,
    scaled_output,
    wants_stand,
)
from .reward import RewardConfig, total_reward
from .stepper import FootstepAction, StepperConfig, StepperState, reset, step
from .controllers import VelocityCommand, gait_generator

# Goal-category mix: stand, straight, lateral, turn, combined.
CATEGORIES = ("stand", "straight", "lateral", "turn", "combined")
CATEGORY_PROBS = (0.1, 0.2, 0.2, 0.2, 0.3)

# Command delta ranges, meters and radians.
DELTA_X_RANGE = (-2.0, 2.0)
DELTA_Y_RANGE = (-1.5, 1.5)

# Goal resampling interval in steps (4-8 s at 0.4 s per step).
RESAMPLE_GAP = (10, 20)

TRAIN_LOG_HEADER = ("iteration", "mean_return", "elite_mean", "best_return", "param_std")


@dataclass(frozen=True)
class TaskSpec:
    """One training episode: start pose, goal, and resample schedule.

    Each resample entry is (step_index, category, delta); at that step
    the goal is reissued as the current base pose composed with the
    delta, mirroring how fresh commands arrive mid-motion.
    """

    start: Pose2
    goal: Pose2
    category: str
    resamples: Tuple[Tuple[int, str, Tuple[float, float, float]], ...] = ()

    @property
    def resample_steps(self) -> Tuple[int, ...]:
        return tuple(r[0] for r in self.resamples)


@dataclass(frozen=True)
class CemConfig:
    """Cross-entropy search settings."""

    population: int = 64
    elites: int = 8
    iterations: int = 300
    init_std: float = 0.5
    std_floor: float = 0.02
    tasks_per_candidate: int = 8
    horizon: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.population <= 0 or self.elites <= 0 or self.iterations <= 0:
            raise ValueError("population, elites, and iterations must be positive")
        if self.elites >= self.population:
            raise ValueError("elites must be smaller than the population")
        if self.tasks_per_candidate <= 0 or self.horizon <= 0:
            raise ValueError("tasks_per_candidate and horizon must be positive")
        if self.init_std <= 0 or self.std_floor <= 0:
            raise ValueError("init_std and std_floor must be positive")


def _sample_delta(rng: np.random.Generator, category: str) -> Tuple[float, float, float]:
    dx = float(rng.uniform(*DELTA_X_RANGE))
    dy = float(rng.uniform(*DELTA_Y_RANGE))
    dth = float(rng.uniform(-math.pi, math.pi))
    if category == "stand":
        return (0.0, 0.0, 0.0)
    if category == "straight":
        return (dx, 0.0, 0.0)
    if category == "lateral":
        return (0.0, dy, 0.0)
    if category == "turn":
        return (0.0, 0.0, dth)
    return (dx, dy, dth)


def sample_task(rng: np.random.Generator, horizon: int = 60) -> TaskSpec:
    """Draw a goal-conditioned episode from the command distribution.

    The category mix is (0.1, 0.2, 0.2, 0.2, 0.3) over stand, straight,
    lateral, turn, and combined commands; resample points are spaced
    uniformly in [10, 20] steps.
    """
    category = CATEGORIES[int(rng.choice(len(CATEGORIES), p=CATEGORY_PROBS))]
    start = Pose2(
        float(rng.uniform(-1.0, 1.0)),
        float(rng.uniform(-1.0, 1.0)),
        float(rng.uniform(-math.pi, math.pi)),
    )
    goal = start.offset(*_sample_delta(rng, category))
    resamples = []
    t = int(rng.integers(RESAMPLE_GAP[0], RESAMPLE_GAP[1] + 1))
    while t < horizon:
        cat = CATEGORIES[int(rng.choice(len(CATEGORIES), p=CATEGORY_PROBS))]
        resamples.append((t, cat, _sample_delta(rng, cat)))
        t += int(rng.integers(RESAMPLE_GAP[0], RESAMPLE_GAP[1] + 1))
    return TaskSpec(start=start, goal=goal, category=category, resamples=tuple(resamples))


def mirror_task(task: TaskSpec) -> TaskSpec:
    """Reflect a task across the x axis; an exact involution."""

    def flip(p: Pose2) -> Pose2:
        return Pose2(p.x, -p.y, -p.theta)

    return TaskSpec(
        start=flip(task.start),
        goal=flip(task.goal),
        category=task.category,
        resamples=tuple(
            (t, cat, (d[0], -d[1], -d[2])) for t, cat, d in task.resamples
        ),
    )


def rollout(
    params: np.ndarray,
    mode: str,
    tasks: Sequence[TaskSpec],
    horizon: int = 60,
    sim_cfg: StepperConfig = StepperConfig(),
    reward_cfg: RewardConfig = RewardConfig(),
    constellation: Optional[Constellation] = None,
    keep_trajectories: bool = False,
) -> Tuple[float, List[List[StepperState]]]:
    """Mean undiscounted return of a parameter vector over tasks.

    Each step is rewarded against the goal active at that step, so a
    mid-episode resample immediately redirects the reward signal. The
    return of one task never exceeds the horizon (per-step reward is at
    most 1). No randomness is consumed: identical inputs give
    bit-identical returns.
    """
    if constellation is None:
        constellation = make_circle_constellation(1.0, 8)
    net = PolicyNet(params)
    scale = np.asarray(ACTION_SCALES[mode])
    dummy_rng = np.random.default_rng(0)
    trajectories: List[List[StepperState]] = []
    total = 0.0
    for task in tasks:
        state = reset(task.start, 0.0, dummy_rng, sim_cfg)
        goal = task.goal
        resamples = {t: (cat, d) for t, cat, d in task.resamples}
        prev_cmd = (0.0, 0.0, 0.0)
        ret = 0.0
        states = [state] if keep_trajectories else []
        for k in range(horizon):
            if k in resamples:
                goal = state.base.offset(*resamples[k][1])
            out = scaled_output(net, observation(state, goal), scale)
            cmd = (float(out[0]), float(out[1]), float(out[2]))
            if wants_stand(out):
                action = FootstepAction.stand()
            elif mode == "goto":
                action = FootstepAction(*cmd)
            else:
                action = gait_generator(VelocityCommand(*cmd), sim_cfg)
            new_state = step(state, action, sim_cfg)
            d = constellation_distance(new_state.base, goal, constellation)
            ret += total_reward(
                d, prev_cmd, cmd, new_state.energy - state.energy, reward_cfg
            )
            prev_cmd = cmd
            state = new_state
            if keep_trajectories:
                states.append(state)
        total += ret
        if keep_trajectories:
            trajectories.append(states)
    return total / len(tasks), trajectories


def cem_optimize(
    score_batch: Callable[[int, np.ndarray], np.ndarray],
    dim: int,
    population: int,
    elites: int,
    iterations: int,
    init_std: float,
    std_floor: float,
    rng: np.random.Generator,
    init_mean: Optional[np.ndarray] = None,
    on_iteration: Optional[Callable[[Tuple[int, float, float, float, float]], None]] = None,
) -> Tuple[np.ndarray, List[Tuple[int, float, float, float, float]]]:
    """Generic diagonal-Gaussian cross-entropy maximizer.

    score_batch(iteration, candidates) returns one score per candidate
    row. Elite selection breaks ties by candidate index, so scores may
    be computed in any order. Returns the final mean and the per-
    iteration history (iteration, mean, elite mean, best, sampling std).
    """
    mean = np.zeros(dim) if init_mean is None else np.array(init_mean, dtype=float)
    std = np.full(dim, float(init_std))
    history = []
    for it in range(iterations):
        candidates = mean + std * rng.standard_normal((population, dim))
        scores = np.asarray(score_batch(it, candidates), dtype=float)
        order = sorted(range(population), key=lambda i: (-scores[i], i))
        elite_idx = order[:elites]
        row = (
            it,
            float(scores.mean()),
            float(scores[elite_idx].mean()),
            float(scores.max()),
            float(std.mean()),
        )
        history.append(row)
        if on_iteration is not None:
            on_iteration(row)
        elite = candidates[elite_idx]
        new_mean = elite.mean(axis=0)
        # Inflating the elite variance by the squared mean shift keeps
        # the search alive while the mean is still traveling; once it
        # stops moving the std decays to the floor.
        std = np.maximum(np.sqrt(elite.var(axis=0) + (new_mean - mean) ** 2), std_floor)
        mean = new_mean
    return mean, history


def cem_train(
    cfg: CemConfig,
    mode: str,
    sim_cfg: StepperConfig = StepperConfig(),
    reward_cfg: RewardConfig = RewardConfig(),
    constellation_radius: float = 1.0,
    constellation_count: int = 8,
    log: Optional[IO[str]] = None,
) -> PolicyParams:
    """Train a goto or hier policy against the constellation reward.

    Every iteration draws a fresh shared task set (half of it mirrored
    across the x axis for symmetry), scores the whole population on it,
    and refits the search distribution to the elites. The master seed
    fixes tasks and population draws, so reruns produce identical
    parameters.
    """
    if mode not in ACTION_SCALES:
        raise ValueError(f"unknown policy mode {mode!r}")
    constellation = make_circle_constellation(constellation_radius, constellation_count)
    ss = np.random.SeedSequence(cfg.seed)
    task_seed, pop_seed = ss.spawn(2)
    rng_tasks = np.random.default_rng(task_seed)
    rng_pop = np.random.default_rng(pop_seed)

    def draw_tasks() -> List[TaskSpec]:
        tasks = []
        for _ in range(cfg.tasks_per_candidate):
            task = sample_task(rng_tasks, cfg.horizon)
            if rng_tasks.uniform() < 0.5:
                task = mirror_task(task)
            tasks.append(task)
        return tasks

    def score_batch(_it: int, candidates: np.ndarray) -> np.ndarray:
        tasks = draw_tasks()
        return np.array(
            [
                rollout(c, mode, tasks, cfg.horizon, sim_cfg, reward_cfg, constellation)[0]
                for c in candidates
            ]
        )

    writer = csv.writer(log, lineterminator="\n") if log is not None else None
    if writer is not None:
        writer.writerow(TRAIN_LOG_HEADER)

    def emit(row):
        if writer is not None:
            it, mean_r, elite_r, best_r, std_r = row
            writer.writerow([it, repr(mean_r), repr(elite_r), repr(best_r), repr(std_r)])

    mean, _ = cem_optimize(
        score_batch,
        PARAM_COUNT,
        cfg.population,
        cfg.elites,
        cfg.iterations,
        cfg.init_std,
        cfg.std_floor,
        rng_pop,
        on_iteration=emit,
    )
    return PolicyParams(mode=mode, params=mean, seed=cfg.seed)
