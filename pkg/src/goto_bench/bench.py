"""Benchmark harness: metrics, trial protocol, aggregation, reports.

Five metrics per trial: final position error, final orientation error,
time to target, footstep count, and energy (also normalized per meter
of commanded distance). Controllers are compared on a fixed grid of
SE(2) commands with per-trial start perturbations; every controller
faces the same perturbation for the same (command, trial) pair, so the
comparison is paired by construction.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, IO, List, Optional, Sequence, Tuple

import numpy as np

from .controllers import make_controller
from .geometry import Pose2, orientation_error, position_error
from .policy import PolicyParams
from .stepper import (
    DEFAULT_ANG_TOL,
    DEFAULT_POS_TOL,
    StepperConfig,
    StepperState,
    is_settled,
    reset,
    step,
)

# Failure-by-timeout cap on control ticks per trial.
MAX_TRIAL_TICKS = 200

# Commanded distances below this report no energy-per-meter (the
# normalization is degenerate for turn-in-place commands).
MIN_NORMALIZED_DISTANCE = 0.1

BASELINE_CONTROLLER = "agility2"

METRICS = ("energy_j", "time_s", "footsteps", "pos_error", "ang_error")


def energy_integral(
    torques: Sequence[Sequence[float]],
    velocities: Sequence[Sequence[float]],
    dt: float,
) -> float:
    """Trapezoidal integral of total joint power over time, in joules.

    Args:
        torques: per-sample joint torques, shape (T,) or (T, n), N*m.
        velocities: matching joint angular velocities, rad/s.
        dt: sample spacing, seconds, > 0.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    tau = np.asarray(torques, dtype=float)
    omega = np.asarray(velocities, dtype=float)
    if tau.shape != omega.shape:
        raise ValueError(f"shape mismatch: torques {tau.shape} vs velocities {omega.shape}")
    if tau.size == 0:
        return 0.0
    power = tau * omega
    if power.ndim > 1:
        power = power.sum(axis=1)
    if power.shape[0] < 2:
        return 0.0
    return float(np.trapezoid(power, dx=dt))


@dataclass(frozen=True)
class CommandGrid:
    """The evaluation command set: distances x approach angles x headings."""

    distances: Tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    approach_angles: Tuple[float, ...] = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
    headings: Tuple[float, ...] = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)
    trials_per_command: int = 16
    perturb_scale: float = 0.01

    def __post_init__(self):
        if self.trials_per_command <= 0:
            raise ValueError("trials_per_command must be positive")
        if self.perturb_scale < 0:
            raise ValueError("perturb_scale must be >= 0")

    def commands(self) -> List[Tuple[float, float, float]]:
        """All (distance, approach angle, heading) triples, grid order."""
        return [
            (r, phi, theta)
            for r in self.distances
            for phi in self.approach_angles
            for theta in self.headings
        ]


def command_goal(command: Tuple[float, float, float]) -> Pose2:
    """Goal pose of a command: position r*(cos phi, sin phi), heading theta."""
    r, phi, theta = command
    return Pose2(r * math.cos(phi), r * math.sin(phi), theta)


def trial_seed(master_seed: int, command_index: int, trial_index: int) -> int:
    """Stable per-trial seed, identical for every controller.

    Uses a cryptographic digest rather than Python's salted hash so
    reports are reproducible across processes and runs. The controller
    is deliberately not part of the key: all controllers must face the
    same start perturbations (paired comparison).
    """
    key = f"{master_seed}:{command_index}:{trial_index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


@dataclass(frozen=True)
class TrialRecord:
    """Outcome and metrics of one benchmark trial."""

    controller: str
    command: Tuple[float, float, float]
    command_index: int
    trial_index: int
    seed: int
    success: bool
    pos_error: float
    ang_error: float
    time_s: float
    footsteps: int
    energy_j: float
    energy_per_meter: Optional[float]


def run_trial(
    controller: str,
    command: Tuple[float, float, float],
    seed: int,
    command_index: int = 0,
    trial_index: int = 0,
    cfg: StepperConfig = StepperConfig(),
    policy: Optional[PolicyParams] = None,
    perturb_scale: float = 0.01,
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
    max_ticks: int = MAX_TRIAL_TICKS,
    keep_states: bool = False,
) -> TrialRecord | Tuple[TrialRecord, List[StepperState]]:
    """Run one trial from the origin and measure all five metrics.

    The trial ends when the walker settles at the goal or after
    max_ticks control ticks (a timeout is a failure). Time charges
    every tick, stands included, plus the settle duration.
    """
    goal = command_goal(command)
    ctrl = make_controller(controller, cfg, policy=policy, pos_tol=pos_tol, ang_tol=ang_tol)
    state = reset(Pose2(0.0, 0.0, 0.0), perturb_scale, np.random.default_rng(seed), cfg)
    states = [state]
    phase = None
    success = False
    for _ in range(max_ticks):
        action, phase = ctrl(state, goal, phase)
        state = step(state, action, cfg)
        if keep_states:
            states.append(state)
        if is_settled(state, goal, pos_tol, ang_tol, cfg):
            success = True
            break
    r = command[0]
    record = TrialRecord(
        controller=controller,
        command=command,
        command_index=command_index,
        trial_index=trial_index,
        seed=seed,
        success=success,
        pos_error=position_error(state.base, goal),
        ang_error=orientation_error(state.base.theta, goal.theta),
        time_s=state.clock + cfg.settle_duration,
        footsteps=state.footstep_count,
        energy_j=state.energy,
        energy_per_meter=state.energy / r if r >= MIN_NORMALIZED_DISTANCE else None,
    )
    if keep_states:
        return record, states
    return record


def _run_trial_job(job) -> TrialRecord:
    controller, command, seed, ci, ti, cfg, policy, perturb, pos_tol, ang_tol = job
    return run_trial(
        controller,
        command,
        seed,
        command_index=ci,
        trial_index=ti,
        cfg=cfg,
        policy=policy,
        perturb_scale=perturb,
        pos_tol=pos_tol,
        ang_tol=ang_tol,
    )


def resolve_thread_count(threads: Optional[int] = None) -> int:
    """Worker count: argument, else GOTO_BENCH_THREADS, else 1 (0 = auto)."""
    if threads is None:
        threads = int(os.environ.get("GOTO_BENCH_THREADS", "1"))
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads


def run_benchmark(
    controllers: Sequence[str],
    grid: CommandGrid,
    master_seed: int,
    cfg: StepperConfig = StepperConfig(),
    policies: Optional[Dict[str, PolicyParams]] = None,
    pos_tol: float = DEFAULT_POS_TOL,
    ang_tol: float = DEFAULT_ANG_TOL,
    threads: Optional[int] = None,
) -> List[TrialRecord]:
    """All trials for all controllers on the grid, in a canonical order.

    Trials are independent, so they may run in a process pool; records
    are re-sorted by (controller, command, trial) afterwards, making
    the output identical for any worker count.
    """
    policies = policies or {}
    jobs = []
    for name in controllers:
        policy = policies.get(name)
        if name in ("goto", "hier") and policy is None:
            raise ValueError(f"controller {name!r} needs a trained policy")
        for ci, command in enumerate(grid.commands()):
            for ti in range(grid.trials_per_command):
                jobs.append(
                    (
                        name,
                        command,
                        trial_seed(master_seed, ci, ti),
                        ci,
                        ti,
                        cfg,
                        policy,
                        grid.perturb_scale,
                        pos_tol,
                        ang_tol,
                    )
                )
    n_workers = resolve_thread_count(threads)
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(_run_trial_job, jobs, chunksize=8))
    else:
        records = [_run_trial_job(j) for j in jobs]
    records.sort(key=lambda r: (r.controller, r.command_index, r.trial_index))
    return records


@dataclass(frozen=True)
class BenchReport:
    """Aggregated benchmark results.

    raw maps controller -> metric -> (mean, std) over successful
    trials; normalized divides each mean/std by the baseline
    controller's mean, so the baseline row is exactly 1.0.
    """

    controllers: Tuple[str, ...]
    trial_counts: Dict[str, Tuple[int, int]]  # controller -> (successes, total)
    raw: Dict[str, Dict[str, Tuple[float, float]]]
    normalized: Dict[str, Dict[str, Tuple[float, float]]]
    failures: Tuple[Tuple[str, Tuple[float, float, float], int], ...]


def _metric_values(records: List[TrialRecord], metric: str) -> np.ndarray:
    return np.array([getattr(r, metric) for r in records], dtype=float)


def aggregate(records: Sequence[TrialRecord]) -> BenchReport:
    """Per-controller means and stds, normalized by the baseline.

    Failed trials are excluded from the metric statistics and reported
    separately. Requires baseline records; normalizing means by means
    makes the baseline row exactly one.
    """
    by_controller: Dict[str, List[TrialRecord]] = {}
    for r in records:
        by_controller.setdefault(r.controller, []).append(r)
    if BASELINE_CONTROLLER not in by_controller:
        raise ValueError(
            f"records for the {BASELINE_CONTROLLER!r} baseline are required"
        )

    raw: Dict[str, Dict[str, Tuple[float, float]]] = {}
    counts: Dict[str, Tuple[int, int]] = {}
    failures = []
    for name, recs in by_controller.items():
        good = [r for r in recs if r.success]
        counts[name] = (len(good), len(recs))
        failures.extend(
            (r.controller, r.command, r.trial_index) for r in recs if not r.success
        )
        stats = {}
        for metric in METRICS + ("energy_per_meter",):
            if metric == "energy_per_meter":
                vals = np.array(
                    [r.energy_per_meter for r in good if r.energy_per_meter is not None],
                    dtype=float,
                )
            else:
                vals = _metric_values(good, metric)
            if vals.size:
                stats[metric] = (float(vals.mean()), float(vals.std()))
            else:
                stats[metric] = (float("nan"), float("nan"))
        raw[name] = stats

    base = raw[BASELINE_CONTROLLER]
    normalized: Dict[str, Dict[str, Tuple[float, float]]] = {}
    for name, stats in raw.items():
        norm = {}
        for metric in METRICS:
            mean, std = stats[metric]
            bmean = base[metric][0]
            if bmean != 0.0 and math.isfinite(bmean):
                norm[metric] = (mean / bmean, std / bmean)
            else:
                norm[metric] = (1.0 if mean == bmean else float("inf"), float("nan"))
        normalized[name] = norm

    order = tuple(sorted(by_controller))
    return BenchReport(
        controllers=order,
        trial_counts=counts,
        raw=raw,
        normalized=normalized,
        failures=tuple(sorted(failures)),
    )


@dataclass(frozen=True)
class DifficultyCurves:
    """Per-controller metric means binned by command difficulty.

    A command's difficulty is the baseline controller's mean footstep
    count over its (distance, heading) combination; every command falls
    in exactly one bin.
    """

    # (distance, heading) -> difficulty in baseline footsteps
    difficulty: Dict[Tuple[float, float], float]
    # controller -> (distance, heading) -> (time_s, energy_j, footsteps)
    curves: Dict[str, Dict[Tuple[float, float], Tuple[float, float, float]]]


def difficulty_curves(records: Sequence[TrialRecord]) -> DifficultyCurves:
    """Bin commands by baseline effort and average metrics per bin."""
    base_steps: Dict[Tuple[float, float], List[int]] = {}
    for r in records:
        if r.controller == BASELINE_CONTROLLER and r.success:
            key = (r.command[0], r.command[2])
            base_steps.setdefault(key, []).append(r.footsteps)
    if not base_steps:
        raise ValueError("difficulty binning requires successful baseline records")
    difficulty = {k: float(np.mean(v)) for k, v in base_steps.items()}

    grouped: Dict[str, Dict[Tuple[float, float], List[TrialRecord]]] = {}
    for r in records:
        if not r.success:
            continue
        key = (r.command[0], r.command[2])
        grouped.setdefault(r.controller, {}).setdefault(key, []).append(r)
    curves = {}
    for name, bins in grouped.items():
        curves[name] = {
            key: (
                float(np.mean([r.time_s for r in recs])),
                float(np.mean([r.energy_j for r in recs])),
                float(np.mean([r.footsteps for r in recs])),
            )
            for key, recs in bins.items()
        }
    return DifficultyCurves(difficulty=difficulty, curves=curves)


def report_to_json(report: BenchReport, curves: Optional[DifficultyCurves] = None) -> str:
    """Serialize a report (and optional curves) as deterministic JSON."""
    doc = {
        "controllers": list(report.controllers),
        "baseline": BASELINE_CONTROLLER,
        "trial_counts": {
            k: {"successes": v[0], "total": v[1]} for k, v in report.trial_counts.items()
        },
        "raw": {
            c: {m: {"mean": s[0], "std": s[1]} for m, s in stats.items()}
            for c, stats in report.raw.items()
        },
        "normalized": {
            c: {m: {"mean": s[0], "std": s[1]} for m, s in stats.items()}
            for c, stats in report.normalized.items()
        },
        "failures": [
            {"controller": c, "command": list(cmd), "trial": t}
            for c, cmd, t in report.failures
        ],
    }
    if curves is not None:
        doc["difficulty"] = [
            {
                "distance_m": k[0],
                "heading_rad": k[1],
                "difficulty_steps": curves.difficulty[k],
                "metrics": {
                    c: {
                        "time_s": curves.curves[c][k][0],
                        "energy_j": curves.curves[c][k][1],
                        "footsteps": curves.curves[c][k][2],
                    }
                    for c in sorted(curves.curves)
                    if k in curves.curves[c]
                },
            }
            for k in sorted(curves.difficulty)
        ]
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_table_csv(report: BenchReport, out: IO[str]) -> None:
    """Table-style summary: normalized mean +/- std per metric."""
    cols = ["controller"]
    for m in METRICS:
        cols += [f"{m}_norm_mean", f"{m}_norm_std", f"{m}_mean", f"{m}_std"]
    out.write(",".join(cols) + "\n")
    for name in report.controllers:
        row = [name]
        for m in METRICS:
            nmean, nstd = report.normalized[name][m]
            rmean, rstd = report.raw[name][m]
            row += [repr(nmean), repr(nstd), repr(rmean), repr(rstd)]
        out.write(",".join(row) + "\n")


def write_difficulty_csv(curves: DifficultyCurves, out: IO[str]) -> None:
    """Difficulty-binned metric means, one row per (bin, controller)."""
    out.write(
        "distance_m,heading_rad,difficulty_steps,controller,"
        "mean_time_s,mean_energy_j,mean_footsteps\n"
    )
    for key in sorted(curves.difficulty):
        for name in sorted(curves.curves):
            if key not in curves.curves[name]:
                continue
            t, e, f = curves.curves[name][key]
            out.write(
                ",".join(
                    [
                        repr(key[0]),
                        repr(key[1]),
                        repr(curves.difficulty[key]),
                        name,
                        repr(t),
                        repr(e),
                        repr(f),
                    ]
                )
                + "\n"
            )
