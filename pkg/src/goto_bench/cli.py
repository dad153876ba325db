"""Command-line entry point: train, eval, and trace subcommands.

Every run is deterministic given (config file, flags, seed). Exit
codes: 0 on success, 1 for usage or configuration errors, 2 for
runtime failures. GOTO_BENCH_THREADS caps trial parallelism during
eval (0 = one worker per CPU).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

from . import bench
from .config import ConfigError, RunConfig, load_config
from .controllers import CONTROLLER_NAMES
from .policy import PolicyParams, load_policy, save_policy
from .stepper import write_trace_csv
from .svgtrace import render_traces
from .trainer import cem_train
from .geometry import Pose2


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="goto-bench",
        description="Benchmark suite for short-range SE(2)-target locomotion.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=str, default=None, help="TOML run configuration file (path)"
    )
    common.add_argument(
        "--seed", type=int, default=None, help="master seed (integer, overrides config)"
    )
    common.add_argument(
        "--out", type=str, default=".", help="output directory (path, created if missing)"
    )

    p_train = sub.add_parser(
        "train", parents=[common], help="train a policy with cross-entropy search"
    )
    p_train.add_argument(
        "--mode",
        choices=("goto", "hier"),
        default="goto",
        help="policy type: goto = footstep actions (m, m, rad); "
        "hier = velocity commands (m/s, m/s, rad/s)",
    )

    p_eval = sub.add_parser(
        "eval", parents=[common], help="run the benchmark grid and write reports"
    )
    p_eval.add_argument(
        "--controllers",
        type=str,
        default="agility2",
        help="comma-separated controller names from: " + ", ".join(CONTROLLER_NAMES),
    )
    p_eval.add_argument(
        "--policy",
        action="append",
        default=[],
        metavar="MODE=PATH",
        help="policy file for a learned controller, e.g. goto=out/policy_goto.bin "
        "(repeatable)",
    )

    p_trace = sub.add_parser(
        "trace", parents=[common], help="render one trial as SVG + CSV footstep trace"
    )
    p_trace.add_argument(
        "--controller",
        type=str,
        default="agility2",
        help="controller name from: " + ", ".join(CONTROLLER_NAMES),
    )
    p_trace.add_argument(
        "--command",
        type=str,
        default="1.0,0.0,0.0",
        help="goal command as r,phi,theta (meters, radians, radians)",
    )
    p_trace.add_argument(
        "--policy",
        action="append",
        default=[],
        metavar="MODE=PATH",
        help="policy file for a learned controller (repeatable)",
    )
    return parser


def _load_run_config(args) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = RunConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _load_policies(entries: List[str]) -> Dict[str, PolicyParams]:
    policies = {}
    for entry in entries:
        mode, sep, path = entry.partition("=")
        if not sep or mode not in ("goto", "hier"):
            raise UsageError(
                f"--policy expects goto=PATH or hier=PATH, got {entry!r}"
            )
        if not Path(path).is_file():
            raise UsageError(f"policy file not found: {path}")
        policy = load_policy(path)
        if policy.mode != mode:
            raise UsageError(
                f"policy file {path} holds a {policy.mode!r} policy, not {mode!r}"
            )
        policies[mode] = policy
    return policies


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    cem_cfg = replace(cfg.cem, seed=cfg.seed)
    log_path = out / "train_log.csv"
    with open(log_path, "w") as log:
        policy = cem_train(
            cem_cfg, args.mode, sim_cfg=cfg.stepper, reward_cfg=cfg.reward, log=log
        )
    policy_path = out / f"policy_{args.mode}.bin"
    save_policy(policy, policy_path)
    print(f"wrote {policy_path} and {log_path}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    controllers = [c.strip() for c in args.controllers.split(",") if c.strip()]
    if not controllers:
        raise UsageError("--controllers must name at least one controller")
    for c in controllers:
        if c not in CONTROLLER_NAMES:
            raise UsageError(
                f"unknown controller {c!r}; expected one of {', '.join(CONTROLLER_NAMES)}"
            )
    if bench.BASELINE_CONTROLLER not in controllers:
        raise UsageError(
            f"the {bench.BASELINE_CONTROLLER!r} baseline must be evaluated for "
            "normalization"
        )
    policies = _load_policies(args.policy)
    for c in controllers:
        if c in ("goto", "hier") and c not in policies:
            raise UsageError(f"controller {c!r} requires --policy {c}=PATH")

    records = bench.run_benchmark(
        controllers, cfg.grid, cfg.seed, cfg=cfg.stepper, policies=policies
    )
    report = bench.aggregate(records)
    curves = bench.difficulty_curves(records)
    (out / "report.json").write_text(bench.report_to_json(report, curves))
    with open(out / "table.csv", "w") as f:
        bench.write_table_csv(report, f)
    with open(out / "difficulty.csv", "w") as f:
        bench.write_difficulty_csv(curves, f)
    print(f"wrote {out / 'report.json'}, {out / 'table.csv'}, {out / 'difficulty.csv'}")
    return 0


def _parse_command(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--command expects r,phi,theta; got {text!r}")
    try:
        r, phi, theta = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--command components must be numbers; got {text!r}")
    if r < 0:
        raise UsageError(f"--command distance must be >= 0; got {r}")
    return r, phi, theta


def cmd_trace(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    if args.controller not in CONTROLLER_NAMES:
        raise UsageError(f"unknown controller {args.controller!r}")
    policies = _load_policies(args.policy)
    policy = policies.get(args.controller)
    if args.controller in ("goto", "hier") and policy is None:
        raise UsageError(
            f"controller {args.controller!r} requires --policy {args.controller}=PATH"
        )
    command = _parse_command(args.command)
    record, states = bench.run_trial(
        args.controller,
        command,
        bench.trial_seed(cfg.seed, 0, 0),
        cfg=cfg.stepper,
        policy=policy,
        perturb_scale=cfg.grid.perturb_scale,
        keep_states=True,
    )
    stem = f"trace_r{command[0]:g}_phi{command[1]:g}_th{command[2]:g}"
    goal = bench.command_goal(command)
    final = states[-1]
    svg = render_traces(final.step_log, Pose2(0.0, 0.0, 0.0), goal)
    (out / f"{stem}.svg").write_text(svg)
    with open(out / f"{stem}.csv", "w") as f:
        write_trace_csv(final.step_log, f)
    status = "success" if record.success else "timeout"
    print(
        f"wrote {out / (stem + '.svg')} and {out / (stem + '.csv')} "
        f"({status}, {record.footsteps} footsteps)"
    )
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand == "train":
            return cmd_train(args)
        if args.subcommand == "eval":
            return cmd_eval(args)
        if args.subcommand == "trace":
            return cmd_trace(args)
        raise UsageError(f"unknown subcommand {args.subcommand!r}")
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help exits 0 through here
        code = exc.code if isinstance(exc.code, int) else 0
        return code
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
