"""Command line entry point.

    teamcurriculum train-source   co-train two agents, snapshot the teammate
    teamcurriculum run            one schedule kind, every seed
    teamcurriculum run-all        all six schedule kinds (trains the source if needed)
    teamcurriculum report         aggregate logs into CSV panels, summary and trend checks
    teamcurriculum validate-env   scripted-oracle and random-play environment checks

Every RunConfig field is also a flag (``--episodes 2000``); ``--config FILE``
loads a key = value file first and flags override it.  ``--preset desk``
starts from the reduced trend-check configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from ..curriculum import SCHEDULE_KINDS
from ..overcooked.env import OvercookedEnv
from ..population import SnapshotStore
from . import report as rep
from .config import ConfigError, RunConfig, desk_config, load_config, parse_overrides
from .runner import SOURCE, log_path, run_all_seeds, snapshot_dir, train_source
from .validate import random_invariant_sweep, run_scripted

log = logging.getLogger("teamcurriculum")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--preset", choices=("full", "desk"), default="full", help="base configuration")
    p.add_argument("--workers", type=int, default=1, help="parallel seed processes")
    group = p.add_argument_group("run config fields")
    for f in fields(RunConfig):
        group.add_argument(f"--{f.name.replace('_', '-')}", dest=f"cfg_{f.name}", metavar="VALUE")


def build_config(args: argparse.Namespace) -> RunConfig:
    base = desk_config() if args.preset == "desk" else RunConfig()
    if args.config:
        base = load_config(args.config, base)
    overrides = {
        k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None
    }
    return parse_overrides(overrides, base)


def cmd_train_source(cfg: RunConfig, args) -> int:
    store, path = train_source(cfg)
    for tag in store.tags():
        print(f"snapshot {tag.label:<14} {snapshot_dir(cfg) / tag.filename}")
    print(f"source log {path}")
    return 0


def cmd_run(cfg: RunConfig, args) -> int:
    for path in run_all_seeds(cfg, cfg.schedule, args.workers):
        print(path)
    return 0


def cmd_run_all(cfg: RunConfig, args) -> int:
    if not SnapshotStore(snapshot_dir(cfg)).tags():
        cmd_train_source(cfg, args)
    for kind in SCHEDULE_KINDS:
        log.info("running %s", kind)
        cmd_run(cfg.replace(schedule=kind), args)
    return 0


def load_logs(cfg: RunConfig) -> dict[str, list[rep.RunLog]]:
    logs = {}
    for kind in SCHEDULE_KINDS:
        paths = [log_path(cfg, kind, s) for s in cfg.seeds]
        if all(p.exists() for p in paths):
            logs[kind] = [rep.read_log(p) for p in paths]
    return logs


def trend_results(cfg: RunConfig) -> tuple[list[rep.TrendResult], list[str]]:
    results, notes = [], []
    source_json = Path(cfg.output_dir) / "source.json"
    if source_json.exists():
        import json

        src = json.loads(source_json.read_text())
        source = rep.read_log(log_path(cfg, SOURCE, src["source_seed"]))
        results.append(rep.check_snapshot_quality(source, cfg.milestones, cfg.rolling_window))
    logs = load_logs(cfg)
    if {"fixed_low", "fixed_medium", "fixed_high", "idqn_scratch"} <= set(logs):
        results.append(rep.check_frozen_beats_scratch(logs))
        results.append(rep.check_lazy_student(logs))
    if {"increasing", "decreasing", "idqn_scratch"} <= set(logs):
        res, note = rep.check_curriculum_beats_scratch(logs)
        results.append(res)
        notes.append(note)
    return results, notes


def cmd_report(cfg: RunConfig, args) -> int:
    logs = load_logs(cfg)
    if not logs:
        print(f"no complete schedule logs under {cfg.output_dir}", file=sys.stderr)
        return 1
    aggregates = {k: rep.aggregate_seeds(v) for k, v in logs.items()}
    out = Path(cfg.output_dir) / "report"
    for path in rep.emit_report(aggregates, out, cfg.summary_window):
        print(path)
    print((out / "summary.txt").read_text(), end="")
    results, notes = trend_results(cfg)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    for n in notes:
        print(f"[INFO] {n}")
    return 0


def cmd_validate_env(cfg: RunConfig, args) -> int:
    env = OvercookedEnv(cfg.layout, horizon=cfg.horizon, cook_time=cfg.cook_time, delivery_reward=cfg.delivery_reward)
    ok = True
    res = run_scripted(env)
    good = res.deliveries >= 1 and res.team_reward == cfg.delivery_reward * res.deliveries
    ok &= good
    print(
        f"[{'PASS' if good else 'FAIL'}] scripted oracle: {res.deliveries} deliveries, "
        f"team reward {res.team_reward} in {res.steps} steps ({res.seconds:.2f}s)"
    )
    try:
        n = random_invariant_sweep(env, 10_000)
        print(f"[PASS] invariant sweep: {n} random steps without violations")
    except AssertionError as exc:
        ok = False
        print(f"[FAIL] invariant sweep: {exc}")
    return 0 if ok else 1


COMMANDS = {
    "train-source": cmd_train_source,
    "run": cmd_run,
    "run-all": cmd_run_all,
    "report": cmd_report,
    "validate-env": cmd_validate_env,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="teamcurriculum", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_config_flags(sub.add_parser(name))
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(asctime)s %(message)s")
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        parser.error(str(exc))
    return COMMANDS[args.command](cfg, args)


if __name__ == "__main__":
    sys.exit(main())
