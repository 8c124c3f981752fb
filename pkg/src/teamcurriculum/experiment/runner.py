"""Training loops: co-trained source run, and student runs against a schedule."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from ..approximator import NonFiniteError
from ..curriculum import CO_LEARNING, CurriculumSchedule, build_schedule, teammate_for_episode
from ..idqn import EpsilonSchedule, IDQNLearner, epsilon_at
from ..mmdp import STUDENT
from ..overcooked.env import OvercookedEnv
from ..population import FrozenPolicy, SnapshotStore, SnapshotTag, capture_snapshot, frozen_act
from .config import RunConfig

log = logging.getLogger(__name__)

SOURCE = "source"


class RunError(RuntimeError):
    pass


@dataclass
class EpisodeRecord:
    seed: int
    episode: int
    kind: str
    milestones: list[int]
    teammate: str
    student_reward: float
    teammate_reward: float
    team_reward: float
    epsilon: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


def make_env(config: RunConfig) -> OvercookedEnv:
    return OvercookedEnv(
        layout=config.layout,
        horizon=config.horizon,
        cook_time=config.cook_time,
        delivery_reward=config.delivery_reward,
        shaping=config.shaping,
    )


def epsilon_schedule(config: RunConfig) -> EpsilonSchedule:
    return EpsilonSchedule(config.eps_start, config.eps_end, config.episodes, config.epsilon_decay)


def shaping_weight(config: RunConfig, episode: int) -> float:
    if not config.shaping:
        return 0.0
    span = config.shaping_anneal * config.episodes
    return max(0.0, 1.0 - episode / span)


def log_path(config: RunConfig, kind: str, seed: int) -> Path:
    return Path(config.output_dir) / "logs" / kind / f"seed{seed}.jsonl"


def snapshot_dir(config: RunConfig) -> Path:
    return Path(config.output_dir) / "snapshots"


class _LogWriter:
    """JSONL episode log, flushed every ``flush_every`` records.

    Wall-clock times go to a ``.timing`` sidecar so the log itself stays
    byte-identical across reruns.  A run that dies is renamed ``*.invalid.jsonl``.
    """

    def __init__(self, path: Path, flush_every: int):
        self.path = path
        path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = path.open("w", encoding="utf-8")
        self._timing = path.with_suffix(".timing").open("w", encoding="utf-8")
        self._pending = 0
        self.flush_every = flush_every
        self._t0 = time.perf_counter()

    def write(self, record: EpisodeRecord) -> None:
        self._fh.write(record.to_json() + "\n")
        self._timing.write(f"{record.episode} {time.perf_counter() - self._t0:.3f}\n")
        self._pending += 1
        if self._pending >= self.flush_every:
            self._fh.flush()
            self._timing.flush()
            self._pending = 0

    def close(self) -> None:
        self._fh.close()
        self._timing.close()

    def invalidate(self, reason: str) -> Path:
        self.close()
        bad = self.path.with_name(self.path.stem + ".invalid.jsonl")
        self.path.replace(bad)
        with bad.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps({"invalid": True, "reason": reason}) + "\n")
        return bad


def _play_episode(
    env: OvercookedEnv,
    episode_seed: int,
    act: Callable[[int, np.ndarray], int],
    learners: dict[int, IDQNLearner],
    shaping_w: float,
) -> np.ndarray:
    """Play one episode; learners in ``learners`` store and train on the team reward."""
    obs = env.reset(episode_seed)
    totals = np.zeros(2)
    while True:
        actions = (act(0, obs[0]), act(1, obs[1]))
        tr = env.step(actions)
        totals += tr.individual_rewards
        reward = tr.team_reward
        if shaping_w:
            reward += shaping_w * (tr.shaping[0] + tr.shaping[1])
        for i, learner in learners.items():
            learner.observe(obs[i], actions[i], reward, tr.next_state[i], tr.done)
        obs = tr.next_state
        if tr.done:
            return totals


def _learner_seed(seed: int, agent: int) -> int:
    return seed * 7919 + agent


def train_source(config: RunConfig) -> tuple[SnapshotStore, Path]:
    """Co-train two IDQN agents and snapshot the designated teammate at every milestone.

    With ``source_attempts > 1`` the run is repeated with a new seed until
    the rolling team reward does not decrease across the milestones.
    """
    from .report import milestone_trend, read_log  # local import: report depends on this module

    seed = config.source_seed
    for attempt in range(config.source_attempts):
        store_dir = snapshot_dir(config)
        if store_dir.exists():
            for f in store_dir.iterdir():
                f.unlink()
        store = SnapshotStore(store_dir)
        path = _run(config, SOURCE, seed, store=store)
        trend = milestone_trend(read_log(path), config.milestones, config.rolling_window)
        log.info("source seed %d: rolling team reward at milestones %s", seed, trend)
        if all(a <= b for a, b in zip(trend, trend[1:])):
            break
        if attempt + 1 < config.source_attempts:
            log.warning("source seed %d not monotone across milestones, retrying", seed)
            seed += 1
    (Path(config.output_dir) / "source.json").write_text(
        json.dumps({"source_seed": seed, "attempts": attempt + 1, "log": str(path)}, indent=2) + "\n"
    )
    return store, path


def run_training(config: RunConfig, seed: int, kind: str | None = None) -> Path:
    """Train a fresh student for ``config.episodes`` episodes under one schedule kind."""
    kind = kind or config.schedule
    tags: dict[str, SnapshotTag] = {}
    store = None
    if kind != "idqn_scratch":
        store = SnapshotStore(snapshot_dir(config))
        tags = store.by_skill()
        if not tags:
            raise RunError(f"no snapshots in {snapshot_dir(config)}; run train-source first")
    schedule = build_schedule(kind, config.episodes, tags)
    return _run(config, kind, seed, schedule=schedule, snapshots=store)


def _run(
    config: RunConfig,
    kind: str,
    seed: int,
    schedule: CurriculumSchedule | None = None,
    snapshots: SnapshotStore | None = None,
    store: SnapshotStore | None = None,
) -> Path:
    env = make_env(config)
    lcfg = config.learner_config()
    eps_sched = epsilon_schedule(config)
    mate = config.teammate_agent if kind == SOURCE else 1
    me = 1 - mate
    student = IDQNLearner(env.obs_size, env.n_actions, lcfg, seed=_learner_seed(seed, me))
    co_learner: IDQNLearner | None = None
    frozen_cache: dict[SnapshotTag, FrozenPolicy] = {}
    path = log_path(config, kind, seed)
    writer = _LogWriter(path, config.flush_every)
    try:
        for episode in range(config.episodes):
            spec_label = CO_LEARNING
            frozen: FrozenPolicy | None = None
            if schedule is not None:
                spec = teammate_for_episode(schedule, episode)
                spec_label = spec.label
                if spec.tag is not None:
                    if spec.tag not in frozen_cache:
                        frozen_cache[spec.tag] = snapshots.load(spec.tag)
                    frozen = frozen_cache[spec.tag]
            if frozen is None and co_learner is None:
                co_learner = IDQNLearner(env.obs_size, env.n_actions, lcfg, seed=_learner_seed(seed, mate))
            eps = epsilon_at(eps_sched, episode)
            learners = {me: student} if frozen is not None else {me: student, mate: co_learner}

            def act(agent: int, obs: np.ndarray) -> int:
                if agent == me:
                    return student.act(obs, eps)
                if frozen is not None:
                    return frozen_act(frozen, obs)
                return co_learner.act(obs, eps)

            totals = _play_episode(env, seed * 1_000_003 + episode, act, learners, shaping_weight(config, episode))
            writer.write(
                EpisodeRecord(
                    seed=seed,
                    episode=episode,
                    kind=kind,
                    milestones=list(config.milestones),
                    teammate=spec_label,
                    student_reward=float(totals[me]),
                    teammate_reward=float(totals[mate]),
                    team_reward=float(totals[me] + totals[mate]),
                    epsilon=eps,
                )
            )
            if store is not None and episode + 1 in config.milestones:
                capture_snapshot(co_learner, episode + 1, store, config.milestones, seed)
    except NonFiniteError as exc:
        bad = writer.invalidate(str(exc))
        raise RunError(f"{kind} seed {seed} aborted at episode {episode}: {exc}; partial log at {bad}") from exc
    writer.close()
    return path


def run_all_seeds(config: RunConfig, kind: str, workers: int = 1) -> list[Path]:
    if workers <= 1:
        return [run_training(config, seed, kind) for seed in config.seeds]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_training, config, seed, kind) for seed in config.seeds]
        return [f.result() for f in futures]


def iter_records(path: Path) -> Iterator[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield json.loads(line)
