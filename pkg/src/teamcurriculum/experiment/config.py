"""Run configuration and its flat ``key = value`` file format.

Example::

    # desk-scale run
    episodes = 2000
    horizon = 200
    milestones = 400, 1000, 2000
    seeds = 0, 1, 2, 3, 4
    shaping = onion_in_pot:3, useful_dish:3, soup_pickup:5

Blank lines and ``#`` comments are ignored.  Tuples are comma separated,
mappings are ``name:value`` pairs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from ..idqn import EPS_END, EPS_START, LearnerConfig
from ..mmdp import DEFAULT_GAMMA
from ..overcooked.kitchen import DEFAULT_COOK_TIME, DEFAULT_DELIVERY_REWARD, DEFAULT_HORIZON, EVENTS

DEFAULT_SHAPING = {"onion_in_pot": 3.0, "useful_dish": 3.0, "soup_pickup": 5.0}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    layout: str | None = None  # None: packaged "cramped" kitchen
    episodes: int = 10_000
    horizon: int = DEFAULT_HORIZON
    delivery_reward: float = DEFAULT_DELIVERY_REWARD
    cook_time: int = DEFAULT_COOK_TIME
    gamma: float = DEFAULT_GAMMA
    eps_start: float = EPS_START
    eps_end: float = EPS_END
    epsilon_decay: str = "linear"
    milestones: tuple[int, ...] = (2_000, 5_000, 10_000)
    schedule: str = "idqn_scratch"
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    source_seed: int = 1_000
    source_attempts: int = 1
    teammate_agent: int = 1
    # learner constants
    batch_size: int = 64
    replay_capacity: int = 50_000
    target_sync_every: int = 1_000
    lr: float = 1e-3
    train_every: int = 1
    hidden: tuple[int, ...] = (64, 64)
    optimizer: str = "adam"
    # training-only shaping bonus, annealed linearly to 0 over this fraction of episodes
    shaping: dict[str, float] = field(default_factory=dict)
    shaping_anneal: float = 0.5
    rolling_window: int = 100
    summary_window: int = 1_000
    flush_every: int = 100
    output_dir: str = "runs/default"

    def __post_init__(self) -> None:
        self.milestones = tuple(int(m) for m in self.milestones)
        self.seeds = tuple(int(s) for s in self.seeds)
        self.hidden = tuple(int(h) for h in self.hidden)
        self.shaping = {str(k): float(v) for k, v in dict(self.shaping).items()}
        self.validate()

    def validate(self) -> None:
        if self.episodes < 1 or self.horizon < 1 or self.cook_time < 1:
            raise ConfigError("episodes, horizon and cook_time must be positive")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds must be distinct, got {self.seeds}")
        if self.source_seed in self.seeds:
            raise ConfigError("source_seed must differ from the evaluation seeds")
        if list(self.milestones) != sorted(set(self.milestones)) or not self.milestones:
            raise ConfigError(f"milestones must be strictly increasing, got {self.milestones}")
        if self.milestones[0] < 1 or self.milestones[-1] > self.episodes:
            raise ConfigError(f"milestones must lie in [1, episodes={self.episodes}]")
        if self.teammate_agent not in (0, 1):
            raise ConfigError("teammate_agent must be 0 or 1")
        unknown = set(self.shaping) - set(EVENTS)
        if unknown:
            raise ConfigError(f"unknown shaping events {sorted(unknown)}; known: {EVENTS}")
        if not 0.0 < self.shaping_anneal <= 1.0:
            raise ConfigError("shaping_anneal must lie in (0, 1]")
        if self.rolling_window < 1 or self.summary_window < 1 or self.flush_every < 1:
            raise ConfigError("windows and flush_every must be positive")
        if self.source_attempts < 1:
            raise ConfigError("source_attempts must be positive")
        self.learner_config()  # raises on bad learner constants

    def learner_config(self) -> LearnerConfig:
        try:
            return LearnerConfig(
                gamma=self.gamma,
                batch_size=self.batch_size,
                replay_capacity=self.replay_capacity,
                target_sync_every=self.target_sync_every,
                lr=self.lr,
                train_every=self.train_every,
                hidden=self.hidden,
                optimizer=self.optimizer,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def replace(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"


def desk_config(**overrides: Any) -> RunConfig:
    """Reduced configuration used for the trend checks."""
    base = dict(
        episodes=2_000,
        horizon=200,
        milestones=(400, 1_000, 2_000),
        seeds=(0, 1, 2, 3, 4),
        train_every=4,
        shaping=dict(DEFAULT_SHAPING),
        shaping_anneal=0.5,
        summary_window=200,
        source_attempts=3,
        output_dir="runs/desk",
    )
    base.update(overrides)
    return RunConfig(**base)


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    if isinstance(value, dict):
        return ", ".join(f"{k}:{v}" for k, v in value.items())
    return str(value)


def _parse_value(name: str, raw: str, current: Any, annotation: str) -> Any:
    raw = raw.strip()
    try:
        if "dict" in annotation:
            out = {}
            for part in filter(None, (p.strip() for p in raw.split(","))):
                key, _, val = part.partition(":")
                out[key.strip()] = float(val)
            return out
        if "tuple" in annotation:
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if "None" in annotation and raw in ("", "none", "None"):
            return None
        if "int" in annotation:
            return int(raw)
        if "float" in annotation:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r} ({exc})") from exc


def parse_overrides(pairs: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    known = {f.name: f for f in fields(RunConfig)}
    changes = {}
    for name, raw in pairs.items():
        if name not in known:
            raise ConfigError(f"unknown config key {name!r}")
        changes[name] = _parse_value(name, raw, getattr(base, name), str(known[name].type))
    return base.replace(**changes)


def read_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value
    return parse_overrides(pairs, base)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    return read_config_text(Path(path).read_text(encoding="utf-8"), base)
