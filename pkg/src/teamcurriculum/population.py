"""Teammate population: training snapshots served as frozen greedy policies."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .approximator import QNetwork, clone_parameters, deserialize, forward, serialize
from .idqn import IDQNLearner, greedy_action

SKILL_LABELS = ("low", "medium", "high")
MANIFEST = "manifest.json"


class SnapshotError(RuntimeError):
    pass


def skill_labels(n: int) -> tuple[str, ...]:
    if n == len(SKILL_LABELS):
        return SKILL_LABELS
    return tuple(f"skill{i}" for i in range(n))


@dataclass(frozen=True, order=True)
class SnapshotTag:
    milestone_episode: int
    skill: str
    source_seed: int

    @property
    def label(self) -> str:
        """Short id used in run logs, e.g. ``low@2000``."""
        return f"{self.skill}@{self.milestone_episode}"

    @property
    def filename(self) -> str:
        return f"teammate_seed{self.source_seed}_ep{self.milestone_episode}.qnet"


class FrozenPolicy:
    """A snapshot that acts greedily and can never be trained."""

    def __init__(self, net: QNetwork, tag: SnapshotTag):
        self._net = clone_parameters(net).freeze()
        self.tag = tag

    @property
    def network(self) -> QNetwork:
        return self._net

    def q_values(self, observation: np.ndarray) -> np.ndarray:
        return forward(self._net, observation)

    def serialized(self) -> bytes:
        return serialize(self._net)


def frozen_act(policy: FrozenPolicy, observation: np.ndarray) -> int:
    return greedy_action(policy.q_values(observation))


class SnapshotStore:
    """Directory of ``teammate_seed{S}_ep{E}.qnet`` files plus a JSON manifest of tags."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._tags: list[SnapshotTag] = []
        if (self.directory / MANIFEST).exists():
            data = json.loads((self.directory / MANIFEST).read_text())
            self._tags = [SnapshotTag(**t) for t in data["snapshots"]]

    def tags(self) -> list[SnapshotTag]:
        return sorted(self._tags)

    def by_skill(self) -> dict[str, SnapshotTag]:
        return {t.skill: t for t in self._tags}

    def save(self, tag: SnapshotTag, net: QNetwork) -> None:
        if any(t.filename == tag.filename for t in self._tags):
            raise SnapshotError(f"snapshot {tag.filename} already in store {self.directory}")
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            (self.directory / tag.filename).write_bytes(serialize(net))
        except OSError as exc:
            raise SnapshotError(f"could not write snapshot {tag.filename}: {exc}") from exc
        self._tags.append(tag)
        self._write_manifest()

    def _write_manifest(self) -> None:
        data = {"snapshots": [asdict(t) for t in self.tags()]}
        (self.directory / MANIFEST).write_text(json.dumps(data, indent=2) + "\n")

    def load(self, tag: SnapshotTag) -> FrozenPolicy:
        path = self.directory / tag.filename
        if tag not in self._tags or not path.exists():
            raise SnapshotError(f"snapshot {tag.label} ({tag.filename}) missing from {self.directory}")
        return FrozenPolicy(deserialize(path.read_bytes()), tag)


def capture_snapshot(
    learner: IDQNLearner,
    episode: int,
    store: SnapshotStore,
    milestones: Sequence[int],
    source_seed: int,
) -> SnapshotTag:
    """Persist ``learner``'s online network after ``episode`` training episodes."""
    milestones = list(milestones)
    if milestones != sorted(set(milestones)):
        raise ValueError(f"milestones must be strictly increasing, got {milestones}")
    if episode not in milestones:
        raise ValueError(f"episode {episode} is not a configured milestone {milestones}")
    skill = skill_labels(len(milestones))[milestones.index(episode)]
    tag = SnapshotTag(milestone_episode=episode, skill=skill, source_seed=source_seed)
    store.save(tag, learner.net)
    return tag
