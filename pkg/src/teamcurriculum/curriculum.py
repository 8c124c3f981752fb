"""Which teammate the student trains with in each episode."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Mapping

from .population import SnapshotTag

FIXED_KINDS = {"fixed_low": "low", "fixed_medium": "medium", "fixed_high": "high"}
CURRICULA = {
    "increasing": ("low", "medium", "high"),
    "decreasing": ("high", "medium", "low"),
}
SCHEDULE_KINDS = ("fixed_low", "fixed_medium", "fixed_high", "increasing", "decreasing", "idqn_scratch")

CO_LEARNING = "co_learning"


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class TeammateSpec:
    kind: str  # "frozen" or "co_learning"
    tag: SnapshotTag | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("frozen", CO_LEARNING):
            raise ValueError(f"unknown teammate kind {self.kind!r}")
        if (self.kind == "frozen") != (self.tag is not None):
            raise ValueError("frozen teammates need a tag; co-learning ones must not have one")

    @property
    def label(self) -> str:
        return self.tag.label if self.tag is not None else CO_LEARNING

    @classmethod
    def frozen(cls, tag: SnapshotTag) -> "TeammateSpec":
        return cls("frozen", tag)

    @classmethod
    def co_learning(cls) -> "TeammateSpec":
        return cls(CO_LEARNING)


@dataclass(frozen=True)
class CurriculumSchedule:
    kind: str
    phases: tuple[tuple[int, TeammateSpec], ...]

    def __post_init__(self) -> None:
        if not self.phases:
            raise ScheduleError("schedule needs at least one phase")
        if any(n <= 0 for n, _ in self.phases):
            raise ScheduleError("phase lengths must be positive")

    @property
    def total(self) -> int:
        return sum(n for n, _ in self.phases)

    @property
    def boundaries(self) -> tuple[int, ...]:
        """First episode of every phase after the first."""
        out, acc = [], 0
        for n, _ in self.phases[:-1]:
            acc += n
            out.append(acc)
        return tuple(out)


def build_schedule(kind: str, episodes: int, tags: Mapping[str, SnapshotTag] | None = None) -> CurriculumSchedule:
    """Phase lengths for 3-phase curricula are K//3, K//3 and the remainder."""
    tags = tags or {}
    if episodes < 1:
        raise ScheduleError("need at least one episode")

    def tag_for(skill: str) -> SnapshotTag:
        if skill not in tags:
            raise ScheduleError(f"schedule {kind!r} needs a {skill!r} snapshot; have {sorted(tags)}")
        return tags[skill]

    if kind == "idqn_scratch":
        return CurriculumSchedule(kind, ((episodes, TeammateSpec.co_learning()),))
    if kind in FIXED_KINDS:
        return CurriculumSchedule(kind, ((episodes, TeammateSpec.frozen(tag_for(FIXED_KINDS[kind]))),))
    if kind in CURRICULA:
        if episodes < 3:
            raise ScheduleError(f"a 3-phase curriculum needs K >= 3, got {episodes}")
        third = episodes // 3
        lengths = (third, third, episodes - 2 * third)
        specs = [TeammateSpec.frozen(tag_for(s)) for s in CURRICULA[kind]]
        return CurriculumSchedule(kind, tuple(zip(lengths, specs)))
    raise ScheduleError(f"unknown schedule kind {kind!r}; choose from {SCHEDULE_KINDS}")


def teammate_for_episode(schedule: CurriculumSchedule, episode: int) -> TeammateSpec:
    if not 0 <= episode < schedule.total:
        raise ScheduleError(f"episode {episode} outside [0, {schedule.total})")
    return schedule.phases[bisect.bisect_right(schedule.boundaries, episode)][1]
