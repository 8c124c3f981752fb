"""Two-agent MMDP types shared by the environment and the learners."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

STUDENT = 0
TEAMMATE = 1
N_AGENTS = 2

DEFAULT_GAMMA = 0.99


class EpisodeFinishedError(RuntimeError):
    """Raised when stepping an environment whose episode is already done."""


@dataclass(frozen=True)
class JointAction:
    actions: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.actions) != N_AGENTS:
            raise ValueError(f"expected {N_AGENTS} actions, got {len(self.actions)}")

    @classmethod
    def of(cls, *actions: int) -> "JointAction":
        return cls(tuple(int(a) for a in actions))

    def __getitem__(self, agent: int) -> int:
        return self.actions[agent]


@dataclass(frozen=True)
class DiscountFactor:
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")


@dataclass(frozen=True)
class Transition:
    """One environment step as seen by both agents.

    ``state`` and ``next_state`` hold one observation vector per agent.
    ``team_reward`` is always the sum of ``individual_rewards``.
    ``shaping`` is an optional training-only bonus per agent; it never enters
    the logged rewards.
    """

    state: tuple[np.ndarray, np.ndarray]
    joint_action: JointAction
    individual_rewards: tuple[float, float]
    team_reward: float
    next_state: tuple[np.ndarray, np.ndarray]
    done: bool
    shaping: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.team_reward != sum(self.individual_rewards):
            raise ValueError("team reward must equal the sum of individual rewards")


class MultiAgentEnv(Protocol):
    """What a learner loop needs from an environment."""

    n_actions: int
    horizon: int

    def reset(self, seed: int = 0) -> tuple[np.ndarray, np.ndarray]: ...

    def step(self, joint_action: JointAction | Sequence[int]) -> Transition: ...
