"""Independent DQN for one agent.

Each learner owns its network, target network, optimizer state, replay
buffer and random streams.  Nothing here reads another agent's state; the
partner is just part of the environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .approximator import (
    DEFAULT_HIDDEN,
    NonFiniteError,
    OptimizerState,
    QNetwork,
    apply_update,
    backward_batch,
    clone_parameters,
    copy_into,
    forward,
)
from .mmdp import DEFAULT_GAMMA

EPS_START = 0.9
EPS_END = 0.05


@dataclass(frozen=True)
class EpsilonSchedule:
    eps_start: float = EPS_START
    eps_end: float = EPS_END
    horizon: int = 10_000
    kind: str = "linear"

    def __post_init__(self) -> None:
        if self.eps_start < self.eps_end:
            raise ValueError("eps_start must be >= eps_end")
        if not (0.0 <= self.eps_end and self.eps_start <= 1.0):
            raise ValueError("epsilon values must lie in [0, 1]")
        if self.kind not in ("linear", "exponential"):
            raise ValueError(f"unknown epsilon decay {self.kind!r}")
        if self.kind == "exponential" and self.eps_end <= 0.0:
            raise ValueError("exponential decay needs eps_end > 0")


def epsilon_at(schedule: EpsilonSchedule, episode: int) -> float:
    """eps_start at episode 0, eps_end at episode horizon-1, clamped after."""
    if episode < 0:
        raise ValueError("episode must be >= 0")
    last = schedule.horizon - 1
    if episode >= last:
        return schedule.eps_end if last > 0 or episode > 0 else schedule.eps_start
    frac = episode / last
    if schedule.kind == "exponential":
        value = schedule.eps_start * (schedule.eps_end / schedule.eps_start) ** frac
    else:
        # weighted form hits both endpoints exactly
        value = (1.0 - frac) * schedule.eps_start + frac * schedule.eps_end
    return min(max(value, schedule.eps_end), schedule.eps_start)


def greedy_action(q_values: np.ndarray) -> int:
    """Argmax with ties going to the lowest index."""
    return int(np.argmax(q_values))


def select_action(net: QNetwork, observation: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    # the uniform draw happens every call so the stream position is independent of the net
    if rng.random() < epsilon:
        return int(rng.integers(net.n_actions))
    return greedy_action(forward(net, observation))


def td_target(
    target_net: QNetwork, reward: float, next_observation: np.ndarray, done: bool, gamma: float
) -> float:
    """reward if done, else reward + gamma * max_a' Q(s', a'; target)."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if done:
        return float(reward)
    return float(reward + gamma * np.max(forward(target_net, next_observation)))


def td_targets(
    target_net: QNetwork, rewards: np.ndarray, next_observations: np.ndarray, dones: np.ndarray, gamma: float
) -> np.ndarray:
    next_max = forward(target_net, next_observations).max(axis=1)
    return rewards + gamma * next_max * (1.0 - dones)


class ReplayBuffer:
    """Fixed-capacity FIFO ring of (obs, action, reward, next_obs, done)."""

    def __init__(self, capacity: int, obs_size: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_size))
        self.next_obs = np.zeros((capacity, obs_size))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, obs: np.ndarray, action: int, reward: float, next_obs: np.ndarray, done: bool) -> None:
        i = self._next
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = float(done)
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def order(self) -> np.ndarray:
        """Slot indices from oldest to newest."""
        if self._size < self.capacity:
            return np.arange(self._size)
        return (np.arange(self.capacity) + self._next) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = rng.integers(self._size, size=batch_size)
        return self.obs[idx], self.actions[idx], self.rewards[idx], self.next_obs[idx], self.dones[idx]


@dataclass
class LearnerConfig:
    gamma: float = DEFAULT_GAMMA
    batch_size: int = 64
    replay_capacity: int = 50_000
    target_sync_every: int = 1_000
    lr: float = 1e-3
    train_every: int = 1
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    optimizer: str = "adam"

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        for name in ("batch_size", "replay_capacity", "target_sync_every", "train_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        self.hidden = tuple(int(h) for h in self.hidden)


class IDQNLearner:
    def __init__(self, obs_size: int, n_actions: int, config: LearnerConfig | None = None, seed: int = 0):
        self.config = config or LearnerConfig()
        init_seq, act_seq, sample_seq = np.random.SeedSequence(seed).spawn(3)
        self.act_rng = np.random.default_rng(act_seq)
        self.sample_rng = np.random.default_rng(sample_seq)
        dims = (obs_size, *self.config.hidden, n_actions)
        self.net = QNetwork.init(dims, np.random.default_rng(init_seq))
        self.target_net = clone_parameters(self.net)
        self.opt = OptimizerState.for_network(self.net, self.config.optimizer, lr=self.config.lr)
        self.buffer = ReplayBuffer(self.config.replay_capacity, obs_size)
        self.train_steps = 0
        self.env_steps = 0

    def act(self, observation: np.ndarray, epsilon: float) -> int:
        return select_action(self.net, observation, epsilon, self.act_rng)

    def observe(self, obs: np.ndarray, action: int, reward: float, next_obs: np.ndarray, done: bool) -> float | None:
        """Store one transition and train if the cadence says so."""
        self.buffer.add(obs, action, reward, next_obs, done)
        self.env_steps += 1
        if self.env_steps % self.config.train_every == 0:
            return self.train_step()
        return None

    def train_step(self, rng: np.random.Generator | None = None) -> float | None:
        """One minibatch update on the mean squared TD error; None if the buffer is too small."""
        cfg = self.config
        if len(self.buffer) < cfg.batch_size:
            return None
        obs, actions, rewards, next_obs, dones = self.buffer.sample(cfg.batch_size, rng or self.sample_rng)
        targets = td_targets(self.target_net, rewards, next_obs, dones, cfg.gamma)
        loss, grads = backward_batch(self.net, obs, actions, targets)
        if not math.isfinite(loss):
            raise NonFiniteError(
                f"non-finite TD loss at train step {self.train_steps} "
                f"(targets range {np.nanmin(targets)}..{np.nanmax(targets)})"
            )
        apply_update(self.net, self.opt, grads)
        self.train_steps += 1
        if self.train_steps % cfg.target_sync_every == 0:
            self.sync_target()
        return loss

    def sync_target(self) -> None:
        copy_into(self.target_net, self.net)
