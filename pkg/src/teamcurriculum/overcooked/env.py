from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from ..mmdp import EpisodeFinishedError, JointAction, Transition
from .features import observation_size, observe
from .kitchen import (
    DEFAULT_COOK_TIME,
    DEFAULT_DELIVERY_REWARD,
    DEFAULT_HORIZON,
    EVENTS,
    N_ACTIONS,
    Kitchen,
    KitchenState,
    step_kitchen_events,
)
from .layout import Layout, default_layout, load_layout


class OvercookedEnv:
    """Episode wrapper around :func:`step_kitchen` with the two-agent env contract.

    Individual rewards go to the agent whose interact completed a delivery;
    the team reward is their sum.  ``shaping`` maps pipeline event names
    (see :mod:`.kitchen`) to a per-event bonus reported in
    ``Transition.shaping``; it is empty by default, so training sees the
    sparse reward only.
    """

    n_actions = N_ACTIONS

    def __init__(
        self,
        layout: Layout | str | Path | None = None,
        horizon: int = DEFAULT_HORIZON,
        cook_time: int = DEFAULT_COOK_TIME,
        delivery_reward: float = DEFAULT_DELIVERY_REWARD,
        shaping: dict[str, float] | None = None,
    ):
        if layout is None:
            layout = default_layout()
        elif not isinstance(layout, Layout):
            layout = load_layout(layout)
        self.kitchen = Kitchen(layout, cook_time=cook_time, delivery_reward=delivery_reward, horizon=horizon)
        self.obs_size = observation_size(self.kitchen)
        self.shaping = dict(shaping or {})
        unknown = set(self.shaping) - set(EVENTS)
        if unknown:
            raise ValueError(f"unknown shaping events {sorted(unknown)}; known: {EVENTS}")
        self.state: KitchenState = self.kitchen.initial_state()
        self.rng = np.random.default_rng(0)
        self._obs = self._observe()

    @property
    def horizon(self) -> int:
        return self.kitchen.horizon

    @property
    def layout(self) -> Layout:
        return self.kitchen.layout

    @property
    def done(self) -> bool:
        return self.state.step >= self.kitchen.horizon

    def _observe(self) -> tuple[np.ndarray, np.ndarray]:
        return observe(self.state, 0), observe(self.state, 1)

    def reset(self, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
        # The default dynamics draw nothing from the generator; it is kept per
        # episode so stochastic variants stay reproducible from the seed.
        self.rng = np.random.default_rng(seed)
        self.state = self.kitchen.initial_state()
        self._obs = self._observe()
        return self._obs

    def step(self, joint_action: JointAction | Sequence[int]) -> Transition:
        if self.done:
            raise EpisodeFinishedError(
                f"episode finished after {self.kitchen.horizon} steps; call reset() first"
            )
        if not isinstance(joint_action, JointAction):
            joint_action = JointAction.of(*joint_action)
        for a in joint_action.actions:
            if not 0 <= a < N_ACTIONS:
                raise ValueError(f"action {a} outside 0..{N_ACTIONS - 1}")
        obs = self._obs
        self.state, rewards, events = step_kitchen_events(self.state, joint_action)
        self._obs = self._observe()
        shaping = tuple(self.shaping.get(e, 0.0) if e else 0.0 for e in events)
        return Transition(
            state=obs,
            joint_action=joint_action,
            individual_rewards=rewards,
            team_reward=rewards[0] + rewards[1],
            next_state=self._obs,
            done=self.done,
            shaping=shaping,
        )
