"""Learning-free environment checks: scripted oracle and random-play invariants."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..overcooked.env import OvercookedEnv
from ..overcooked.kitchen import Item, KitchenState, facing_cell, step_kitchen_events
from ..overcooked.layout import Tile
from ..overcooked.scripted import scripted_delivery_policy


@dataclass
class ScriptedResult:
    deliveries: int
    team_reward: float
    steps: int
    seconds: float


def run_scripted(env: OvercookedEnv, seed: int = 0) -> ScriptedResult:
    env.reset(seed)
    deliveries = 0
    team = 0.0
    t0 = time.perf_counter()
    while not env.done:
        state = env.state
        actions = (scripted_delivery_policy(state, 0), scripted_delivery_policy(state, 1))
        tr = env.step(actions)
        deliveries += sum(
            1
            for i in (0, 1)
            if state.poses[i].held is Item.SOUP and env.state.poses[i].held is Item.NOTHING
        )
        team += tr.team_reward
    return ScriptedResult(deliveries, team, env.horizon, time.perf_counter() - t0)


def check_step(before: KitchenState, after: KitchenState) -> None:
    """Raise AssertionError if one transition breaks conservation, placement or pot rules."""
    after.check()
    plated = sum(
        1
        for p0, p1 in zip(before.pots, after.pots)
        if p0.ready and p1.onion_count == 0
    )
    picked = sum(
        1
        for i in (0, 1)
        if after.poses[i].held is Item.ONION
        and before.poses[i].held is Item.NOTHING
        and _picked_from_dispenser(before, after, i)
    )
    expected = before.onion_total() + picked - 3 * plated
    if after.onion_total() != expected:
        raise AssertionError(
            f"onion count {before.onion_total()} -> {after.onion_total()}, expected {expected} "
            f"(picked {picked}, plated {plated})"
        )
    for p0, p1 in zip(before.pots, after.pots):
        if p0.cook_timer > 0 and p1.cook_timer != p0.cook_timer - 1:
            raise AssertionError(f"cook timer went {p0.cook_timer} -> {p1.cook_timer}")
        if p0.ready and not p1.ready and p1.onion_count != 0:
            raise AssertionError("ready pot lost readiness without being plated")


def _picked_from_dispenser(before: KitchenState, after: KitchenState, agent: int) -> bool:
    pose = before.poses[agent]
    return before.layout.tile(facing_cell(pose.position, pose.orientation)) is Tile.ONION_DISPENSER


def random_invariant_sweep(env: OvercookedEnv, steps: int, seed: int = 0) -> int:
    """Take ``steps`` uniformly random joint actions, checking every transition; returns steps checked."""
    rng = np.random.default_rng(seed)
    env.reset(seed)
    for _ in range(steps):
        if env.done:
            env.reset(seed)
        before = env.state
        actions = rng.integers(0, env.n_actions, size=2)
        after, _, _ = step_kitchen_events(before, actions)
        check_step(before, after)
        env.step(actions)
        if env.state != after:
            raise AssertionError("env.step diverged from step_kitchen")
    return steps
