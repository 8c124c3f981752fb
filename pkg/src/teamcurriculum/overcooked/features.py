"""Egocentric, fully observed feature vectors.

Block order for agent ``i`` (partner ``j``)::

    own position      one-hot over floor cells
    own orientation   one-hot(4)
    own held item     one-hot(4)  nothing/onion/dish/soup
    partner position, orientation, held item   (same encodings)
    per pot           [onion_count / 3, cook_timer / cook_time, ready]
    per counter       one-hot(4) of the item on it (reachable counters only)
    step fraction     step / horizon

The length depends only on the layout.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .kitchen import AgentPose, Kitchen, KitchenState

N_DIRECTIONS = 4
N_ITEMS = 4


def observation_size(kitchen: Kitchen) -> int:
    return _offsets(kitchen)[-1]


@lru_cache(maxsize=32)
def _offsets(kitchen: Kitchen) -> tuple[int, ...]:
    n_floor = len(kitchen.floor)
    agent_block = n_floor + N_DIRECTIONS + N_ITEMS
    own = 0
    partner = own + agent_block
    pots = partner + agent_block
    counters = pots + 3 * len(kitchen.pot_index)
    step = counters + N_ITEMS * len(kitchen.counter_index)
    return own, partner, pots, counters, step, step + 1


@lru_cache(maxsize=32)
def _floor_index(kitchen: Kitchen) -> dict:
    return {cell: i for i, cell in enumerate(kitchen.layout.floor_cells)}


def _write_agent(out: np.ndarray, start: int, pose: AgentPose, floor_index: dict) -> None:
    n_floor = len(floor_index)
    out[start + floor_index[pose.position]] = 1.0
    out[start + n_floor + int(pose.orientation)] = 1.0
    out[start + n_floor + N_DIRECTIONS + int(pose.held)] = 1.0


def observe(state: KitchenState, agent: int) -> np.ndarray:
    kitchen = state.kitchen
    own, partner, pots, counters, step, size = _offsets(kitchen)
    floor_index = _floor_index(kitchen)
    out = np.zeros(size, dtype=np.float64)
    _write_agent(out, own, state.poses[agent], floor_index)
    _write_agent(out, partner, state.poses[1 - agent], floor_index)
    for i, pot in enumerate(state.pots):
        base = pots + 3 * i
        out[base] = pot.onion_count / 3.0
        out[base + 1] = pot.cook_timer / kitchen.cook_time
        out[base + 2] = 1.0 if pot.ready else 0.0
    for i, item in enumerate(state.counters):
        out[counters + N_ITEMS * i + int(item)] = 1.0
    out[step] = state.step / kitchen.horizon
    return out
