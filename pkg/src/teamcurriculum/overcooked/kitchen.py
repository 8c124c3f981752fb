"""Kitchen state and transition rules for the two-agent soup gridworld.

Per step, in this order:

1. pots that are cooking tick down one step (reaching 0 makes them ready);
2. ``interact`` actions resolve against the tile each agent faces;
3. movement resolves, with the collision rule applied to both agents at once;
4. the step counter advances.

Illegal interactions are silent no-ops.  When both agents interact with the
same tile in the same step neither interaction happens, so agent index never
buys priority.

Besides the sparse delivery reward, a step reports pipeline events per agent
(``onion_in_pot``, ``useful_dish``, ``soup_pickup``).  They carry no reward
here; a training loop may turn them into a shaping bonus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

import numpy as np

from ..mmdp import JointAction
from .layout import Cell, Layout, Tile

DEFAULT_COOK_TIME = 20
DEFAULT_DELIVERY_REWARD = 20.0
DEFAULT_HORIZON = 500


class Action(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3
    STAY = 4
    INTERACT = 5


N_ACTIONS = len(Action)

ONION_IN_POT = "onion_in_pot"
USEFUL_DISH = "useful_dish"
SOUP_PICKUP = "soup_pickup"
EVENTS = (ONION_IN_POT, USEFUL_DISH, SOUP_PICKUP)


class Direction(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3


DELTAS = {
    Direction.NORTH: (-1, 0),
    Direction.SOUTH: (1, 0),
    Direction.EAST: (0, 1),
    Direction.WEST: (0, -1),
}


class Item(IntEnum):
    NOTHING = 0
    ONION = 1
    DISH = 2
    SOUP = 3


def facing_cell(position: Cell, orientation: Direction) -> Cell:
    dr, dc = DELTAS[orientation]
    return (position[0] + dr, position[1] + dc)


@dataclass(frozen=True)
class AgentPose:
    position: Cell
    orientation: Direction = Direction.NORTH
    held: Item = Item.NOTHING


@dataclass(frozen=True)
class PotState:
    onion_count: int = 0
    cook_timer: int = 0
    ready: bool = False

    def check(self) -> None:
        if not 0 <= self.onion_count <= 3:
            raise AssertionError(f"pot onion count {self.onion_count} outside 0..3")
        if self.cook_timer < 0:
            raise AssertionError("negative cook timer")
        if self.cook_timer > 0 and (self.onion_count != 3 or self.ready):
            raise AssertionError(f"cooking pot in inconsistent state: {self}")
        if self.ready and (self.onion_count != 3 or self.cook_timer != 0):
            raise AssertionError(f"ready pot in inconsistent state: {self}")
        if self.onion_count < 3 and (self.cook_timer != 0 or self.ready):
            raise AssertionError(f"unfilled pot in inconsistent state: {self}")

    @property
    def full(self) -> bool:
        return self.onion_count == 3


@dataclass(frozen=True, eq=False)
class Kitchen:
    """A layout plus the rules that govern it, with cell lookup tables."""

    layout: Layout
    cook_time: int = DEFAULT_COOK_TIME
    delivery_reward: float = DEFAULT_DELIVERY_REWARD
    horizon: int = DEFAULT_HORIZON
    pot_index: dict[Cell, int] = field(init=False, repr=False)
    counter_index: dict[Cell, int] = field(init=False, repr=False)
    floor: frozenset[Cell] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.cook_time < 1:
            raise ValueError("cook_time must be at least 1")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        object.__setattr__(self, "pot_index", {c: i for i, c in enumerate(self.layout.pot_cells)})
        object.__setattr__(
            self, "counter_index", {c: i for i, c in enumerate(self.layout.counter_cells)}
        )
        object.__setattr__(self, "floor", frozenset(self.layout.floor_cells))

    def initial_state(self) -> "KitchenState":
        return KitchenState(
            kitchen=self,
            poses=tuple(AgentPose(position=p) for p in self.layout.spawn_points),
            pots=tuple(PotState() for _ in self.pot_index),
            counters=tuple(Item.NOTHING for _ in self.counter_index),
            step=0,
        )


@dataclass(frozen=True)
class KitchenState:
    kitchen: Kitchen = field(compare=False)
    poses: tuple[AgentPose, AgentPose]
    pots: tuple[PotState, ...]
    counters: tuple[Item, ...]
    step: int = 0

    @property
    def layout(self) -> Layout:
        return self.kitchen.layout

    def onion_total(self) -> int:
        held = sum(p.held is Item.ONION for p in self.poses)
        return held + sum(p.onion_count for p in self.pots) + sum(c is Item.ONION for c in self.counters)

    def check(self) -> None:
        """Raise AssertionError if any state invariant is broken."""
        for pot in self.pots:
            pot.check()
        a, b = self.poses
        if a.position == b.position:
            raise AssertionError(f"agents co-located at {a.position}")
        for pose in self.poses:
            if pose.position not in self.kitchen.floor:
                raise AssertionError(f"agent off the floor at {pose.position}")
        if not 0 <= self.step <= self.kitchen.horizon:
            raise AssertionError(f"step {self.step} outside 0..{self.kitchen.horizon}")

    def render(self) -> str:
        """ASCII dump for debugging; agents drawn as their index, pots as onion counts."""
        layout = self.layout
        grid = [list(row) for row in layout.to_text().replace("1", " ").replace("2", " ").split("\n")]
        for cell, i in self.kitchen.pot_index.items():
            pot = self.pots[i]
            grid[cell[0]][cell[1]] = "R" if pot.ready else str(pot.onion_count)
        item_char = {Item.ONION: "o", Item.DISH: "d", Item.SOUP: "s"}
        for cell, i in self.kitchen.counter_index.items():
            if self.counters[i] is not Item.NOTHING:
                grid[cell[0]][cell[1]] = item_char[self.counters[i]]
        for i, pose in enumerate(self.poses):
            grid[pose.position[0]][pose.position[1]] = "ab"[i] if pose.held is Item.NOTHING else "AB"[i]
        lines = ["".join(row) for row in grid]
        lines.append(
            f"step={self.step} held={[p.held.name for p in self.poses]} "
            f"pots={[(p.onion_count, p.cook_timer, p.ready) for p in self.pots]}"
        )
        return "\n".join(lines)


def _tick_pots(pots: tuple[PotState, ...]) -> list[PotState]:
    out = []
    for pot in pots:
        if pot.cook_timer > 0:
            remaining = pot.cook_timer - 1
            pot = PotState(3, remaining, remaining == 0)
        out.append(pot)
    return out


def _interact(
    kitchen: Kitchen,
    held: Item,
    partner_held: Item,
    target: Cell,
    pots: list[PotState],
    counters: list[Item],
) -> tuple[Item, float, str | None]:
    """Apply one interaction in place on pots/counters.

    Returns the new held item, the sparse reward, and the pipeline event (if any).
    """
    tile = kitchen.layout.tile(target)
    if tile is Tile.ONION_DISPENSER:
        if held is Item.NOTHING:
            return Item.ONION, 0.0, None
    elif tile is Tile.DISH_DISPENSER:
        if held is Item.NOTHING:
            useful = any(p.full for p in pots) and partner_held not in (Item.DISH, Item.SOUP)
            return Item.DISH, 0.0, USEFUL_DISH if useful else None
    elif tile is Tile.POT:
        i = kitchen.pot_index[target]
        pot = pots[i]
        if held is Item.ONION and pot.onion_count < 3:
            count = pot.onion_count + 1
            pots[i] = PotState(count, kitchen.cook_time if count == 3 else 0, False)
            return Item.NOTHING, 0.0, ONION_IN_POT
        if held is Item.DISH and pot.ready:
            pots[i] = PotState()
            return Item.SOUP, 0.0, SOUP_PICKUP
    elif tile is Tile.DELIVERY:
        if held is Item.SOUP:
            return Item.NOTHING, kitchen.delivery_reward, None
    elif tile is Tile.COUNTER:
        i = kitchen.counter_index[target]
        if held is not Item.NOTHING and counters[i] is Item.NOTHING:
            counters[i] = held
            return Item.NOTHING, 0.0, None
        if held is Item.NOTHING and counters[i] is not Item.NOTHING:
            item = counters[i]
            counters[i] = Item.NOTHING
            return item, 0.0, None
    return held, 0.0, None


def step_kitchen(
    state: KitchenState,
    joint_action: JointAction | Sequence[int],
    rng: np.random.Generator | None = None,
) -> tuple[KitchenState, tuple[float, float]]:
    """Advance the kitchen by one step; returns the new state and per-agent rewards.

    The dynamics are deterministic; ``rng`` is accepted so stochastic variants
    can share the signature, and is ignored here.
    """
    new_state, rewards, _ = step_kitchen_events(state, joint_action)
    return new_state, rewards


def step_kitchen_events(
    state: KitchenState,
    joint_action: JointAction | Sequence[int],
) -> tuple[KitchenState, tuple[float, float], tuple[str | None, str | None]]:
    """:func:`step_kitchen` that also reports each agent's pipeline event."""
    kitchen = state.kitchen
    if state.step >= kitchen.horizon:
        raise ValueError(f"kitchen already at horizon {kitchen.horizon}")
    actions = joint_action.actions if isinstance(joint_action, JointAction) else tuple(joint_action)
    a0, a1 = (Action(a) for a in actions)

    pots = _tick_pots(state.pots)
    counters = list(state.counters)
    poses = list(state.poses)
    rewards = [0.0, 0.0]
    events: list[str | None] = [None, None]

    targets = [
        facing_cell(p.position, p.orientation) if a is Action.INTERACT else None
        for p, a in zip(poses, (a0, a1))
    ]
    if targets[0] is not None and targets[0] == targets[1]:
        targets = [None, None]
    for i, target in enumerate(targets):
        if target is None:
            continue
        held, reward, event = _interact(kitchen, poses[i].held, poses[1 - i].held, target, pots, counters)
        if held is not poses[i].held:
            poses[i] = AgentPose(poses[i].position, poses[i].orientation, held)
        rewards[i] = reward
        events[i] = event

    proposed = []
    for pose, a in zip(poses, (a0, a1)):
        if a <= Action.WEST:
            direction = Direction(int(a))
            cell = facing_cell(pose.position, direction)
            proposed.append((cell if cell in kitchen.floor else pose.position, direction))
        else:
            proposed.append((pose.position, pose.orientation))
    (p0, d0), (p1, d1) = proposed
    old0, old1 = poses[0].position, poses[1].position
    if p0 == p1 or (p0 == old1 and p1 == old0):
        p0, p1 = old0, old1
    poses[0] = AgentPose(p0, d0, poses[0].held)
    poses[1] = AgentPose(p1, d1, poses[1].held)

    new_state = KitchenState(
        kitchen=kitchen,
        poses=(poses[0], poses[1]),
        pots=tuple(pots),
        counters=tuple(counters),
        step=state.step + 1,
    )
    return new_state, (rewards[0], rewards[1]), (events[0], events[1])
