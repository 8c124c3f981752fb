"""Hand-written controller that runs the full soup loop.

It exists to check the environment without any learning involved.  Both
agents may run it at once: the fetch rules keep them from collecting more
onions or dishes than the pot can use, and agent 0 has right of way, with
agent 1 planning around agent 0's current and next cell.
"""

from __future__ import annotations

from collections import deque

from .kitchen import DELTAS, Action, Direction, Item, KitchenState, facing_cell
from .layout import Cell, Tile

STATIONS = (Tile.ONION_DISPENSER, Tile.DISH_DISPENSER, Tile.POT, Tile.DELIVERY)


def _adjacent_floor(state: KitchenState, target: Cell) -> list[tuple[Cell, Direction]]:
    """Floor cells next to ``target`` with the direction an agent there must face."""
    out = []
    for d, (dr, dc) in DELTAS.items():
        cell = (target[0] - dr, target[1] - dc)
        if cell in state.kitchen.floor:
            out.append((cell, d))
    return out


def _first_move(state: KitchenState, start: Cell, goals: set[Cell], blocked: set[Cell]) -> Direction | None:
    """First step of a shortest floor path from ``start`` into ``goals`` (BFS)."""
    floor = state.kitchen.floor
    parent: dict[Cell, tuple[Cell, Direction] | None] = {start: None}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        if cell in goals:
            step = parent[cell]
            while step is not None and step[0] != start:
                cell = step[0]
                step = parent[cell]
            return None if step is None else step[1]
        for d in Direction:
            nxt = facing_cell(cell, d)
            if nxt in floor and nxt not in blocked and nxt not in parent:
                parent[nxt] = (cell, d)
                queue.append(nxt)
    return None


class _Planner:
    def __init__(self, state: KitchenState, agent: int, avoid: frozenset[Cell] = frozenset()):
        self.state = state
        self.agent = agent
        self.pose = state.poses[agent]
        self.partner = state.poses[1 - agent]
        self.blocked = {self.partner.position} | set(avoid)

    def sidestep(self) -> int:
        if self.agent == 0:
            return int(Action.STAY)
        here = self.pose.position
        free = [
            d for d in Direction
            if facing_cell(here, d) in self.state.kitchen.floor and facing_cell(here, d) not in self.blocked
        ]
        if not free:
            return int(Action.STAY)
        return int(free[self.state.step % len(free)])

    def go_and_interact(self, targets: tuple[Cell, ...], act: bool = True) -> int:
        spots = {cell: d for t in targets for cell, d in _adjacent_floor(self.state, t)}
        here = self.pose.position
        if here in spots:
            d = spots[here]
            if self.pose.orientation == d:
                return int(Action.INTERACT) if act else int(Action.STAY)
            return int(d)  # moving into a non-floor tile only turns
        move = _first_move(self.state, here, set(spots) - self.blocked, self.blocked)
        return self.sidestep() if move is None else int(move)

    def idle(self) -> int:
        """Get off station access cells so the partner can use them."""
        busy = set()
        for kind in STATIONS:
            for t in self.state.layout.cells_of(kind):
                busy.update(cell for cell, _ in _adjacent_floor(self.state, t))
        parking = set(self.state.kitchen.floor) - busy - self.blocked
        if self.pose.position in parking:
            return int(Action.STAY)
        move = _first_move(self.state, self.pose.position, parking, self.blocked) if parking else None
        return self.sidestep() if move is None else int(move)

    def plan(self) -> int:
        state, pose, partner = self.state, self.pose, self.partner
        layout = state.layout
        pots = state.pots
        pot_cells = layout.pot_cells

        if pose.held is Item.SOUP:
            return self.go_and_interact(layout.cells_of(Tile.DELIVERY))
        if pose.held is Item.DISH:
            ready = tuple(c for c, p in zip(pot_cells, pots) if p.ready)
            if ready:
                return self.go_and_interact(ready)
            full = tuple(c for c, p in zip(pot_cells, pots) if p.full)
            return self.go_and_interact(full or pot_cells, act=False)
        if pose.held is Item.ONION:
            open_pots = tuple(c for c, p in zip(pot_cells, pots) if p.onion_count < 3)
            return self.go_and_interact(open_pots) if open_pots else self.idle()

        full_pots = sum(p.full for p in pots)
        dishes_out = sum(p.held in (Item.DISH, Item.SOUP) for p in (pose, partner))
        if full_pots > dishes_out:
            return self.go_and_interact(layout.cells_of(Tile.DISH_DISPENSER))
        missing = sum(3 - p.onion_count for p in pots if p.onion_count < 3)
        if missing > (partner.held is Item.ONION):
            return self.go_and_interact(layout.cells_of(Tile.ONION_DISPENSER))
        return self.idle()


def scripted_delivery_policy(state: KitchenState, agent: int) -> int:
    if agent == 0:
        return _Planner(state, 0).plan()
    first = state.poses[0].position
    other = _Planner(state, 0).plan()
    if other <= Action.WEST:
        nxt = facing_cell(first, Direction(other))
        if nxt in state.kitchen.floor and nxt != state.poses[1].position:
            first = nxt
    return _Planner(state, 1, avoid=frozenset({first})).plan()
