"""ASCII kitchen layouts.

One character per cell::

    X  counter            O  onion dispenser     D  dish dispenser
    P  pot                S  delivery (serving)  ' ' floor
    1, 2  spawn points of agent 0 and agent 1 (floor underneath)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path


class Tile(str, Enum):
    FLOOR = "floor"
    COUNTER = "counter"
    ONION_DISPENSER = "onion_dispenser"
    DISH_DISPENSER = "dish_dispenser"
    POT = "pot"
    DELIVERY = "delivery"


CHAR_TO_TILE = {
    " ": Tile.FLOOR,
    "X": Tile.COUNTER,
    "O": Tile.ONION_DISPENSER,
    "D": Tile.DISH_DISPENSER,
    "P": Tile.POT,
    "S": Tile.DELIVERY,
    "1": Tile.FLOOR,
    "2": Tile.FLOOR,
}
TILE_TO_CHAR = {
    Tile.FLOOR: " ",
    Tile.COUNTER: "X",
    Tile.ONION_DISPENSER: "O",
    Tile.DISH_DISPENSER: "D",
    Tile.POT: "P",
    Tile.DELIVERY: "S",
}
REQUIRED = (Tile.ONION_DISPENSER, Tile.DISH_DISPENSER, Tile.POT, Tile.DELIVERY)

Cell = tuple[int, int]  # (row, col)


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Layout:
    width: int
    height: int
    tiles: tuple[tuple[Tile, ...], ...]
    spawn_points: tuple[Cell, Cell]
    name: str = "custom"

    def tile(self, cell: Cell) -> Tile:
        return self.tiles[cell[0]][cell[1]]

    def cells_of(self, kind: Tile) -> tuple[Cell, ...]:
        return tuple(
            (r, c)
            for r in range(self.height)
            for c in range(self.width)
            if self.tiles[r][c] is kind
        )

    @property
    def floor_cells(self) -> tuple[Cell, ...]:
        return self.cells_of(Tile.FLOOR)

    @property
    def pot_cells(self) -> tuple[Cell, ...]:
        return self.cells_of(Tile.POT)

    @property
    def counter_cells(self) -> tuple[Cell, ...]:
        """Counters an agent can actually reach (orthogonally adjacent to floor)."""
        floor = set(self.floor_cells)
        return tuple(
            (r, c)
            for (r, c) in self.cells_of(Tile.COUNTER)
            if {(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)} & floor
        )

    def to_text(self) -> str:
        rows = [[TILE_TO_CHAR[t] for t in row] for row in self.tiles]
        for i, (r, c) in enumerate(self.spawn_points):
            rows[r][c] = str(i + 1)
        return "\n".join("".join(row) for row in rows)


def parse_layout(text: str, name: str = "custom") -> Layout:
    rows = text.split("\n")
    # tolerate one trailing newline at end of file
    if rows and rows[-1] == "":
        rows = rows[:-1]
    if not rows:
        raise LayoutError("layout is empty")
    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise LayoutError(
                f"row {r} has length {len(row)}, expected {width} (layout must be rectangular)"
            )
    height = len(rows)

    tiles: list[tuple[Tile, ...]] = []
    spawns: dict[str, Cell] = {}
    for r, row in enumerate(rows):
        out = []
        for c, ch in enumerate(row):
            if ch not in CHAR_TO_TILE:
                raise LayoutError(f"unknown character {ch!r} at row {r}, column {c}")
            if ch in "12":
                if ch in spawns:
                    raise LayoutError(f"duplicate spawn point {ch!r} at row {r}, column {c}")
                spawns[ch] = (r, c)
            out.append(CHAR_TO_TILE[ch])
        tiles.append(tuple(out))

    for r in range(height):
        for c in range(width):
            on_border = r in (0, height - 1) or c in (0, width - 1)
            if on_border and tiles[r][c] is Tile.FLOOR:
                raise LayoutError(
                    f"floor at row {r}, column {c} lies on the border; grid must be enclosed"
                )

    present = {t for row in tiles for t in row}
    for kind in REQUIRED:
        if kind not in present:
            raise LayoutError(f"layout has no {kind.value} tile")
    if len(spawns) != 2:
        raise LayoutError(f"layout needs exactly 2 spawn points ('1' and '2'), found {len(spawns)}")

    return Layout(
        width=width,
        height=height,
        tiles=tuple(tiles),
        spawn_points=(spawns["1"], spawns["2"]),
        name=name,
    )


def load_layout(path: str | Path) -> Layout:
    path = Path(path)
    return parse_layout(path.read_text(encoding="utf-8"), name=path.stem)


def default_layout_text(name: str = "cramped") -> str:
    return resources.files("teamcurriculum.overcooked").joinpath(f"layouts/{name}.layout").read_text(
        encoding="utf-8"
    )


def default_layout(name: str = "cramped") -> Layout:
    return parse_layout(default_layout_text(name), name=name)
