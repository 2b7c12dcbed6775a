"""Discrete terrain maps and terrain traversal probabilities.

Map file format::

    width height cell_size origin_x origin_y
    pT road field forest          (optional)
    <height rows of width characters from {R, F, T}, north row first>

``R`` is road, ``F`` field and ``T`` forest (trees).  Whitespace between cell
characters is ignored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class TerrainClass(enum.IntEnum):
    ROAD = 0
    FIELD = 1
    FOREST = 2

    @property
    def char(self) -> str:
        return _CHARS[self]


_CHARS = {TerrainClass.ROAD: "R", TerrainClass.FIELD: "F", TerrainClass.FOREST: "T"}
_FROM_CHAR = {c: k for k, c in _CHARS.items()}

DEFAULT_PT = {TerrainClass.ROAD: 0.66, TerrainClass.FIELD: 0.33, TerrainClass.FOREST: 0.01}


class MapParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(eq=False)
class TerrainMap:
    """Terrain grid.  ``cells[r, c]`` holds the class of row ``r`` counted
    from the southern edge, column ``c`` counted from the western edge."""

    cells: np.ndarray
    cell_size: float
    origin_x: float = 0.0
    origin_y: float = 0.0
    p_t: dict = field(default_factory=lambda: dict(DEFAULT_PT))
    pt_explicit: bool = False

    def __post_init__(self):
        self.cells = np.ascontiguousarray(self.cells, dtype=np.int8)
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise ValueError("cells must be a non-empty 2-D grid")
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be > 0, got {self.cell_size}")
        if self.cells.min() < 0 or self.cells.max() > 2:
            raise ValueError("cells hold unknown terrain codes")
        self.p_t = {TerrainClass(k): float(v) for k, v in self.p_t.items()}
        for k in TerrainClass:
            p = self.p_t.setdefault(k, DEFAULT_PT[k])
            if not 0.0 < p <= 1.0:
                raise ValueError(f"p_T({k.name.lower()}) must lie in (0, 1], got {p}")
        self._lut = np.array([self.p_t[k] for k in TerrainClass])
        self.cells.setflags(write=False)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def extent(self) -> tuple[float, float]:
        return self.width * self.cell_size, self.height * self.cell_size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TerrainMap):
            return NotImplemented
        return (np.array_equal(self.cells, other.cells)
                and self.cell_size == other.cell_size
                and self.origin_x == other.origin_x
                and self.origin_y == other.origin_y
                and self.p_t == other.p_t)

    def cell_index(self, x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row, column and an in-bounds mask for arrays of positions."""
        col = np.floor((np.asarray(x, dtype=float) - self.origin_x) / self.cell_size)
        row = np.floor((np.asarray(y, dtype=float) - self.origin_y) / self.cell_size)
        inside = (col >= 0) & (col < self.width) & (row >= 0) & (row < self.height)
        return (np.where(inside, row, 0).astype(np.intp),
                np.where(inside, col, 0).astype(np.intp), inside)

    def classify_many(self, x, y) -> np.ndarray:
        row, col, inside = self.cell_index(x, y)
        return np.where(inside, self.cells[row, col], TerrainClass.FOREST).astype(np.int8)

    def weights(self, x, y) -> np.ndarray:
        return self._lut[self.classify_many(x, y)]

    def fractions(self) -> dict:
        counts = np.bincount(self.cells.ravel(), minlength=3)
        return {k: counts[k] / self.cells.size for k in TerrainClass}


def classify(tmap: TerrainMap, x: float, y: float) -> TerrainClass:
    """Terrain class at a point; anything off the map counts as forest."""
    return TerrainClass(int(tmap.classify_many(x, y)))


def terrain_weight(tmap: TerrainMap, x: float, y: float) -> float:
    return float(tmap.weights(x, y))


def _parse_floats(tokens, lineno, what):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise MapParseError(lineno, f"malformed {what}: {' '.join(tokens)!r}") from None


def load_map(text: str) -> TerrainMap:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MapParseError(1, "empty map file")

    head = lines[0].split()
    if len(head) != 5:
        raise MapParseError(1, f"expected 'width height cell_size origin_x origin_y', got {lines[0]!r}")
    w, h, cell, ox, oy = _parse_floats(head, 1, "header")
    if w != int(w) or h != int(h) or w < 1 or h < 1:
        raise MapParseError(1, f"width and height must be positive integers, got {head[0]} {head[1]}")
    if cell <= 0:
        raise MapParseError(1, f"cell_size must be > 0, got {head[2]}")
    w, h = int(w), int(h)

    p_t, explicit, first = dict(DEFAULT_PT), False, 1
    if len(lines) > 1 and lines[1].split()[:1] == ["pT"]:
        vals = lines[1].split()[1:]
        if len(vals) != 3:
            raise MapParseError(2, "pT line needs three values: road field forest")
        vals = _parse_floats(vals, 2, "pT line")
        if not all(0.0 < v <= 1.0 for v in vals):
            raise MapParseError(2, f"pT values must lie in (0, 1], got {vals}")
        p_t = dict(zip(TerrainClass, vals))
        explicit, first = True, 2

    rows = lines[first:]
    if len(rows) != h:
        raise MapParseError(first + min(len(rows), h) + 1,
                            f"expected {h} grid rows, found {len(rows)}")
    cells = np.empty((h, w), dtype=np.int8)
    for i, line in enumerate(rows):
        lineno = first + i + 1
        chars = "".join(line.split())
        if len(chars) != w:
            raise MapParseError(lineno, f"expected {w} cells, found {len(chars)}")
        try:
            # file rows run north to south; cells[0] is the southern row
            cells[h - 1 - i] = [_FROM_CHAR[c] for c in chars]
        except KeyError as e:
            raise MapParseError(lineno, f"unknown cell character {e.args[0]!r}") from None
    return TerrainMap(cells, cell, ox, oy, p_t, explicit)


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def save_map(tmap: TerrainMap) -> str:
    out = [" ".join(_num(v) for v in (tmap.width, tmap.height, tmap.cell_size,
                                       tmap.origin_x, tmap.origin_y))]
    if tmap.pt_explicit or tmap.p_t != DEFAULT_PT:
        out.append("pT " + " ".join(_num(tmap.p_t[k]) for k in TerrainClass))
    chars = np.array([_CHARS[k] for k in TerrainClass])
    for row in tmap.cells[::-1]:
        out.append("".join(chars[row]))
    return "\n".join(out) + "\n"


def read_map(path) -> TerrainMap:
    with open(path) as fh:
        return load_map(fh.read())


def write_map(tmap: TerrainMap, path) -> None:
    with open(path, "w") as fh:
        fh.write(save_map(tmap))
