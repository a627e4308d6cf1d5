"""Honeycomb key grid geometry: pixel centers, distances, angles, angular bins.

Grids are hex close packed: odd rows are shifted right by half a key width
and the vertical pitch is key_width * sqrt(3)/2, so all six neighbors of an
interior key sit at exactly one key width.

Storage coordinates put the origin at the top-left key center with y growing
downward (screen convention).  Angles use the visual frame instead: 0 deg is
rightward, 90 deg is up on screen, counterclockwise positive.  The flip
between the two happens inside angle_deg and nowhere else.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

NUM_ANGLE_BINS = 16
BIN_WIDTH_DEG = 360.0 / NUM_ANGLE_BINS  # 22.5, exact in binary floating point
HALF_BIN_DEG = BIN_WIDTH_DEG / 2.0

ROW_PITCH_FACTOR = math.sqrt(3.0) / 2.0


class UndefinedAngleError(ValueError):
    """Raised when an angle is requested for two coincident positions."""


@dataclass(frozen=True)
class KeyPosition:
    """One key slot: grid indices plus its pixel center."""

    row: int
    col: int
    center_x: float
    center_y: float


@dataclass(frozen=True)
class HexGrid:
    rows: int
    cols: int
    key_width: float
    positions: tuple[KeyPosition, ...]

    def at(self, row: int, col: int) -> KeyPosition:
        """Position at (row, col); row-major storage makes this O(1)."""
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise IndexError(f"({row}, {col}) outside {self.rows}x{self.cols} grid")
        return self.positions[row * self.cols + col]

    def neighbors(self, pos: KeyPosition) -> list[KeyPosition]:
        """The up-to-six keys at exactly one key-width distance."""
        r, c = pos.row, pos.col
        side = (-1, 0) if r % 2 == 0 else (0, 1)
        candidates = [(r, c - 1), (r, c + 1)]
        for dr in (-1, 1):
            for dc in side:
                candidates.append((r + dr, c + dc))
        return [
            self.at(rr, cc)
            for rr, cc in candidates
            if 0 <= rr < self.rows and 0 <= cc < self.cols
        ]

    def nearest(self, x: float, y: float) -> KeyPosition:
        """Key whose center is closest to pixel (x, y); ties resolve row-major."""
        return min(
            self.positions,
            key=lambda p: ((p.center_x - x) ** 2 + (p.center_y - y) ** 2, p.row, p.col),
        )


def build_grid(rows: int, cols: int, key_width: float) -> HexGrid:
    """Create a rows x cols honeycomb with the given key width in pixels."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {rows}x{cols}")
    if key_width <= 0:
        raise ValueError(f"key width must be positive, got {key_width}")
    positions = []
    for r in range(rows):
        x_off = key_width / 2.0 if r % 2 else 0.0
        y = r * key_width * ROW_PITCH_FACTOR
        for c in range(cols):
            positions.append(KeyPosition(r, c, c * key_width + x_off, y))
    return HexGrid(rows, cols, float(key_width), tuple(positions))


def distance_px(p: KeyPosition, q: KeyPosition) -> float:
    """Euclidean distance between key centers."""
    return math.hypot(q.center_x - p.center_x, q.center_y - p.center_y)


def angle_deg(p: KeyPosition, q: KeyPosition) -> float:
    """Direction of the movement p -> q in [0, 360), visual frame (up = 90)."""
    dx = q.center_x - p.center_x
    dy = p.center_y - q.center_y  # storage y grows downward; visual y grows up
    if dx == 0.0 and dy == 0.0:
        raise UndefinedAngleError("angle undefined for coincident positions")
    return math.degrees(math.atan2(dy, dx)) % 360.0


def angle_bin(angle: float) -> int:
    """Bin index 0..15 for an angle in [0, 360).

    Bin k is centered on k*22.5 deg and covers [k*22.5 - 11.25, k*22.5 + 11.25),
    lower edge inclusive, wrapping at 360.  Even bins are the cardinal and
    intercardinal directions, odd bins the half-directions between them.
    """
    return int(((angle + HALF_BIN_DEG) % 360.0) // BIN_WIDTH_DEG) % NUM_ANGLE_BINS


def bin_center_deg(index: int) -> float:
    """Center angle of bin `index` in degrees."""
    return (index % NUM_ANGLE_BINS) * BIN_WIDTH_DEG


def grid_to_dict(grid: HexGrid) -> dict:
    return {
        "rows": grid.rows,
        "cols": grid.cols,
        "key_width_px": grid.key_width,
        "positions": [
            {"row": p.row, "col": p.col, "cx": p.center_x, "cy": p.center_y}
            for p in grid.positions
        ],
    }


def grid_from_dict(doc: dict) -> HexGrid:
    grid = build_grid(doc["rows"], doc["cols"], doc["key_width_px"])
    # Stored centers must agree with the construction rule; reject edits.
    for p, entry in zip(grid.positions, doc["positions"]):
        if (p.row, p.col) != (entry["row"], entry["col"]):
            raise ValueError("positions not in row-major order")
        if abs(p.center_x - entry["cx"]) > 1e-9 or abs(p.center_y - entry["cy"]) > 1e-9:
            raise ValueError(f"center mismatch at ({p.row}, {p.col})")
    return grid


def grid_to_json(grid: HexGrid) -> str:
    return json.dumps(grid_to_dict(grid), sort_keys=True)


def grid_from_json(text: str) -> HexGrid:
    return grid_from_dict(json.loads(text))
