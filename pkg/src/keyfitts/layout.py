"""Keyboard layouts: personalized/generic synthesis, QWERTY, flips, scoring.

A layout assigns the 27 characters to key positions on a honeycomb grid.
Synthesis poses a quadratic assignment problem: flow is the digraph joint
probability matrix (zero-padded with dummy characters up to the number of
grid positions, which is how differently shaped keyboards emerge from one
grid), cost is the matrix of predicted movement times between positions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import hexgeom
from . import qap
from .corpus import ALPHABET, N_CHARS, DigraphMatrix, joint_probabilities
from .corpus import digraphs_to_json as digraphs_json
from .fitts import DirectionalFittsModel, generic_model, predict_mt
from .fitts import model_to_json as fitts_model_json
from .hexgeom import HexGrid, KeyPosition, angle_deg, build_grid, distance_px


def _content_ref(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()[:16]

LAYOUT_KINDS = ("personalized", "generic", "qwerty")

QWERTY_ROWS = ("QWERTYUIOP", "ASDFGHJKL", "ZXCVBNM ")

MAX_GRID_ROWS = 9
MAX_GRID_COLS = 10  # the QWERTY top row needs ten columns


@dataclass(frozen=True)
class KeyboardLayout:
    grid: HexGrid
    assignment: Mapping[str, KeyPosition]
    kind: str
    provenance: dict

    def __post_init__(self):
        if self.kind not in LAYOUT_KINDS:
            raise ValueError(f"unknown layout kind {self.kind!r}")
        if self.grid.rows > MAX_GRID_ROWS or self.grid.cols > MAX_GRID_COLS:
            raise ValueError("grid exceeds supported key extent")
        if set(self.assignment) != set(ALPHABET):
            raise ValueError("assignment must cover exactly the 27-character alphabet")
        seen = set()
        for ch, pos in self.assignment.items():
            if self.grid.at(pos.row, pos.col) != pos:
                raise ValueError(f"position for {ch!r} is not on the grid")
            if (pos.row, pos.col) in seen:
                raise ValueError("assignment positions must be distinct")
            seen.add((pos.row, pos.col))

    def position_of(self, char: str) -> KeyPosition:
        return self.assignment[char]


def build_cost_matrix(model: DirectionalFittsModel, grid: HexGrid) -> np.ndarray:
    """Predicted movement time between every pair of grid positions.

    Entry [p][q] is the time to move from p to q; the diagonal carries the
    mean intercept (a click in place).
    """
    xs = np.array([p.center_x for p in grid.positions])
    ys = np.array([p.center_y for p in grid.positions])
    dx = xs[None, :] - xs[:, None]
    dy_vis = ys[:, None] - ys[None, :]  # visual frame: up positive
    dist = np.hypot(dx, dy_vis)
    ang = np.degrees(np.arctan2(dy_vis, dx)) % 360.0
    bins = (((ang + hexgeom.HALF_BIN_DEG) % 360.0) // hexgeom.BIN_WIDTH_DEG).astype(int) % 16
    a_eff, b_eff = model.effective_constants()
    a_arr = np.asarray(a_eff)[bins]
    b_arr = np.asarray(b_eff)[bins]
    ident = np.log2(dist / model.key_width + 1.0)
    cost = np.maximum(a_arr + b_arr * ident, 0.0)
    np.fill_diagonal(cost, model.mean_intercept)
    return cost


def generate_layout(
    kind: str,
    model: DirectionalFittsModel | None,
    digraphs: DigraphMatrix,
    grid: HexGrid,
    seed: int,
    restarts: int = qap.DEFAULT_RESTARTS,
    max_iters: int = qap.DEFAULT_MAX_ITERS,
    tol: float = qap.DEFAULT_TOL,
    model_ref: str | None = None,
    corpus_ref: str | None = None,
) -> KeyboardLayout:
    """Solve the assignment of the 27 characters onto the grid.

    kind 'generic' always uses the standard isotropic constants; kind
    'personalized' uses the supplied directional model.  Deterministic for a
    given seed.
    """
    if kind not in ("personalized", "generic"):
        raise ValueError("generate_layout builds 'personalized' or 'generic' layouts")
    m = len(grid.positions)
    if m < N_CHARS:
        raise ValueError(f"grid has {m} positions; need at least {N_CHARS}")
    if kind == "generic":
        used_model = generic_model(grid.key_width)
    else:
        if model is None:
            raise ValueError("personalized layout requires a fitted model")
        used_model = model

    flow = np.zeros((m, m))
    flow[:N_CHARS, :N_CHARS] = joint_probabilities(digraphs)
    cost = build_cost_matrix(used_model, grid)
    instance = qap.QapInstance(flow, cost)
    result = qap.solve_faq(instance, restarts=restarts, max_iters=max_iters, tol=tol, seed=seed)

    assignment = {
        ch: grid.positions[result.mapping[i]] for i, ch in enumerate(ALPHABET)
    }
    # Content-hash refs by default so every generation path (library, CLI,
    # service) emits byte-identical files for identical inputs.
    if model_ref is None and kind == "personalized":
        model_ref = _content_ref(fitts_model_json(model))
    if corpus_ref is None:
        corpus_ref = _content_ref(digraphs_json(digraphs))
    provenance = {
        "model": model_ref if kind == "personalized" else None,
        "corpus": corpus_ref,
        "seed": seed,
        "solver": {"restarts": restarts, "max_iters": max_iters, "tol": tol},
    }
    return KeyboardLayout(grid, assignment, kind, provenance)


def qwerty_layout(key_width: float = 130.0) -> KeyboardLayout:
    """The typewriter layout on its own 3-row honeycomb (10/9/8 keys).

    The space key has the same width as every other key and sits immediately
    right of M.
    """
    grid = build_grid(3, 10, key_width)
    assignment = {}
    for r, row in enumerate(QWERTY_ROWS):
        for c, ch in enumerate(row):
            assignment[ch] = grid.at(r, c)
    return KeyboardLayout(grid, assignment, "qwerty", {"model": None, "corpus": None, "seed": None, "solver": None})


def flip_vertical(layout: KeyboardLayout) -> KeyboardLayout:
    """Mirror the layout top-to-bottom; column indices are preserved."""
    rows = layout.grid.rows
    assignment = {
        ch: layout.grid.at(rows - 1 - pos.row, pos.col)
        for ch, pos in layout.assignment.items()
    }
    provenance = dict(layout.provenance)
    if provenance.pop("flipped", False) is False:
        provenance["flipped"] = True
    return KeyboardLayout(layout.grid, assignment, layout.kind, provenance)


def fitts_digraph_energy(
    layout: KeyboardLayout, digraphs: DigraphMatrix, model: DirectionalFittsModel
) -> float:
    """Expected movement time per keystroke under the digraph distribution."""
    probs = joint_probabilities(digraphs)
    energy = 0.0
    positions = [layout.assignment[ch] for ch in ALPHABET]
    for i in range(N_CHARS):
        for j in range(N_CHARS):
            p = probs[i, j]
            if p == 0.0:
                continue
            if i == j:
                energy += p * model.mean_intercept
            else:
                pi, pj = positions[i], positions[j]
                energy += p * predict_mt(model, angle_deg(pi, pj), distance_px(pi, pj))
    return energy


def layout_to_dict(layout: KeyboardLayout) -> dict:
    return {
        "kind": layout.kind,
        "grid": hexgeom.grid_to_dict(layout.grid),
        "keys": [
            {
                "char": ch,
                "row": layout.assignment[ch].row,
                "col": layout.assignment[ch].col,
                "cx": layout.assignment[ch].center_x,
                "cy": layout.assignment[ch].center_y,
            }
            for ch in ALPHABET
        ],
        "provenance": layout.provenance,
    }


def layout_from_dict(doc: dict) -> KeyboardLayout:
    grid = hexgeom.grid_from_dict(doc["grid"])
    assignment = {}
    for entry in doc["keys"]:
        pos = grid.at(entry["row"], entry["col"])
        if abs(pos.center_x - entry["cx"]) > 1e-9 or abs(pos.center_y - entry["cy"]) > 1e-9:
            raise ValueError(f"stored center for {entry['char']!r} disagrees with grid")
        assignment[entry["char"]] = pos
    return KeyboardLayout(grid, assignment, doc["kind"], doc["provenance"])


def layout_to_json(layout: KeyboardLayout) -> str:
    return json.dumps(layout_to_dict(layout), sort_keys=True)


def layout_from_json(text: str) -> KeyboardLayout:
    return layout_from_dict(json.loads(text))
