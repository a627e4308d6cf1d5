"""The movement characterization protocol.

A session walks a queue of target demands over the honeycomb grid.  Each
demand asks for a target at a given hop-distance class (0..8, in units of
key width) and angular bin (0..15).  Distances match a demand when they fall
in the half-open band [k*w - w/2, k*w + w/2), so the bands partition all
distances.  Every successful selection yields one movement sample; misses
are logged but never become samples.

After the initial 225-demand queue drains, weak bins (R^2 <= 0.25 or fewer
than 10 samples) and flagged outliers trigger refinement rounds until either
everything is healthy or 400 targets have been presented.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass
from functools import lru_cache

from . import hexgeom
from .fitts import DirectionalFittsModel, MovementSample, fit_bins, predict_mt
from .hexgeom import (
    NUM_ANGLE_BINS,
    HexGrid,
    KeyPosition,
    angle_bin,
    angle_deg,
    build_grid,
    distance_px,
)

NUM_DISTANCE_CLASSES = 9  # hop classes 0..8
INITIAL_DEMANDS = 225
PER_CLASS_DEMANDS = 25
MAX_PRESENTED = 400
MAX_DEFERRALS = 3
WEAK_R2 = 0.25
MIN_BIN_SAMPLES = 10
_MAX_REFINE_ROUNDS = 64  # hard stop against degenerate refine loops

LOG_VERSION = 1


class ProtocolStallError(RuntimeError):
    """The queue ran out with every remaining demand infeasible."""

    def __init__(self, dropped):
        super().__init__(f"protocol stalled; {len(dropped)} demands dropped")
        self.dropped = list(dropped)


class LogParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ReplayError(ValueError):
    pass


class Phase(enum.Enum):
    INITIAL = "initial"
    REFINING = "refining"
    COMPLETE = "complete"


@dataclass(frozen=True)
class TargetDemand:
    distance_class: int
    angle_bin: int

    def __post_init__(self):
        if not 0 <= self.distance_class < NUM_DISTANCE_CLASSES:
            raise ValueError("distance class out of range")
        if not 0 <= self.angle_bin < NUM_ANGLE_BINS:
            raise ValueError("angle bin out of range")


@dataclass(frozen=True)
class SelectionEvent:
    sequence_no: int
    demand: TargetDemand
    target_key: KeyPosition
    origin_key: KeyPosition
    click_time: float
    movement_time: float
    success: bool
    clicked_key: KeyPosition


@dataclass
class _QueuedDemand:
    demand: TargetDemand
    deferrals: int = 0


def distance_class_of(distance: float, key_width: float) -> int:
    """Hop class whose band [k*w - w/2, k*w + w/2) contains the distance."""
    return int(math.floor(distance / key_width + 0.5))


@lru_cache(maxsize=None)
def _feasible_combinations(rows: int, cols: int) -> frozenset[tuple[int, int]]:
    """(class, bin) pairs realizable by at least one ordered key pair.

    Scale free, so computed on a unit-width grid.  Near-vertical demands at
    the largest hop classes have no realization: the vertical pitch is
    sqrt(3)/2 of the horizontal one, so a 9-row grid spans only ~6.93 key
    widths top to bottom.
    """
    grid = build_grid(rows, cols, 1.0)
    feasible = {(0, b) for b in range(NUM_ANGLE_BINS)}
    for p in grid.positions:
        for q in grid.positions:
            if p == q:
                continue
            cls = distance_class_of(distance_px(p, q), 1.0)
            if 1 <= cls < NUM_DISTANCE_CLASSES:
                feasible.add((cls, angle_bin(angle_deg(p, q))))
    return frozenset(feasible)


def _allocate_demands(feasible: frozenset[tuple[int, int]]) -> dict[tuple[int, int], int]:
    """Split 25 demands per class over angular bins.

    Per-bin totals are pinned to 14 or 15 (225 does not divide by 16).
    Class 0 is spread first, at most two per bin, so every bin keeps at
    least ten nonzero-distance demands.  The remaining classes follow in
    order of how few bins they can realize, sharing one rotating bin cursor;
    combinations no key pair can realize are never scheduled.
    """
    remaining = [15] + [14] * (NUM_ANGLE_BINS - 1)
    counts: dict[tuple[int, int], int] = {}
    cursor = 0

    def place(cls: int, allowed: set[int], quota: int, cap: int | None = None):
        nonlocal cursor
        placed = 0
        scanned = 0
        while placed < quota:
            b = cursor % NUM_ANGLE_BINS
            cursor += 1
            scanned += 1
            if scanned > 100 * NUM_ANGLE_BINS:
                raise AssertionError("demand allocation cannot satisfy bin quotas")
            if b not in allowed or remaining[b] == 0:
                continue
            if cap is not None and counts.get((cls, b), 0) >= cap:
                continue
            counts[(cls, b)] = counts.get((cls, b), 0) + 1
            remaining[b] -= 1
            placed += 1

    place(0, set(range(NUM_ANGLE_BINS)), PER_CLASS_DEMANDS, cap=2)
    bins_of = {
        k: {b for b in range(NUM_ANGLE_BINS) if (k, b) in feasible}
        for k in range(1, NUM_DISTANCE_CLASSES)
    }
    for k in sorted(bins_of, key=lambda k: (len(bins_of[k]), k)):
        place(k, bins_of[k], PER_CLASS_DEMANDS)
    assert sum(remaining) == 0
    return counts


def seed_initial_queue(seed: int, grid: HexGrid | None = None) -> list[TargetDemand]:
    """The shuffled 225-demand initial queue: 25 demands per distance class."""
    if grid is None:
        grid = build_grid(9, 9, 130.0)
    counts = _allocate_demands(_feasible_combinations(grid.rows, grid.cols))
    demands = [
        TargetDemand(cls, b)
        for cls in range(NUM_DISTANCE_CLASSES)
        for b in range(NUM_ANGLE_BINS)
        for _ in range(counts.get((cls, b), 0))
    ]
    random.Random(seed).shuffle(demands)
    return demands


class CharacterizationSession:
    """Single-writer protocol state machine for one participant."""

    def __init__(self, grid: HexGrid, seed: int, start_key: KeyPosition | None = None):
        self.grid = grid
        self.rng_seed = seed
        self.start_key = start_key if start_key is not None else grid.at(grid.rows // 2, grid.cols // 2)
        self.queue: list[_QueuedDemand] = [
            _QueuedDemand(d) for d in seed_initial_queue(seed, grid)
        ]
        self.events: list[SelectionEvent] = []
        self.samples: list[MovementSample] = []
        self.presented_count = 0
        self.phase = Phase.INITIAL
        self.dropped: list[TargetDemand] = []
        self.pauses: list[tuple[float, float]] = []
        self.current_target: KeyPosition | None = None
        self.current_demand: TargetDemand | None = None
        self.last_key = self.start_key
        self.last_success_time = 0.0
        self.last_click_time = 0.0
        self._log: list[dict] = []
        self._represented_outliers: set[int] = set()
        self._refine_rounds = 0
        self._rng = random.Random(seed)

    @property
    def complete(self) -> bool:
        return self.phase is Phase.COMPLETE

    def fit_model(self) -> DirectionalFittsModel:
        return fit_bins(self.samples, self.grid.key_width)


def candidate_targets(grid: HexGrid, origin: KeyPosition, demand: TargetDemand) -> list[KeyPosition]:
    """Keys satisfying the demand's distance band and angular bin from origin."""
    if demand.distance_class == 0:
        return [origin]
    out = []
    for q in grid.positions:
        if q == origin:
            continue
        if distance_class_of(distance_px(origin, q), grid.key_width) != demand.distance_class:
            continue
        if angle_bin(angle_deg(origin, q)) != demand.angle_bin:
            continue
        out.append(q)
    return out


def next_target(session: CharacterizationSession, current_key: KeyPosition) -> KeyPosition:
    """Consume demands until one is feasible from the current key.

    Infeasible demands are deferred to a random later queue position; after
    three deferrals a demand is dropped.  Raises ProtocolStallError when the
    queue runs out without issuing a target.
    """
    if session.phase is Phase.COMPLETE:
        raise RuntimeError("session already complete")
    if session.current_target is not None:
        raise RuntimeError("a target is already outstanding")
    if current_key != session.last_key:
        raise ValueError("current key must be the last successfully selected key")
    dropped_now: list[TargetDemand] = []
    while session.queue:
        assert session.presented_count < MAX_PRESENTED
        entry = session.queue.pop(0)
        candidates = candidate_targets(session.grid, current_key, entry.demand)
        if candidates:
            target = session._rng.choice(candidates)
            session.presented_count += 1
            session.current_target = target
            session.current_demand = entry.demand
            return target
        entry.deferrals += 1
        if entry.deferrals > MAX_DEFERRALS:
            session.dropped.append(entry.demand)
            dropped_now.append(entry.demand)
            continue
        if session.queue:
            pos = session._rng.randrange(1, len(session.queue) + 1)
        else:
            pos = 0
        session.queue.insert(pos, entry)
    raise ProtocolStallError(dropped_now or session.dropped)


def _pause_overlap(session: CharacterizationSession, t0: float, t1: float) -> float:
    return sum(
        max(0.0, min(p1, t1) - max(p0, t0)) for p0, p1 in session.pauses
    )


def record_selection(session: CharacterizationSession, event: SelectionEvent) -> None:
    """Log a click.  Only a successful click completes the outstanding demand."""
    if session.current_target is None:
        raise RuntimeError("no outstanding target")
    if event.sequence_no != len(session.events) + 1:
        raise RuntimeError(
            f"event out of sequence: got {event.sequence_no}, expected {len(session.events) + 1}"
        )
    if event.target_key != session.current_target:
        raise ValueError("event target does not match the outstanding target")
    if event.demand != session.current_demand:
        raise ValueError("event demand does not match the outstanding demand")
    if event.origin_key != session.last_key:
        raise ValueError("event origin does not match the last successful selection")
    if event.click_time <= session.last_click_time and session.events:
        raise RuntimeError("click times must strictly increase")
    expected_mt = event.click_time - session.last_success_time
    if abs(event.movement_time - expected_mt) > 1e-9:
        raise ValueError("event movement time disagrees with click times")
    hit = event.clicked_key == event.target_key
    if event.success != hit:
        raise ValueError("success flag disagrees with clicked key")

    session.events.append(event)
    session._log.append(_event_to_entry(event))
    session.last_click_time = event.click_time
    if not hit:
        return

    distance = distance_px(session.last_key, event.target_key)
    angle = None if distance == 0.0 else angle_deg(session.last_key, event.target_key)
    mt = event.movement_time - _pause_overlap(session, session.last_success_time, event.click_time)
    if mt <= 0:
        raise ValueError("movement time vanished after pause exclusion")
    session.samples.append(
        MovementSample(
            distance=distance,
            angle=angle,
            movement_time=mt,
            demanded_bin=session.current_demand.angle_bin,
            distance_class=session.current_demand.distance_class,
        )
    )
    session.last_key = event.target_key
    session.last_success_time = event.click_time
    session.current_target = None
    session.current_demand = None


def add_pause(session: CharacterizationSession, t0: float, t1: float) -> None:
    """Mark a rest interval; it is excluded from the next movement time."""
    if t1 <= t0:
        raise ValueError("pause must have positive duration")
    session.pauses.append((t0, t1))
    session._log.append({"type": "pause", "t0": t0, "t1": t1})


def _weak_bins(model: DirectionalFittsModel) -> list[int]:
    weak = []
    for k, b in enumerate(model.bins):
        if not b.fitted or b.n_samples < MIN_BIN_SAMPLES or b.r_squared <= WEAK_R2:
            weak.append(k)
    return weak


def refine(session: CharacterizationSession) -> None:
    """Fit the bins and queue follow-up demands for weak bins and outliers.

    Appending stops at the 400-presented-target budget; with nothing to
    append the session completes.
    """
    if session.phase is Phase.COMPLETE:
        raise RuntimeError("session already complete")
    if session.current_target is not None:
        raise RuntimeError("cannot refine with an outstanding target")
    if session.queue:
        raise RuntimeError("cannot refine before the queue drains")

    session._refine_rounds += 1
    feasible = _feasible_combinations(session.grid.rows, session.grid.cols)
    new_demands: list[TargetDemand] = []
    model = session.fit_model()
    for bin_idx in _weak_bins(model):
        for cls in range(1, NUM_DISTANCE_CLASSES):
            if (cls, bin_idx) in feasible:
                new_demands.append(TargetDemand(cls, bin_idx))
    for bin_model in model.bins:
        for sample_idx in bin_model.outlier_idx:
            if sample_idx not in session._represented_outliers:
                session._represented_outliers.add(sample_idx)
                s = session.samples[sample_idx]
                new_demands.append(TargetDemand(s.distance_class, s.demanded_bin))

    budget = MAX_PRESENTED - session.presented_count
    new_demands = new_demands[:budget]
    if not new_demands or session._refine_rounds >= _MAX_REFINE_ROUNDS:
        session.phase = Phase.COMPLETE
        return
    session.queue.extend(_QueuedDemand(d) for d in new_demands)
    session.phase = Phase.REFINING


def ensure_target(session: CharacterizationSession) -> KeyPosition | None:
    """Issue the next target, refining as needed; None once complete."""
    while session.current_target is None:
        if session.phase is Phase.COMPLETE:
            return None
        if not session.queue:
            refine(session)
            continue
        try:
            next_target(session, session.last_key)
        except ProtocolStallError:
            continue  # queue exhausted by drops; let refine() decide
    return session.current_target


def _key_entry(key: KeyPosition) -> dict:
    return {"row": key.row, "col": key.col}


def _event_to_entry(event: SelectionEvent) -> dict:
    return {
        "type": "event",
        "seq": event.sequence_no,
        "demand": {"class": event.demand.distance_class, "bin": event.demand.angle_bin},
        "target": _key_entry(event.target_key),
        "origin": _key_entry(event.origin_key),
        "clicked": _key_entry(event.clicked_key),
        "t": event.click_time,
        "mt": event.movement_time,
        "success": event.success,
    }


def export_log(session: CharacterizationSession) -> str:
    """Newline-delimited JSON: a header line, then events and pauses in order."""
    header = {
        "type": "header",
        "version": LOG_VERSION,
        "seed": session.rng_seed,
        "grid": hexgeom.grid_to_dict(session.grid),
        "start": _key_entry(session.start_key),
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(json.dumps(entry, sort_keys=True) for entry in session._log)
    return "\n".join(lines) + "\n"


def import_log(text: str) -> CharacterizationSession:
    """Rebuild a session by replaying a log; validates every issued target."""
    lines = [ln for ln in text.splitlines()]
    if not lines:
        raise LogParseError(1, "empty log")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LogParseError(1, f"bad JSON: {exc}") from exc
    if header.get("type") != "header":
        raise LogParseError(1, "first line must be the header")
    if header.get("version") != LOG_VERSION:
        raise LogParseError(1, f"unsupported log version {header.get('version')!r}")
    grid = hexgeom.grid_from_dict(header["grid"])
    start = grid.at(header["start"]["row"], header["start"]["col"])
    session = CharacterizationSession(grid, header["seed"], start)

    for line_no, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            entry = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise LogParseError(line_no, f"bad JSON: {exc}") from exc
        kind = entry.get("type")
        if kind == "pause":
            add_pause(session, entry["t0"], entry["t1"])
        elif kind == "event":
            try:
                event = SelectionEvent(
                    sequence_no=entry["seq"],
                    demand=TargetDemand(entry["demand"]["class"], entry["demand"]["bin"]),
                    target_key=grid.at(entry["target"]["row"], entry["target"]["col"]),
                    origin_key=grid.at(entry["origin"]["row"], entry["origin"]["col"]),
                    click_time=entry["t"],
                    movement_time=entry["mt"],
                    success=entry["success"],
                    clicked_key=grid.at(entry["clicked"]["row"], entry["clicked"]["col"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise LogParseError(line_no, f"bad event: {exc}") from exc
            if session.current_target is None:
                issued = ensure_target(session)
                if issued is None:
                    raise ReplayError(f"line {line_no}: event after session completion")
            if session.current_target != event.target_key:
                raise ReplayError(
                    f"line {line_no}: replayed target {session.current_target} "
                    f"does not match logged target {event.target_key}"
                )
            record_selection(session, event)
        else:
            raise LogParseError(line_no, f"unknown entry type {kind!r}")
    return session


def simulate_characterization(
    session: CharacterizationSession,
    truth: DirectionalFittsModel,
    mt_noise: float = 0.02,
    miss_rate: float = 0.0,
    noise_kind: str = "uniform",
    seed: int = 0,
) -> CharacterizationSession:
    """Drive a session with a parametric user until it completes.

    The user always reaches the target eventually; movement times come from
    the truth model plus noise.  Uniform noise is bounded, which keeps a
    clean (flawless) run free of 3-sigma outliers; Gaussian noise will
    occasionally produce them and exercise re-presentation.
    """
    if noise_kind not in ("uniform", "normal"):
        raise ValueError("noise_kind must be 'uniform' or 'normal'")
    rng = random.Random(seed)
    clock = 0.0
    while True:
        target = ensure_target(session)
        if target is None:
            return session
        cursor = session.last_key  # sample geometry is measured from here
        attempt_from = cursor
        while True:
            miss = rng.random() < miss_rate
            if miss:
                neighbors = session.grid.neighbors(target)
                clicked = rng.choice(neighbors)
            else:
                clicked = target
            d = distance_px(attempt_from, clicked)
            ang = None if d == 0 else angle_deg(attempt_from, clicked)
            mt = predict_mt(truth, ang, d)
            if noise_kind == "uniform":
                mt += rng.uniform(-mt_noise, mt_noise)
            else:
                mt += rng.gauss(0.0, mt_noise)
            mt = max(mt, 1e-3)
            clock += mt
            event = SelectionEvent(
                sequence_no=len(session.events) + 1,
                demand=session.current_demand,
                target_key=target,
                origin_key=cursor,
                click_time=clock,
                movement_time=clock - session.last_success_time,
                success=not miss,
                clicked_key=clicked,
            )
            record_selection(session, event)
            if not miss:
                break
            attempt_from = clicked
