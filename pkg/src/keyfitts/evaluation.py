"""Simulated transcription on a layout and text-entry metrics.

The simulated user stands in for a human participant: movement times come
from a directional Fitts model plus Gaussian noise, and misses land on a
random hex neighbor of the target before the user re-attempts.  Metrics are
accuracy (first-attempt hits), words per minute (all characters, correct or
incorrect, over five-character words), WPM* (the same after removing every
keystroke moving to or from the space key), and Wolpaw's information
transfer rate.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass

from .corpus import ALPHABET, normalize_line
from .fitts import DirectionalFittsModel, model_from_dict, model_to_dict, predict_mt
from .hexgeom import KeyPosition, angle_deg, distance_px
from .layout import KeyboardLayout


@dataclass(frozen=True)
class SimulatedUser:
    model: DirectionalFittsModel
    mt_noise_sd: float = 0.0
    miss_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mt_noise_sd < 0:
            raise ValueError("noise SD must be nonnegative")
        if not 0.0 <= self.miss_rate < 1.0:
            raise ValueError("miss rate must be in [0, 1)")


@dataclass(frozen=True)
class Keystroke:
    target_char: str
    selected_char: str
    movement_time: float
    origin: KeyPosition
    target: KeyPosition


@dataclass(frozen=True)
class TranscriptionTrial:
    prompt: str
    keystrokes: tuple[Keystroke, ...]
    total_time: float
    # True for the typing-task flow where a wrong key is not retried.
    advance_on_miss: bool = False


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    wpm: float
    wpm_star: float
    itr: float
    n_trials: int
    layout_ref: str | None = None
    user_ref: str | None = None


def start_key(layout: KeyboardLayout) -> KeyPosition:
    """The assigned key nearest the centroid of all assigned keys."""
    keys = list(layout.assignment.values())
    cx = sum(k.center_x for k in keys) / len(keys)
    cy = sum(k.center_y for k in keys) / len(keys)
    return min(
        keys, key=lambda k: ((k.center_x - cx) ** 2 + (k.center_y - cy) ** 2, k.row, k.col)
    )


def _char_at(layout: KeyboardLayout, pos: KeyPosition) -> str:
    for ch, p in layout.assignment.items():
        if p == pos:
            return ch
    raise KeyError(f"no character at ({pos.row}, {pos.col})")


def simulate_transcription(
    user: SimulatedUser, layout: KeyboardLayout, prompts: list[str]
) -> list[TranscriptionTrial]:
    """Transcribe each prompt; deterministic for a given user seed.

    The cursor starts on the centroid-nearest key, the first selection is
    predicted from there (zero distance when the first character sits on the
    start key).  Every attempt's movement time accrues; only first attempts
    define accuracy.
    """
    char_of = {pos: ch for ch, pos in layout.assignment.items()}
    trials = []
    for index, raw in enumerate(prompts):
        prompt = normalize_line(raw)
        if not prompt:
            warnings.warn(f"prompt {index} has no in-alphabet characters; skipped")
            continue
        rng = random.Random(f"{user.seed}:{index}")
        cursor = start_key(layout)
        keystrokes = []
        total = 0.0
        for ch in prompt:
            target = layout.assignment[ch]
            # only rendered keys are clickable, so misses land on assigned
            # neighbors (or any other key for an isolated target)
            miss_keys = [p for p in layout.grid.neighbors(target) if p in char_of]
            if not miss_keys:
                miss_keys = [p for p in layout.assignment.values() if p != target]
            while True:
                miss = rng.random() < user.miss_rate
                if miss:
                    selected_pos = rng.choice(miss_keys)
                else:
                    selected_pos = target
                d = distance_px(cursor, selected_pos)
                ang = None if d == 0 else angle_deg(cursor, selected_pos)
                mt = predict_mt(user.model, ang, d)
                if user.mt_noise_sd > 0:
                    mt += rng.gauss(0.0, user.mt_noise_sd)
                mt = max(mt, 0.0)
                total += mt
                keystrokes.append(
                    Keystroke(
                        target_char=ch,
                        selected_char=char_of[selected_pos],
                        movement_time=mt,
                        origin=cursor,
                        target=target,
                    )
                )
                cursor = selected_pos
                if not miss:
                    break
        trials.append(TranscriptionTrial(prompt, tuple(keystrokes), total))
    return trials


def wolpaw_itr(n_targets: int, p: float, selection_rate: float) -> float:
    """Wolpaw information transfer rate in bits per minute.

    Zero at or below chance accuracy; selection_rate is selections/minute.
    """
    if n_targets < 2:
        raise ValueError("need at least two targets")
    if not 0.0 <= p <= 1.0:
        raise ValueError("accuracy must be a probability")
    if p <= 1.0 / n_targets:
        return 0.0
    bits = math.log2(n_targets)
    if p < 1.0:
        bits += p * math.log2(p) + (1.0 - p) * math.log2((1.0 - p) / (n_targets - 1))
    return max(bits * selection_rate, 0.0)


def _first_attempt_outcomes(trial: TranscriptionTrial) -> list[bool]:
    outcomes = []
    first = True
    for ks in trial.keystrokes:
        hit = ks.selected_char == ks.target_char
        if trial.advance_on_miss:
            outcomes.append(hit)
            continue
        if first:
            outcomes.append(hit)
        first = hit  # next keystroke starts a new target only after a hit
    return outcomes


def compute_metrics(
    trials: list[TranscriptionTrial],
    layout: KeyboardLayout,
    layout_ref: str | None = None,
    user_ref: str | None = None,
) -> EvalReport:
    """Aggregate accuracy, WPM, WPM*, and ITR over a list of trials."""
    if not trials:
        raise ValueError("need at least one trial")
    total_time = sum(t.total_time for t in trials)
    if total_time <= 0:
        raise ValueError("degenerate trials: zero total time")
    total_keystrokes = sum(len(t.keystrokes) for t in trials)
    outcomes = [o for t in trials for o in _first_attempt_outcomes(t)]
    accuracy = 100.0 * sum(outcomes) / len(outcomes)

    minutes = total_time / 60.0
    wpm = (total_keystrokes / minutes) / 5.0

    space_pos = layout.assignment[" "]
    star_keystrokes = [
        ks
        for t in trials
        for ks in t.keystrokes
        if ks.target_char != " " and ks.origin != space_pos
    ]
    star_time = sum(ks.movement_time for ks in star_keystrokes)
    wpm_star = (len(star_keystrokes) / (star_time / 60.0)) / 5.0 if star_time > 0 else 0.0

    itr = wolpaw_itr(len(ALPHABET), accuracy / 100.0, total_keystrokes / minutes)
    return EvalReport(
        accuracy=accuracy,
        wpm=wpm,
        wpm_star=wpm_star,
        itr=itr,
        n_trials=len(trials),
        layout_ref=layout_ref,
        user_ref=user_ref,
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "layout": report.layout_ref,
        "user": report.user_ref,
        "n_trials": report.n_trials,
        "accuracy_pct": report.accuracy,
        "wpm": report.wpm,
        "wpm_star": report.wpm_star,
        "itr_bits_per_min": report.itr,
    }


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True)


def user_to_dict(user: SimulatedUser) -> dict:
    return {
        "model": model_to_dict(user.model),
        "mt_noise_sd": user.mt_noise_sd,
        "miss_rate": user.miss_rate,
        "seed": user.seed,
    }


def user_from_dict(doc: dict) -> SimulatedUser:
    from .fitts import anisotropic_model, generic_model

    spec = doc["model"]
    if spec == "generic":
        model = generic_model(doc.get("key_width", 130.0))
    elif spec == "anisotropic":
        model = anisotropic_model(
            key_width=doc.get("key_width", 130.0),
            a=doc.get("a", 0.83),
            b_vertical=doc.get("b_vertical", 0.5),
            horizontal_ratio=doc.get("horizontal_ratio", 2.0),
        )
    else:
        model = model_from_dict(spec)
    return SimulatedUser(
        model=model,
        mt_noise_sd=doc.get("mt_noise_sd", 0.0),
        miss_rate=doc.get("miss_rate", 0.0),
        seed=doc.get("seed", 0),
    )


def user_from_json(text: str) -> SimulatedUser:
    return user_from_dict(json.loads(text))
