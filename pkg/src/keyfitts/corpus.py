"""Phrase ingestion and digraph statistics over the 27-character alphabet.

The alphabet is fixed: the 26 English letters followed by space.  Keyboards,
flow matrices, and layouts all index characters through this ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

import numpy as np

ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ "
N_CHARS = len(ALPHABET)  # 27
SPACE_INDEX = 26
_CHAR_TO_INDEX = {c: i for i, c in enumerate(ALPHABET)}


class EmptyCorpusError(ValueError):
    """The corpus contains no digraphs."""


def char_index(c: str) -> int:
    return _CHAR_TO_INDEX[c]


def normalize_line(line: str) -> str:
    """Uppercase, drop out-of-alphabet characters, collapse whitespace runs."""
    kept = []
    for ch in line.upper():
        if ch in _CHAR_TO_INDEX:
            kept.append(" " if ch == " " else ch)
        elif ch.isspace():
            kept.append(" ")
    return " ".join("".join(kept).split())


@dataclass(frozen=True)
class DigraphMatrix:
    """27x27 transition counts; counts[i][j] = occurrences of char i then j."""

    counts: np.ndarray
    total: int

    def __post_init__(self):
        if self.counts.shape != (N_CHARS, N_CHARS):
            raise ValueError(f"counts must be {N_CHARS}x{N_CHARS}")
        if (self.counts < 0).any():
            raise ValueError("counts must be nonnegative")
        if int(self.counts.sum()) != self.total:
            raise ValueError("total does not match counts")


def ingest_phrases(lines: Iterable[str]) -> DigraphMatrix:
    """Count digraphs over normalized lines; pairs never span a line break."""
    counts = np.zeros((N_CHARS, N_CHARS), dtype=np.int64)
    for line in lines:
        text = normalize_line(line)
        for first, second in zip(text, text[1:]):
            counts[_CHAR_TO_INDEX[first], _CHAR_TO_INDEX[second]] += 1
    return DigraphMatrix(counts, int(counts.sum()))


def joint_probabilities(m: DigraphMatrix) -> np.ndarray:
    """counts normalized to a joint distribution summing to one."""
    if m.total == 0:
        raise EmptyCorpusError("no digraphs in corpus")
    return m.counts.astype(np.float64) / float(m.total)


def load_phrase_file(path) -> list[str]:
    """Plain-text phrases, one per line; blank lines are ignored."""
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def bundled_phrases(name: str = "eval500") -> list[str]:
    """Phrase sets shipped with the package: 'eval500' or 'fixture10'."""
    fname = {"eval500": "phrases_eval500.txt", "fixture10": "phrases_fixture10.txt"}[name]
    text = resources.files("keyfitts.data").joinpath(fname).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line.strip()]


def digraphs_to_dict(m: DigraphMatrix) -> dict:
    return {"alphabet": ALPHABET, "counts": m.counts.tolist(), "total": m.total}


def digraphs_from_dict(doc: dict) -> DigraphMatrix:
    if doc["alphabet"] != ALPHABET:
        raise ValueError("unexpected alphabet")
    return DigraphMatrix(np.array(doc["counts"], dtype=np.int64), doc["total"])


def digraphs_to_json(m: DigraphMatrix) -> str:
    return json.dumps(digraphs_to_dict(m), sort_keys=True)


def digraphs_from_json(text: str) -> DigraphMatrix:
    return digraphs_from_dict(json.loads(text))
