import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from keyfitts.corpus import (
    ALPHABET,
    EmptyCorpusError,
    bundled_phrases,
    char_index,
    digraphs_from_json,
    digraphs_to_json,
    ingest_phrases,
    joint_probabilities,
    normalize_line,
)


def test_alphabet_is_letters_then_space():
    assert len(ALPHABET) == 27
    assert ALPHABET[:26] == "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    assert ALPHABET[26] == " "
    assert char_index(" ") == 26


def test_abba_counts():
    m = ingest_phrases(["ABBA"])
    assert m.total == 3
    assert m.counts[char_index("A"), char_index("B")] == 1
    assert m.counts[char_index("B"), char_index("B")] == 1
    assert m.counts[char_index("B"), char_index("A")] == 1


def test_go_go_counts_space_transitions():
    m = ingest_phrases(["GO GO"])
    assert m.total == 4
    assert m.counts[char_index("G"), char_index("O")] == 2
    assert m.counts[char_index("O"), char_index(" ")] == 1
    assert m.counts[char_index(" "), char_index("G")] == 1


def test_mackenzie_style_phrase_has_length_minus_one_digraphs():
    phrase = "my watch fell in the water"
    m = ingest_phrases([phrase])
    assert m.total == len(phrase) - 1 == 25


def test_normalization_drops_punctuation_and_collapses_whitespace():
    assert normalize_line("  Don't   stop!\tnow ") == "DONT STOP NOW"
    m = ingest_phrases(["a-b"])
    assert m.counts[char_index("A"), char_index("B")] == 1
    assert m.total == 1


def test_no_digraph_spans_lines():
    m = ingest_phrases(["AB", "CD"])
    assert m.total == 2
    assert m.counts[char_index("B"), char_index("C")] == 0


def test_joint_probabilities_sum_to_one():
    m = ingest_phrases(["ABBA"])
    p = joint_probabilities(m)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert p[char_index("A"), char_index("B")] == pytest.approx(1 / 3)


def test_joint_probabilities_single_and_pair():
    single = ingest_phrases(["AB"])
    p = joint_probabilities(single)
    assert p[char_index("A"), char_index("B")] == 1.0
    assert p.sum() == 1.0
    two = ingest_phrases(["AB", "CD"])
    p2 = joint_probabilities(two)
    assert p2[char_index("A"), char_index("B")] == 0.5
    assert p2[char_index("C"), char_index("D")] == 0.5


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpusError):
        joint_probabilities(ingest_phrases([]))


@given(st.text(alphabet=st.characters(codec="ascii"), max_size=60))
def test_normalization_idempotent(line):
    once = normalize_line(line)
    assert normalize_line(once) == once


@given(st.lists(st.text(alphabet="AB C", max_size=10), max_size=6))
def test_line_order_does_not_change_counts(lines):
    fwd = ingest_phrases(lines)
    rev = ingest_phrases(list(reversed(lines)))
    assert np.array_equal(fwd.counts, rev.counts)


def test_bundled_phrase_sets():
    eval500 = bundled_phrases("eval500")
    assert len(eval500) == 500
    fixture = bundled_phrases("fixture10")
    assert len(fixture) == 10
    assert fixture[0] == "my watch fell in the water"
    # every bundled phrase survives normalization unchanged except case
    for line in eval500:
        assert normalize_line(line) == line.upper()


def test_digraph_json_round_trip():
    m = ingest_phrases(bundled_phrases("fixture10"))
    text = digraphs_to_json(m)
    back = digraphs_from_json(text)
    assert np.array_equal(back.counts, m.counts)
    assert back.total == m.total
