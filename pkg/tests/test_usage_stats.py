import io
import math
import string

import pytest
from hypothesis import given, strategies as st

import oracles
from handeffort.errors import NoPairMass
from handeffort.landmark_io import FS_LETTERS, LexiconEntry, WordFrequencyList
from handeffort.usage_stats import (
    ContextModel,
    build_context_model,
    confusability,
    handshape_frequency,
    letter_frequency,
    pair_statistics,
    usable_pairs,
    write_pair_statistics,
)

LEX = [
    LexiconEntry("a", "X", 1.5, "native"),
    LexiconEntry("b", "X", 2.0, "loan"),
    LexiconEntry("c", "Y", 3.0, "native"),
]


def W(d):
    return WordFrequencyList(dict(d))


def test_handshape_frequency():
    assert handshape_frequency([], "A", {"native"}) == 0.0
    assert handshape_frequency(LEX, "X", {"native"}) == 1.5
    assert handshape_frequency(LEX, "X", {"initialized", "loan"}) == 2.0
    with pytest.raises(ValueError):
        handshape_frequency(LEX, "X", set())


def test_letter_frequency():
    f = letter_frequency(W({"aba": 2}))
    assert (f["a"], f["b"]) == (4, 2)
    assert sum(f.values()) == 6
    assert set(letter_frequency(W({})).values()) == {0.0}
    f = letter_frequency(W({"zz": 3, "az": 1}))
    assert (f["z"], f["a"]) == (7, 1)


def test_context_model_abc():
    m = build_context_model(W({"abc": 1}))
    assert m.counts == {("a", "b"): 1.0, ("ab", "c"): 1.0}
    assert m.totals == {"a": 1.0, "ab": 1.0}


def test_context_window_clamped():
    m = build_context_model(W({"abcdef": 1}))
    assert m.count("bcde", "f") == 1.0
    assert max(len(c) for c, _ in m.counts) == 4


def test_single_letter_words_contribute_nothing():
    assert build_context_model(W({"a": 5, "i": 9})).mass == 0


def test_unweighted_contexts():
    m = build_context_model(W({"ab": 7}), weighted=False)
    assert m.count("a", "b") == 1.0


@given(st.dictionaries(st.text("abcde", min_size=1, max_size=8), st.integers(1, 20), max_size=15))
def test_model_mass(words):
    m = build_context_model(W(words))
    assert m.mass == sum(c * (len(w) - 1) for w, c in words.items())
    for ctx, total in m.totals.items():
        assert total == pytest.approx(sum(row.get(ctx, 0.0) for row in m.by_letter.values()))


def test_merge_sums():
    a = build_context_model(W({"abc": 2}))
    b = build_context_model(W({"abd": 1}))
    both = build_context_model(W({"abc": 2, "abd": 1}))
    assert a.merge(b).counts == both.counts


def test_disjoint_contexts_zero_bits():
    m = build_context_model(W({"ab": 3, "cd": 5}))
    assert confusability(m, ("b", "d")) == 0.0


def test_balanced_contexts_one_bit():
    m = build_context_model(W({"ab": 2, "ac": 2, "xyb": 1, "xyc": 1}))
    assert confusability(m, ("b", "c")) == pytest.approx(1.0, abs=1e-12)


def test_three_word_example():
    words = {"ab": 1, "ac": 1, "db": 1}
    m = build_context_model(W(words))
    assert oracles.conditional_entropy(words, "b", "c") == pytest.approx(2 / 3, abs=1e-15)
    assert confusability(m, ("b", "c")) == pytest.approx(2 / 3, abs=1e-12)


def test_no_pair_mass():
    with pytest.raises(NoPairMass):
        confusability(build_context_model(W({"ab": 1})), ("x", "y"))


words_st = st.dictionaries(st.text("abcdef", min_size=2, max_size=7), st.integers(1, 30), min_size=1, max_size=20)


@given(words_st, st.sampled_from(list("abcdef")), st.sampled_from(list("abcdef")))
def test_confusability_properties(words, x1, x2):
    m = build_context_model(W(words))
    try:
        h = confusability(m, (x1, x2))
    except NoPairMass:
        return
    assert 0.0 <= h <= 1.0
    assert h == pytest.approx(confusability(m, (x2, x1)), abs=1e-12)
    if x1 != x2:
        assert h == pytest.approx(oracles.conditional_entropy(words, x1, x2), abs=1e-12)
    scaled = build_context_model(W({w: 3 * c for w, c in words.items()}))
    assert confusability(scaled, (x1, x2)) == pytest.approx(h, abs=1e-12)
    f, f3 = letter_frequency(W(words)), letter_frequency(W({w: 3 * c for w, c in words.items()}))
    assert all(f3[k] == 3 * f[k] for k in f)


@given(words_st)
def test_unrelated_word_does_not_move_pair(words):
    m = build_context_model(W(words))
    try:
        h = confusability(m, ("a", "b"))
    except NoPairMass:
        return
    extra = dict(words)
    extra["cdefc"] = extra.get("cdefc", 0) + 7
    assert confusability(build_context_model(W(extra)), ("a", "b")) == pytest.approx(h, abs=1e-12)


def test_pair_statistics_counts():
    words = W({"".join(p): 2 for p in zip(string.ascii_lowercase, string.ascii_lowercase[1:])})
    m = build_context_model(words)
    stats = pair_statistics(m, letter_frequency(words), FS_LETTERS)
    assert len(stats) == oracles.count_pairs(24) == 276
    assert all(s.letter1 < s.letter2 for s in stats)
    kept, excluded = usable_pairs(stats)
    assert len(kept) + excluded == 276
    # only 'a' has no preceding context, every other FS letter has mass
    assert excluded == 0


def test_pair_statistics_reproduces_example_and_min():
    words = W({"ab": 1, "ac": 1, "db": 1})
    m = build_context_model(words)
    stats = {(s.letter1, s.letter2): s for s in pair_statistics(m, {"a": 100, "b": 2, "c": 1}, "abc")}
    assert stats[("b", "c")].confusability_bits == pytest.approx(2 / 3, abs=1e-12)
    assert stats[("a", "b")].min_frequency == 2
    assert stats[("a", "c")].min_frequency == 1
    assert stats[("a", "c")].confusability_bits == 0.0


def test_pair_statistics_flags_no_mass():
    m = build_context_model(W({"ab": 1}))
    stats = pair_statistics(m, {}, "abc")
    # 'a' only ever starts a word and 'c' never occurs
    assert [(s.letter1, s.letter2) for s in stats if not s.has_mass] == [("a", "c")]
    stats = pair_statistics(m, {}, "acd")
    assert [(s.letter1, s.letter2) for s in stats if not s.has_mass] == [("a", "c"), ("a", "d"), ("c", "d")]


def test_alphabet_must_exclude_movement_letters():
    with pytest.raises(ValueError):
        pair_statistics(ContextModel(), {}, "ABJ")


def test_write_pair_statistics():
    m = build_context_model(W({"ab": 1, "ac": 1, "db": 1}))
    buf = io.StringIO()
    write_pair_statistics(pair_statistics(m, {"b": 2.0, "c": 1.0}, "bcx"), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "letter1,letter2,confusability_bits,min_frequency"
    assert lines[1].startswith("b,c,0.666666")
    assert lines[3] == "c,x,0.0,0.0"
    assert math.isclose(float(lines[1].split(",")[2]), 2 / 3)
