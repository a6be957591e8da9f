from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_edit_distance, oracle_token_f1
from qfsc.backends.mock import TokenOverlapScorer
from qfsc.metrics import (
    AggregateScore,
    AnswerPairScores,
    aggregate,
    edit_distance,
    exact_match,
    f1_score,
    pair_scores,
    safe_similarity,
    token_f1,
)


def test_exact_match_examples():
    assert exact_match("Janez Novak", "janez novak.") == 1
    assert exact_match("Novak Janez", "Janez Novak") == 0
    assert exact_match("", "") == 1


def test_token_f1_examples():
    assert token_f1("rdeči avto", "avto") == pytest.approx(2 / 3)
    assert round(token_f1("rdeči avto", "avto"), 4) == 0.6667
    assert token_f1("Janez Novak", "Janez Novak") == 1.0
    assert token_f1("x y", "z w") == 0.0
    assert token_f1("", "") == 1.0
    assert token_f1("a", "") == 0.0


def test_token_f1_counts_multiplicity():
    # candidate "a a b" vs reference "a b b": overlap 2 -> p = r = 2/3
    assert token_f1("a a b", "a b b") == pytest.approx(2 / 3)
    assert token_f1("a a b", "a b b") == oracle_token_f1("a a b", "a b b")


def test_edit_distance_examples():
    assert edit_distance("kitten", "sitting") == 3
    assert edit_distance("Ljubljana", "Ljubljana") == 0
    assert edit_distance("Ljubljana", "") == 9
    assert edit_distance("ČAS", "čas") == 0


def test_aggregate_examples():
    a = aggregate([1, 0, 0, 0])
    assert a.mean == 0.25 and round(a.std, 4) == 0.4330 and a.n == 4
    assert aggregate([0.7]) == AggregateScore(0.7, 0.0, 1)
    assert aggregate([0.2, 0.2, 0.2]).std == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        aggregate([])


def test_f1_score_examples():
    assert f1_score(0.5, 0.25) == pytest.approx(1 / 3)
    assert f1_score(1.0, 1.0) == 1.0
    assert f1_score(0.0, 0.0) == 0.0


def test_safe_similarity_degenerate_flag():
    scorer = TokenOverlapScorer()
    assert safe_similarity(scorer, "Janez Novak", "Janez Novak") == (1.0, False)
    assert safe_similarity(scorer, "abc", "") == (0.0, True)
    assert safe_similarity(scorer, "  ", "abc") == (0.0, True)


def test_pair_scores_round_trip():
    s = pair_scores("rdeči avto", "avto", TokenOverlapScorer())
    assert s.exact_match == 0 and s.edit_distance == 6 and s.similarity == pytest.approx(2 / 3)
    assert AnswerPairScores.from_dict(s.as_dict()) == s


short = st.text(alphabet="abcAB č", max_size=12)


@settings(max_examples=300, deadline=None)
@given(short, short, short)
def test_edit_distance_is_a_metric(a, b, c):
    assert edit_distance(a, b) == edit_distance(b, a)
    assert (edit_distance(a, b) == 0) == (a.casefold() == b.casefold())
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)
    assert edit_distance(a, b) == oracle_edit_distance(a, b)


words = st.lists(st.sampled_from(["a", "b", "Črka", "črka.", "x"]), max_size=6).map(" ".join)


@settings(max_examples=300, deadline=None)
@given(words, words)
def test_token_f1_bounds_and_symmetry(c, r):
    v = token_f1(c, r)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(token_f1(r, c))
    assert v == pytest.approx(oracle_token_f1(c, r))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=50))
def test_aggregate_matches_direct_formula(values):
    a = aggregate(values)
    m = sum(values) / len(values)
    assert a.mean == pytest.approx(m, rel=1e-9, abs=1e-6)
    assert a.std == pytest.approx(math.sqrt(sum((v - m) ** 2 for v in values) / len(values)), rel=1e-6, abs=1e-6)
