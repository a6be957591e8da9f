from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_weighted_recall
from qfsc import synthetic
from qfsc.backends import mock_eval_backends
from qfsc.backends.mock import ScriptedScorer, SubstringAnswerer
from qfsc.metrics import f1_score
from qfsc.questeval import QuestEvaluator, questeval, questeval_precision, questeval_recall, weighted_recall
from qfsc.types import GeneratedQuestion, NamedEntity, QuestionOrigin


@pytest.fixture
def entry():
    return synthetic.make_corpus(1, seed=12)[0]


def test_extractive_summary_scores_one(entry):
    rep = questeval(entry.to_document(), synthetic.extractive_summary(entry), mock_eval_backends())
    assert (rep.precision, rep.recall, rep.f1) == (1.0, 1.0, 1.0)
    assert not rep.unevaluable


def test_recall_examples():
    assert weighted_recall([1.0] * 10, [1] * 7 + [0] * 3) == pytest.approx(0.7)
    assert weighted_recall([2, 1, 1], [1, 0, 1]) == 0.75
    assert weighted_recall([5, 0.1, 3], [1, 1, 1]) == 1.0
    with pytest.raises(ValueError):
        weighted_recall([0, 0], [1, 0])
    with pytest.raises(ValueError):
        weighted_recall([-1, 2], [1, 0])


def test_f1_examples():
    assert f1_score(0.5, 0.25) == pytest.approx(0.3333, abs=1e-4)
    assert f1_score(1, 1) == 1
    assert f1_score(0, 0) == 0


class _Tagger:
    def __init__(self, surfaces):
        self.surfaces = surfaces

    def tag_entities(self, text):
        return [NamedEntity(text[:1], 0, 1) for _ in self.surfaces]


class _Questions:
    def make_questions(self, targets, context):
        return [GeneratedQuestion(f"Q{i}?", QuestionOrigin.SUMMARY_QG, target_answer="x") for i in range(len(targets))]


def test_precision_one_of_four_disjoint(entry):
    # both sides answer every question; one pair has no token overlap
    summary_side = {"Q0?": ["Ana"], "Q1?": ["Bled"], "Q2?": ["Celje"], "Q3?": ["Koper"]}
    doc_text = "Ana Bled Celje Ptuj."
    summary = "Ana Bled Celje Koper."
    targets = {q: v + (["Ptuj"] if q == "Q3?" else []) for q, v in summary_side.items()}

    class SideAware(SubstringAnswerer):
        def answer(self, question, context):
            if context == doc_text and question == "Q3?":
                return super().answer("Q3-doc", context)
            return super().answer(question, context)

    answerer = SideAware({**targets, "Q3-doc": ["Ptuj"]})
    b = replace(mock_eval_backends(), tagger=_Tagger("abcd"), question_maker=_Questions(), answerer=answerer,
                chunk_scorer=ScriptedScorer([], 0.9))
    from qfsc.types import Document

    res = questeval_precision(Document("d", doc_text), summary, b)
    assert res.score == 0.75
    assert [t.score for t in res.terms] == [1.0, 1.0, 1.0, 0.0]


def test_precision_exclusion_and_one_sided(entry):
    b = replace(mock_eval_backends(), tagger=_Tagger("abc"), question_maker=_Questions(),
                answerer=SubstringAnswerer({"Q0?": ["Ana"], "Q1?": ["Samo"]}), chunk_scorer=ScriptedScorer([], 0.9))
    from qfsc.types import Document

    # Q0 answered on both, Q1 only on the summary, Q2 on neither
    res = questeval_precision(Document("d", "Ana je tu."), "Ana in Samo.", b)
    assert [t.score for t in res.terms] == [1.0, 0.0, None]
    assert res.score == 0.5


def test_zero_summary_entities(entry):
    res = questeval_precision(entry.to_document(), "povsem brez imen.", mock_eval_backends())
    assert res.score == 0 and res.unevaluable


def test_cap_limits_questions(entry):
    rep = QuestEvaluator(mock_eval_backends(), cap=2).evaluate(entry.to_document(), synthetic.extractive_summary(entry))
    assert len(rep.precision_terms) == 2 and len(rep.recall_terms) == 2


def test_corruption_lowers_f1(entry):
    s = synthetic.extractive_summary(entry)
    bad = synthetic.corrupt_summary(s, synthetic.summary_entities(entry)[1])
    assert questeval(entry.to_document(), bad, mock_eval_backends()).f1 < 1.0


def test_recall_custom_weights(entry):
    s = synthetic.extractive_summary(entry).split(". ")[0] + "."
    b = mock_eval_backends()
    uni = questeval_recall(entry.to_document(), s, b)
    answerable = [t.answerable_on_summary for t in uni.terms]
    w = [float(i + 1) for i in range(len(answerable))]
    custom = questeval_recall(entry.to_document(), s, b, weights=w)
    assert custom.score == pytest.approx(oracle_weighted_recall(w, answerable), abs=1e-12)
    assert uni.score == sum(answerable) / len(answerable)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(min_value=0, max_value=100), st.integers(0, 1)), min_size=1, max_size=20),
       st.floats(min_value=1e-3, max_value=1e3))
def test_recall_properties(pairs, scale):
    w = [p[0] for p in pairs]
    a = [p[1] for p in pairs]
    if sum(w) < 1e-6:  # rescaling could underflow the total to zero
        return
    r = weighted_recall(w, a)
    assert 0.0 <= r <= 1.0 + 1e-12
    assert abs(weighted_recall([scale * x for x in w], a) - r) <= 1e-12
