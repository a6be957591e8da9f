from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfsc.backends import ContextTooLongError, mock_eval_backends
from qfsc.backends.base import Backends, dedupe_entities
from qfsc.backends.mock import (
    AnchorScorer,
    CapitalizedRunTagger,
    ClozeQuestionMaker,
    EchoGenerator,
    MalformedResponseError,
    SubstringAnswerer,
    TemplateQuestionMaker,
    TokenOverlapScorer,
    cloze_question,
    decode_question,
    template_question,
)
from qfsc.types import AnswerKind, GenerationRequest, NamedEntity, QuestionOrigin


def test_echo_generator():
    assert EchoGenerator().generate(GenerationRequest("POVZEMI: X")) == "X"
    assert EchoGenerator().generate(GenerationRequest("brez oznake")) == "brez oznake"
    with pytest.raises(MalformedResponseError):
        EchoGenerator().generate(GenerationRequest("POVZEMI:   "))


def test_substring_answerer_configured_targets():
    a = SubstringAnswerer({"Kdo je zmagal?": ["Janez"]})
    out = a.answer("Kdo je zmagal?", "Zmagal je Janez.")
    assert out.kind is AnswerKind.ANSWERED and out.text == "Janez"
    assert not a.answer("Kdo je zmagal?", "Zmagal ni nihče.").is_answered


def test_substring_answerer_context_limit():
    with pytest.raises(ContextTooLongError):
        SubstringAnswerer().answer("Kdo?", "x" * 351)


def test_template_question_maker():
    qs = TemplateQuestionMaker().make_questions(["Ljubljana"], "Ljubljana je mesto.")
    assert [q.text for q in qs] == ["Kaj velja za Ljubljana?"]
    assert qs[0].target_answer == "Ljubljana" and qs[0].origin is QuestionOrigin.ENTITY_QG
    three = TemplateQuestionMaker().make_questions(["Ana", "Bled", "Celje"], "Ana, Bled in Celje.")
    assert [q.target_answer for q in three] == ["Ana", "Bled", "Celje"]
    assert TemplateQuestionMaker().make_questions([], "karkoli") == []
    with pytest.raises(ValueError):
        TemplateQuestionMaker().make_questions(["Maribor"], "Ljubljana je mesto.")


def test_cloze_questions_answer_from_their_gap():
    ctx = "Včeraj je Janez Novak obiskal staro tržnico. Nato je Ana odšla."
    qm = ClozeQuestionMaker()
    q = qm.question_for("Janez Novak", ctx)
    assert q == cloze_question("Včeraj je ", " obiskal staro tržnico.")
    answerer = SubstringAnswerer()
    assert answerer.answer(q, ctx).text == "Janez Novak"
    assert answerer.answer(q, ctx.replace("Janez Novak", "Janez Novok")).text == "Janez Novok"
    assert not answerer.answer(q, "Nato je Ana odšla.").is_answered


def test_cloze_whole_line_entity_falls_back_to_template():
    assert ClozeQuestionMaker().question_for("Ljubljana", "Ljubljana") == template_question("Ljubljana")


def test_decode_question():
    assert decode_question(template_question("Bled")).find("Jezero Bled.") == "Bled"
    assert decode_question("Kdo je zmagal?") is None


def test_tagger_examples():
    tag = CapitalizedRunTagger()
    assert [e.surface for e in tag.tag_entities("Luka Dončić igra za Dallas")] == ["Luka Dončić", "Dallas"]
    assert tag.tag_entities("vse je napisano z malimi črkami") == []
    assert [e.surface for e in tag.tag_entities("igra za Dallas in spet za Dallas")] == ["Dallas"]
    assert [e.surface for e in tag.tag_entities("Kako je Luka Dončić igral proti Realu?")] == ["Luka Dončić", "Realu"]


def test_tagger_drops_single_sentence_initial_word():
    assert [e.surface for e in CapitalizedRunTagger().tag_entities("Včeraj je prišel Janez. Danes ne.")] == ["Janez"]


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=st.sampled_from(list("aAbBčČ .\n-")), max_size=120))
def test_tagger_spans_valid_and_ordered(text):
    ents = CapitalizedRunTagger().tag_entities(text)
    for e in ents:
        e.check(text)
    assert all(a.end <= b.start for a, b in zip(ents, ents[1:]))
    assert ents == CapitalizedRunTagger().tag_entities(text)


def test_dedupe_entities():
    src = "Bled bled Bled"
    ents = [NamedEntity("Bled", 0, 4), NamedEntity("bled", 5, 9), NamedEntity("Bled", 10, 14), NamedEntity("led", 1, 4)]
    assert dedupe_entities(ents) == [NamedEntity("Bled", 0, 4)]
    for e in dedupe_entities(ents):
        e.check(src)


def test_similarity_examples():
    s = TokenOverlapScorer()
    assert s.similarity("Janez Novak", "Janez Novak") == 1.0
    assert round(s.similarity("rdeči avto", "avto"), 4) == 0.6667
    assert s.similarity("abc", "") == 0.0


@settings(max_examples=200, deadline=None)
@given(st.text(min_size=1, max_size=40), st.text(min_size=1, max_size=40))
def test_similarity_properties(a, b):
    for scorer in (TokenOverlapScorer(), AnchorScorer()):
        if a.strip():
            assert scorer.similarity(a, a) >= 0.999 or not a.strip(".,!? ")
        assert scorer.similarity(a, b) == scorer.similarity(b, a)
        assert 0.0 <= scorer.similarity(a, b) <= 1.0


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=60), st.text(max_size=300))
def test_answer_outcome_invariant(question, context):
    out = SubstringAnswerer(default_targets=("a", " ")).answer(question or "?", context)
    if out.is_answered:
        assert out.text.strip()
    else:
        assert out.text == ""


def test_backends_ranker_defaults_to_similarity():
    b = mock_eval_backends()
    assert isinstance(b.ranker, AnchorScorer)
    plain = Backends(b.generator, b.answerer, b.question_maker, b.tagger, b.similarity)
    assert plain.ranker is b.similarity


def test_mocks_are_pure():
    ctx = "Včeraj je Janez Novak obiskal staro tržnico."
    b = mock_eval_backends()
    runs = {
        (
            tuple(e.surface for e in b.tagger.tag_entities(ctx)),
            tuple(q.text for q in b.question_maker.make_questions(["Janez Novak"], ctx)),
            b.answerer.answer(template_question("Janez Novak"), ctx).text,
        )
        for _ in range(5)
    }
    assert len(runs) == 1
