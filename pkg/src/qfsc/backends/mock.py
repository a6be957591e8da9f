"""Deterministic rule-based backends for offline runs and tests.

Every class here is a pure function of its inputs. The two question
makers produce questions in formats the substring answerer and the
anchor scorer know how to decode, so a whole pipeline or evaluation run
under mocks has analytically predictable output:

* template questions ``Kaj velja za <entity>?`` are answered with the
  entity itself wherever it occurs;
* cloze questions ``Kaj manjka v »<left>___<right>«?`` are answered with
  whatever fills the gap between the two context windows.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from qfsc.backends.base import (
    DEFAULT_CONTEXT_LIMIT,
    Backends,
    MalformedResponseError,
    check_context,
    dedupe_entities,
)
from qfsc.metrics import token_f1
from qfsc.textproc import sentence_spans
from qfsc.types import AnswerOutcome, GeneratedQuestion, GenerationRequest, NamedEntity, QuestionOrigin

log = logging.getLogger(__name__)

SUMMARY_MARKER = "POVZEMI:"

_TEMPLATE_RE = re.compile(r"^Kaj velja za (.+)\?$", re.DOTALL)
_CLOZE_RE = re.compile(r"^Kaj manjka v »(.*)___(.*)«\?$", re.DOTALL)
_GAP = r"([^\n.!?]+?)"
_LEFT_ANCHOR = r"(?:^|(?<=[.!?:]\s)|(?<=\n))"
_RIGHT_ANCHOR = r"(?=[.!?]|\n|$)"
_WORD = re.compile(r"[^\W\d_]+(?:[-'’][^\W\d_]+)*")
_INITIAL_GAP = re.compile(r"[.!?:]|\n")


def template_question(target: str) -> str:
    return f"Kaj velja za {target}?"


def cloze_question(left: str, right: str) -> str:
    return f"Kaj manjka v »{left}___{right}«?"


def _ws_pattern(s: str) -> str:
    return "".join(r"\s+" if part.isspace() else re.escape(part) for part in re.split(r"(\s+)", s) if part)


@dataclass(frozen=True)
class Probe:
    """A decoded mock question: either a literal target or a cloze pattern."""

    target: Optional[str] = None
    pattern: Optional[re.Pattern] = None

    def find(self, context: str) -> Optional[str]:
        if self.target is not None:
            return self.target if self.target in context else None
        m = self.pattern.search(context)
        if m is None:
            return None
        gap = m.group(1).strip()
        return gap or None


def decode_question(question: str) -> Optional[Probe]:
    """Recover what a mock-generated question asks for, or None."""
    m = _TEMPLATE_RE.match(question)
    if m:
        return Probe(target=m.group(1))
    m = _CLOZE_RE.match(question)
    if m:
        left, right = m.group(1), m.group(2)
        head = _ws_pattern(left) if left else _LEFT_ANCHOR
        tail = _ws_pattern(right) if right else _RIGHT_ANCHOR
        return Probe(pattern=re.compile(head + _GAP + tail))
    return None


class EchoGenerator:
    """Returns the prompt text after the first ``POVZEMI:`` marker (or all of it)."""

    model_name = "echo"

    def __init__(self, marker: str = SUMMARY_MARKER):
        self.marker = marker

    def generate(self, req: GenerationRequest) -> str:
        prompt = req.user_prompt
        idx = prompt.find(self.marker)
        out = prompt[idx + len(self.marker):] if idx >= 0 else prompt
        out = out.strip()
        if not out:
            raise MalformedResponseError("echo generator has nothing to return")
        return out


class CannedGenerator:
    """Always replies with the same text."""

    model_name = "canned"

    def __init__(self, reply: str):
        self.reply = reply

    def generate(self, req: GenerationRequest) -> str:
        return self.reply


@dataclass(frozen=True)
class SubstringAnswerer:
    """Answers with the first target string found verbatim in the context.

    Targets are tried in order: those configured for this exact question,
    then what the question itself encodes (template or cloze), then the
    ``default_targets``.
    """

    targets: Mapping[str, Sequence[str]] = field(default_factory=dict)
    default_targets: Sequence[str] = ()
    max_context_chars: int = DEFAULT_CONTEXT_LIMIT

    def answer(self, question: str, context: str) -> AnswerOutcome:
        check_context(context, self.max_context_chars)
        for target in self.targets.get(question, ()):
            if target.strip() and target in context:
                return AnswerOutcome.answered(target)
        probe = decode_question(question)
        if probe is not None:
            found = probe.find(context)
            if found:
                return AnswerOutcome.answered(found)
        for target in self.default_targets:
            if target.strip() and target in context:
                return AnswerOutcome.answered(target)
        return AnswerOutcome.unanswerable()


def _require_in_context(targets: Sequence[str], context: str) -> None:
    for t in targets:
        if t not in context:
            raise ValueError(f"target {t!r} does not occur in the context")


class TemplateQuestionMaker:
    """One ``Kaj velja za <target>?`` question per target."""

    def make_questions(self, targets: Sequence[str], context: str) -> list[GeneratedQuestion]:
        _require_in_context(targets, context)
        return [
            GeneratedQuestion(template_question(t), QuestionOrigin.ENTITY_QG, target_answer=t)
            for t in targets
        ]


class ClozeQuestionMaker:
    """Masks the target inside its sentence and asks for the gap.

    The question keeps up to ``window`` words on each side of the target,
    never crossing a line break or sentence boundary. A target that fills
    its whole sentence gets a template question instead.
    """

    def __init__(self, window: int = 3):
        self.window = window

    def _segment(self, context: str, pos: int) -> tuple[int, int]:
        line_start = context.rfind("\n", 0, pos) + 1
        line_end = context.find("\n", pos)
        if line_end < 0:
            line_end = len(context)
        line = context[line_start:line_end]
        for a, b in sentence_spans(line):
            if line_start + a <= pos < line_start + b:
                return line_start + a, line_start + b
        return line_start, line_end

    def question_for(self, target: str, context: str) -> str:
        pos = context.find(target)
        if pos < 0:
            raise ValueError(f"target {target!r} does not occur in the context")
        seg_start, seg_end = self._segment(context, pos)
        end = pos + len(target)

        left_words = list(re.finditer(r"\S+", context[seg_start:pos]))
        left_from = seg_start + left_words[-min(self.window, len(left_words))].start() if left_words else pos
        right_words = list(re.finditer(r"\S+", context[end:seg_end]))
        if right_words:
            right_to = end + right_words[min(self.window, len(right_words)) - 1].end()
        else:
            right_to = end
        left, right = context[left_from:pos], context[end:right_to]
        if not left.strip() and not right.strip():
            return template_question(target)
        return cloze_question(left, right)

    def make_questions(self, targets: Sequence[str], context: str) -> list[GeneratedQuestion]:
        return [
            GeneratedQuestion(self.question_for(t, context), QuestionOrigin.ENTITY_QG, target_answer=t)
            for t in targets
        ]


class CapitalizedRunTagger:
    """Tags runs of capitalized words as entities.

    Consecutive capitalized words separated only by spaces merge into one
    entity. A run that starts a sentence (text start, after ``.!?:`` or a
    line break) is dropped unless it has at least two words.
    """

    def tag_entities(self, text: str) -> list[NamedEntity]:
        runs: list[list] = []  # [start, end, n_words, sentence_initial]
        run_open = False
        prev_end: Optional[int] = None
        for m in _WORD.finditer(text):
            gap = None if prev_end is None else text[prev_end:m.start()]
            capital = m.group(0)[0].isupper()
            if capital and run_open and gap and not gap.strip(" \t"):
                runs[-1][1] = m.end()
                runs[-1][2] += 1
            elif capital:
                initial = gap is None or bool(_INITIAL_GAP.search(gap))
                runs.append([m.start(), m.end(), 1, initial])
                run_open = True
            else:
                run_open = False
            prev_end = m.end()

        entities = [
            NamedEntity(text[start:end], start, end)
            for start, end, n_words, initial in runs
            if n_words >= 2 or not initial
        ]
        return dedupe_entities(entities)


class TokenOverlapScorer:
    """Unigram-overlap F1 as a lexical stand-in for BERTScore."""

    def similarity(self, candidate: str, reference: str) -> float:
        if not candidate.strip() or not reference.strip():
            log.warning("similarity on empty input; scoring 0.0")
            return 0.0
        return token_f1(candidate, reference)


class ScriptedScorer:
    """Scores by marker substrings: the first rule whose marker occurs in either
    string wins, otherwise ``default``."""

    def __init__(self, rules: Sequence[tuple[str, float]], default: float = 0.0):
        self.rules = list(rules)
        self.default = default

    def similarity(self, candidate: str, reference: str) -> float:
        for marker, score in self.rules:
            if marker in candidate or marker in reference:
                return score
        return self.default


class AnchorScorer:
    """Chunk ranker for the mock stack.

    Scores ``hit`` when one side is a decodable mock question whose answer
    can be found in the other side, else falls back to token-overlap F1.
    """

    def __init__(self, hit: float = 0.95):
        self.hit = hit
        self._fallback = TokenOverlapScorer()

    def similarity(self, candidate: str, reference: str) -> float:
        for question, text in ((candidate, reference), (reference, candidate)):
            probe = decode_question(question)
            if probe is not None and probe.find(text) is not None:
                return self.hit
        return self._fallback.similarity(candidate, reference)


def mock_pipeline_backends(generator=None) -> Backends:
    """Mock stack for summarization: echo generation, template QG."""
    return Backends(
        generator=generator or EchoGenerator(),
        answerer=SubstringAnswerer(),
        question_maker=TemplateQuestionMaker(),
        tagger=CapitalizedRunTagger(),
        similarity=TokenOverlapScorer(),
        chunk_scorer=AnchorScorer(),
    )


def mock_eval_backends() -> Backends:
    """Mock stack for QAGS/QuestEval: cloze QG so answers depend on the context."""
    return Backends(
        generator=EchoGenerator(),
        answerer=SubstringAnswerer(),
        question_maker=ClozeQuestionMaker(),
        tagger=CapitalizedRunTagger(),
        similarity=TokenOverlapScorer(),
        chunk_scorer=AnchorScorer(),
    )
