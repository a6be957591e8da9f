"""QuestEval with uniform question weights and binary answerability.

Precision asks questions generated from the summary and compares the
answers found in the summary and in the document (token F1). Recall asks
questions generated from the document, answers them on the summary only and
computes

    recall = sum_q w_q * a_q / sum_q w_q

where ``a_q`` is 1 when the summary-side answer is non-empty and not the
unanswerable token, else 0. The reported score is the F1 of the two.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence, Union

from qfsc.backends.base import Backends
from qfsc.config import QAConfig
from qfsc.metrics import f1_score, token_f1
from qfsc.qa_engine import LongDocQA
from qfsc.types import AnswerOutcome, Document, GeneratedQuestion, QuestionOrigin

Weights = Union[str, Sequence[float], Callable[[GeneratedQuestion, Document], float]]


@dataclass(frozen=True)
class PrecisionTerm:
    question: GeneratedQuestion
    answer_on_summary: AnswerOutcome
    answer_on_source: AnswerOutcome
    score: Optional[float]  # None: excluded (both sides unanswerable)

    def to_dict(self) -> dict:
        return {
            "question": self.question.to_dict(),
            "answer_on_summary": self.answer_on_summary.to_dict(),
            "answer_on_source": self.answer_on_source.to_dict(),
            "token_f1": self.score,
        }


@dataclass(frozen=True)
class RecallTerm:
    question: GeneratedQuestion
    weight: float
    answerable_on_summary: int
    answer_on_summary: Optional[AnswerOutcome] = None

    def to_dict(self) -> dict:
        return {
            "question": self.question.to_dict(),
            "weight": self.weight,
            "answerable_on_summary": self.answerable_on_summary,
            "answer_on_summary": self.answer_on_summary.to_dict() if self.answer_on_summary else None,
        }


class ComponentResult(NamedTuple):
    score: float
    terms: list
    unevaluable: bool


@dataclass
class QuestEvalReport:
    precision: float
    recall: float
    f1: float
    questions_capped_at: int
    precision_terms: list[PrecisionTerm] = field(default_factory=list)
    recall_terms: list[RecallTerm] = field(default_factory=list)
    precision_unevaluable: bool = False
    recall_unevaluable: bool = False

    @property
    def unevaluable(self) -> bool:
        return self.precision_unevaluable and self.recall_unevaluable

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "questions_capped_at": self.questions_capped_at,
            "precision_unevaluable": self.precision_unevaluable,
            "recall_unevaluable": self.recall_unevaluable,
            "unevaluable": self.unevaluable,
            "precision_terms": [t.to_dict() for t in self.precision_terms],
            "recall_terms": [t.to_dict() for t in self.recall_terms],
        }


def weighted_recall(weights: Sequence[float], answerable: Sequence[int]) -> float:
    """Weighted share of answerable questions; weights must not all be zero."""
    if len(weights) != len(answerable):
        raise ValueError("weights and answerability differ in length")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    total = sum(weights)
    if total <= 0:
        raise ValueError("question weights sum to zero")
    return sum(w * a for w, a in zip(weights, answerable)) / total


def _resolve_weights(weights: Weights, questions: Sequence[GeneratedQuestion], document: Document) -> list[float]:
    if isinstance(weights, str):
        if weights != "uniform":
            raise ValueError(f"unknown weighting {weights!r}")
        return [1.0] * len(questions)
    if callable(weights):
        return [float(weights(q, document)) for q in questions]
    ws = [float(w) for w in weights]
    if len(ws) < len(questions):
        raise ValueError("fewer custom weights than questions")
    return ws[: len(questions)]


class QuestEvaluator:
    def __init__(self, backends: Backends, cap: int = 10, qa_config: QAConfig = QAConfig()):
        if cap < 1:
            raise ValueError("question cap must be positive")
        self.backends = backends
        self.cap = cap
        self.qa = LongDocQA(backends.answerer, backends.ranker, qa_config)

    def _questions(self, text: str, origin: QuestionOrigin) -> list[GeneratedQuestion]:
        entities = self.backends.tagger.tag_entities(text)[: self.cap]
        if not entities:
            return []
        qs = self.backends.question_maker.make_questions([e.surface for e in entities], text)
        return [replace(q, origin=origin) for q in qs[: self.cap]]

    def precision(self, document: Document, summary: str) -> ComponentResult:
        if not summary.strip():
            raise ValueError("summary must be non-empty")
        terms = []
        for q in self._questions(summary, QuestionOrigin.SUMMARY_QG):
            on_summary = self.qa.answer_long(q.text, summary).final
            on_source = self.qa.answer_long(q.text, document).final
            if on_summary.is_answered and on_source.is_answered:
                score: Optional[float] = token_f1(on_summary.text, on_source.text)
            elif on_summary.is_answered or on_source.is_answered:
                score = 0.0
            else:
                score = None
            terms.append(PrecisionTerm(q, on_summary, on_source, score))
        scores = [t.score for t in terms if t.score is not None]
        if not scores:
            return ComponentResult(0.0, terms, True)
        return ComponentResult(sum(scores) / len(scores), terms, False)

    def recall(self, document: Document, summary: str, weights: Weights = "uniform") -> ComponentResult:
        if not summary.strip():
            raise ValueError("summary must be non-empty")
        questions = self._questions(document.text, QuestionOrigin.SOURCE_QG)
        if not questions:
            return ComponentResult(0.0, [], True)
        ws = _resolve_weights(weights, questions, document)
        terms = []
        for q, w in zip(questions, ws):
            outcome = self.qa.answer_long(q.text, summary).final
            terms.append(RecallTerm(replace(q, weight=w), w, int(outcome.is_answered), outcome))
        score = weighted_recall([t.weight for t in terms], [t.answerable_on_summary for t in terms])
        return ComponentResult(score, terms, False)

    def evaluate(self, document: Document, summary: str, weights: Weights = "uniform") -> QuestEvalReport:
        p = self.precision(document, summary)
        r = self.recall(document, summary, weights)
        return QuestEvalReport(
            precision=p.score,
            recall=r.score,
            f1=f1_score(p.score, r.score),
            questions_capped_at=self.cap,
            precision_terms=p.terms,
            recall_terms=r.terms,
            precision_unevaluable=p.unevaluable,
            recall_unevaluable=r.unevaluable,
        )


def questeval_precision(document: Document, summary: str, backends: Backends, cap: int = 10,
                        qa_config: QAConfig = QAConfig()) -> ComponentResult:
    return QuestEvaluator(backends, cap, qa_config).precision(document, summary)


def questeval_recall(document: Document, summary: str, backends: Backends, cap: int = 10,
                     weights: Weights = "uniform", qa_config: QAConfig = QAConfig()) -> ComponentResult:
    return QuestEvaluator(backends, cap, qa_config).recall(document, summary, weights)


def questeval(document: Document, summary: str, backends: Backends, cap: int = 10,
              qa_config: QAConfig = QAConfig()) -> QuestEvalReport:
    return QuestEvaluator(backends, cap, qa_config).evaluate(document, summary)
