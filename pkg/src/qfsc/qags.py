"""QAGS: entity-anchored questions from the summary, answered on both texts.

For each of the first ``k`` entities in the summary a question is generated
(with the entity as its answer, conditioned on the summary). Each question is
answered against the full document and against the summary alone; the two
answers are compared with EM, token F1, edit distance and the embedding
similarity, and every metric is averaged over questions.

A question for which either side is unanswerable is skipped: it is recorded
with its reason but does not enter the averages.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from qfsc.backends.base import Backends
from qfsc.config import QAConfig
from qfsc.metrics import AggregateScore, AnswerPairScores, aggregate, pair_scores
from qfsc.qa_engine import LongDocQA
from qfsc.types import AnswerOutcome, Document, GeneratedQuestion, QuestionOrigin

METRICS = ("exact_match", "token_f1", "edit_distance", "similarity")


@dataclass(frozen=True)
class QagsQuestionResult:
    question: GeneratedQuestion
    answer_on_source: AnswerOutcome
    answer_on_summary: AnswerOutcome
    scores: Optional[AnswerPairScores] = None
    skip_reason: Optional[str] = None

    @property
    def skipped(self) -> bool:
        return self.scores is None

    def to_dict(self) -> dict:
        return {
            "question": self.question.to_dict(),
            "answer_on_source": self.answer_on_source.to_dict(),
            "answer_on_summary": self.answer_on_summary.to_dict(),
            "scores": self.scores.as_dict() if self.scores else None,
            "skip_reason": self.skip_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> QagsQuestionResult:
        return cls(
            question=GeneratedQuestion.from_dict(d["question"]),
            answer_on_source=AnswerOutcome.from_dict(d["answer_on_source"]),
            answer_on_summary=AnswerOutcome.from_dict(d["answer_on_summary"]),
            scores=AnswerPairScores.from_dict(d["scores"]) if d.get("scores") else None,
            skip_reason=d.get("skip_reason"),
        )


@dataclass
class QagsReport:
    k_requested: int
    per_question: list[QagsQuestionResult] = field(default_factory=list)
    aggregates: dict[str, Optional[AggregateScore]] = field(default_factory=lambda: dict.fromkeys(METRICS))

    @property
    def k_effective(self) -> int:
        return len(self.per_question)

    @property
    def scored(self) -> list[QagsQuestionResult]:
        return [r for r in self.per_question if not r.skipped]

    @property
    def skipped(self) -> int:
        return sum(r.skipped for r in self.per_question)

    @property
    def unevaluable(self) -> bool:
        return not self.scored

    def finalize(self) -> QagsReport:
        scored = self.scored
        for m in METRICS:
            self.aggregates[m] = aggregate([getattr(r.scores, m) for r in scored]) if scored else None
        return self

    def to_dict(self) -> dict:
        return {
            "k_requested": self.k_requested,
            "k_effective": self.k_effective,
            "skipped": self.skipped,
            "unevaluable": self.unevaluable,
            "aggregates": {m: (a.as_dict() if a else None) for m, a in self.aggregates.items()},
            "per_question": [r.to_dict() for r in self.per_question],
        }

    @classmethod
    def from_dict(cls, d: dict) -> QagsReport:
        rep = cls(int(d["k_requested"]), [QagsQuestionResult.from_dict(r) for r in d["per_question"]])
        rep.aggregates = {m: AggregateScore.from_dict(a) for m, a in d["aggregates"].items()}
        return rep


class QagsError(RuntimeError):
    def __init__(self, message: str, partial: QagsReport):
        super().__init__(message)
        self.partial = partial


class QagsEvaluator:
    def __init__(self, backends: Backends, k: int = 10, qa_config: QAConfig = QAConfig(), workers: int = 1):
        if k < 1:
            raise ValueError("k must be positive")
        self.backends = backends
        self.k = k
        self.qa = LongDocQA(backends.answerer, backends.ranker, qa_config)
        self.workers = workers

    def question_result(self, q: GeneratedQuestion, document: Document, summary: str) -> QagsQuestionResult:
        on_source = self.qa.answer_long(q.text, document).final
        on_summary = self.qa.answer_long(q.text, summary).final
        if not on_source.is_answered or not on_summary.is_answered:
            sides = [name for name, o in (("source", on_source), ("summary", on_summary)) if not o.is_answered]
            return QagsQuestionResult(q, on_source, on_summary, skip_reason="unanswerable on " + " and ".join(sides))
        # candidate = summary-side answer, reference = source-side answer
        scores = pair_scores(on_summary.text, on_source.text, self.backends.similarity)
        return QagsQuestionResult(q, on_source, on_summary, scores)

    def evaluate(self, document: Document, summary: str) -> QagsReport:
        if not summary.strip():
            raise ValueError("summary must be non-empty")
        report = QagsReport(self.k)
        entities = self.backends.tagger.tag_entities(summary)[: self.k]
        if not entities:
            return report.finalize()
        questions = [
            replace(q, origin=QuestionOrigin.ENTITY_QG)
            for q in self.backends.question_maker.make_questions([e.surface for e in entities], summary)
        ]
        try:
            if self.workers > 1:
                with ThreadPoolExecutor(self.workers) as pool:
                    report.per_question = list(pool.map(lambda q: self.question_result(q, document, summary), questions))
            else:
                for q in questions:
                    report.per_question.append(self.question_result(q, document, summary))
        except Exception as exc:
            raise QagsError(f"QAGS failed after {report.k_effective} questions: {exc}", report.finalize()) from exc
        return report.finalize()


def qags(document: Document, summary: str, backends: Backends, k: int = 10,
         qa_config: QAConfig = QAConfig()) -> QagsReport:
    return QagsEvaluator(backends, k, qa_config).evaluate(document, summary)
