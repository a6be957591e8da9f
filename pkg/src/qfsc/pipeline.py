"""End-to-end query-focused summarization.

decompose the query -> answer each sub-question over the source document ->
assemble the augmented prompt -> generate the summary.
"""
from __future__ import annotations

import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from qfsc.backends.base import Backends
from qfsc.config import QAConfig
from qfsc.decomposer import DEFAULT_DECOMPOSITION_CAP, Decomposer, Setting
from qfsc.metrics import AggregateScore, aggregate
from qfsc.prompts import load_template, render
from qfsc.qa_engine import LongDocQA, QAEngineError
from qfsc.types import AnswerOutcome, Document, GeneratedQuestion, GenerationRequest, RunLog

log = logging.getLogger(__name__)

SUMMARY_SYSTEM = "Si natančen pomočnik za povzemanje slovenskih besedil."
SUMMARY_TEMPERATURE = 0.3
SUMMARY_MAX_TOKENS = 1024


@dataclass(frozen=True)
class QueryTask:
    document: Document
    query: str
    setting: Setting

    def __post_init__(self) -> None:
        if not self.query.strip():
            raise ValueError("query must be non-empty")
        object.__setattr__(self, "setting", Setting(self.setting))


@dataclass(frozen=True)
class QaPair:
    question: GeneratedQuestion
    outcome: AnswerOutcome

    def to_dict(self) -> dict[str, Any]:
        return {"question": self.question.to_dict(), "outcome": self.outcome.to_dict()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> QaPair:
        return cls(GeneratedQuestion.from_dict(d["question"]), AnswerOutcome.from_dict(d["outcome"]))


def word_count(text: str) -> int:
    return len(text.split())


@dataclass
class SummaryRecord:
    task: QueryTask
    qa_pairs: list[QaPair]
    augmented_prompt: str
    summary: str
    model: str
    char_count: int = -1
    word_count: int = -1
    timing: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.char_count < 0:
            self.char_count = len(self.summary)
        if self.word_count < 0:
            self.word_count = word_count(self.summary)

    @property
    def key(self) -> tuple[str, str]:
        return (self.task.document.id, self.task.setting.value)

    def to_dict(self, with_timing: bool = True) -> dict[str, Any]:
        d = {
            "entry_id": self.task.document.id,
            "setting": self.task.setting.value,
            "model": self.model,
            "query": self.task.query,
            "document": self.task.document.to_dict(),
            "qa_pairs": [p.to_dict() for p in self.qa_pairs],
            "augmented_prompt": self.augmented_prompt,
            "summary": self.summary,
            "char_count": self.char_count,
            "word_count": self.word_count,
        }
        if with_timing:
            d["timing_ms"] = dict(self.timing)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SummaryRecord:
        task = QueryTask(Document.from_dict(d["document"]), d["query"], Setting(d["setting"]))
        return cls(
            task=task,
            qa_pairs=[QaPair.from_dict(p) for p in d["qa_pairs"]],
            augmented_prompt=d["augmented_prompt"],
            summary=d["summary"],
            model=d["model"],
            char_count=int(d["char_count"]),
            word_count=int(d["word_count"]),
            timing=dict(d.get("timing_ms", {})),
        )


class PipelineError(RuntimeError):
    """A stage failed; ``partial`` keeps whatever that task produced so far."""

    def __init__(self, stage: str, task: QueryTask, cause: BaseException, partial: Optional[dict] = None):
        super().__init__(f"[{stage}] task {task.document.id}/{task.setting.value}: {cause}")
        self.stage = stage
        self.task = task
        self.partial = partial or {}


def format_facts(qa_pairs: Sequence[QaPair]) -> str:
    lines = [f"V: {p.question.text} / O: {p.outcome.text}" for p in qa_pairs if p.outcome.is_answered]
    if not lines:
        return ""
    return "\nDejstva:\n" + "\n".join(lines) + "\n"


def build_augmented_prompt(task: QueryTask, qa_pairs: Sequence[QaPair], template: Optional[str] = None) -> str:
    """Summarization prompt: header, query, answered facts (if any), source text.

    Unanswerable pairs are left out; with no answered pair the result is the
    plain ``no_aug`` prompt byte for byte.
    """
    tpl = template if template is not None else load_template("summarize")
    return render(tpl, query=task.query, facts=format_facts(qa_pairs), text=task.document.text)


class Pipeline:
    def __init__(
        self,
        backends: Backends,
        qa_config: QAConfig = QAConfig(),
        decomposition_cap: int = DEFAULT_DECOMPOSITION_CAP,
        template: Optional[str] = None,
        run_log: Optional[RunLog] = None,
    ):
        self.backends = backends
        self.qa = LongDocQA(backends.answerer, backends.ranker, qa_config)
        self.decomposer = Decomposer(
            backends.generator, backends.tagger, backends.question_maker, cap=decomposition_cap
        )
        self.template = template if template is not None else load_template("summarize")
        self.run_log = run_log if run_log is not None else RunLog()
        self.model_name = getattr(backends.generator, "model_name", type(backends.generator).__name__)

    def summarize(self, task: QueryTask) -> SummaryRecord:
        timing: dict[str, float] = {}

        t0 = time.perf_counter()
        try:
            questions = self.decomposer.decompose(task.query, task.setting, self.run_log)
        except Exception as exc:
            raise PipelineError("decompose", task, exc) from exc
        timing["decompose"] = (time.perf_counter() - t0) * 1000

        t0 = time.perf_counter()
        pairs: list[QaPair] = []
        for q in questions:
            try:
                trace = self.qa.answer_long(q.text, task.document)
            except QAEngineError as exc:
                partial = {"qa_pairs": [p.to_dict() for p in pairs], "trace": exc.trace.to_dict()}
                self.run_log.error(str(exc), stage="qa", entry_id=task.document.id, **partial)
                raise PipelineError("qa", task, exc, partial) from exc
            pairs.append(QaPair(q, trace.final))
        timing["qa"] = (time.perf_counter() - t0) * 1000

        prompt = build_augmented_prompt(task, pairs, self.template)
        t0 = time.perf_counter()
        try:
            summary = self.backends.generator.generate(
                GenerationRequest(
                    prompt,
                    system_instruction=SUMMARY_SYSTEM,
                    temperature=SUMMARY_TEMPERATURE,
                    max_output_tokens=SUMMARY_MAX_TOKENS,
                )
            )
        except Exception as exc:
            partial = {"qa_pairs": [p.to_dict() for p in pairs], "augmented_prompt": prompt}
            raise PipelineError("generate", task, exc, partial) from exc
        timing["generate"] = (time.perf_counter() - t0) * 1000

        return SummaryRecord(task, pairs, prompt, summary, self.model_name, timing=timing)


@dataclass(frozen=True)
class LengthStats:
    chars: AggregateScore
    words: AggregateScore


def length_stats(records: Sequence[SummaryRecord]) -> dict[tuple[str, str], LengthStats]:
    """Character and word count mean/std per (model, setting)."""
    if not records:
        raise ValueError("no records")
    groups: dict[tuple[str, str], list[SummaryRecord]] = defaultdict(list)
    for r in records:
        groups[(r.model, r.task.setting.value)].append(r)
    out = {}
    for key, recs in groups.items():
        out[key] = LengthStats(
            chars=aggregate([r.char_count for r in recs]),
            words=aggregate([r.word_count for r in recs]),
        )
    return out
