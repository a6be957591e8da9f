"""Question answering over documents longer than the answerer's input limit.

The document is cut into sentence-packed chunks, every chunk is scored
against the question, and only the ``top_n`` best chunks scoring strictly
above ``threshold`` are passed to the answerer. The final answer is the
modal one among the answered outcomes; equal counts go to the answer whose
best supporting chunk scored higher.
"""
from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

from qfsc.backends.base import Answerer, SimilarityScorer
from qfsc.config import QAConfig
from qfsc.textproc import Chunk, chunk_text, normalize_answer
from qfsc.types import AnswerOutcome, Document


@dataclass(frozen=True)
class ChunkScore:
    chunk: Chunk
    score: float


@dataclass
class LongDocAnswerTrace:
    question: str
    ranked: list[ChunkScore] = field(default_factory=list)
    consulted: list[tuple[int, AnswerOutcome]] = field(default_factory=list)
    final: AnswerOutcome = field(default_factory=AnswerOutcome.unanswerable)

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "ranked": [{"chunk_index": cs.chunk.index, "score": cs.score} for cs in self.ranked],
            "consulted": [{"chunk_index": i, "outcome": o.to_dict()} for i, o in self.consulted],
            "final": self.final.to_dict(),
        }


class QAEngineError(RuntimeError):
    """A backend failed mid-answer; ``trace`` holds what was computed so far."""

    def __init__(self, message: str, trace: LongDocAnswerTrace):
        super().__init__(message)
        self.trace = trace


def rank_chunks(question: str, chunks: Sequence[Chunk], scorer: SimilarityScorer) -> list[ChunkScore]:
    if not chunks:
        raise ValueError("no chunks to rank")
    scored = [ChunkScore(c, float(scorer.similarity(question, c.text))) for c in chunks]
    # sorted() is stable, so equal scores keep document order
    return sorted(scored, key=lambda cs: -cs.score)


def modal_vote(consulted: Sequence[tuple[ChunkScore, AnswerOutcome]]) -> AnswerOutcome:
    """Pick the final answer from per-chunk outcomes given in ranked order.

    Answers vote after normalization. The winner has the most votes; ties go
    to the larger best supporting chunk score, then to the earlier ranked
    chunk. The returned outcome is the winner's highest-ranked supporter,
    so its raw text is one of the inputs. Abstentions never vote.
    """
    groups: dict[str, list[int]] = defaultdict(list)
    for pos, (_, outcome) in enumerate(consulted):
        if outcome.is_answered:
            groups[normalize_answer(outcome.text)].append(pos)
    if not groups:
        return AnswerOutcome.unanswerable()

    def key(positions: list[int]):
        best = max(consulted[p][0].score for p in positions)
        return (len(positions), best, -positions[0])

    winner = max(groups.values(), key=key)
    top = max(winner, key=lambda p: (consulted[p][0].score, -p))
    return consulted[top][1]


class LongDocQA:
    def __init__(self, answerer: Answerer, scorer: SimilarityScorer, config: QAConfig = QAConfig()):
        self.answerer = answerer
        self.scorer = scorer
        self.config = config

    def rank_chunks(self, question: str, chunks: Sequence[Chunk]) -> list[ChunkScore]:
        return rank_chunks(question, chunks, self.scorer)

    def _ask(self, question: str, cs: ChunkScore) -> AnswerOutcome:
        outcome = self.answerer.answer(question, cs.chunk.text)
        score = min(1.0, max(-1.0, cs.score))
        return replace(outcome, source_chunk_index=cs.chunk.index, chunk_score=score)

    def answer_long(self, question: str, document: Document | str) -> LongDocAnswerTrace:
        if not question.strip():
            raise ValueError("question must be non-empty")
        text = document.text if isinstance(document, Document) else document
        if not text.strip():
            raise ValueError("document text must be non-empty")

        trace = LongDocAnswerTrace(question)
        cfg = self.config
        try:
            trace.ranked = self.rank_chunks(question, chunk_text(text, cfg.chunk_budget))
            selected = [cs for cs in trace.ranked if cs.score > cfg.threshold][: cfg.top_n]
            if cfg.max_workers > 1 and len(selected) > 1:
                with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
                    outcomes = list(pool.map(lambda cs: self._ask(question, cs), selected))
            else:
                outcomes = []
                for cs in selected:
                    outcomes.append(self._ask(question, cs))
                    trace.consulted.append((cs.chunk.index, outcomes[-1]))
        except Exception as exc:
            raise QAEngineError(f"answering {question!r} failed: {exc}", trace) from exc

        trace.consulted = [(cs.chunk.index, o) for cs, o in zip(selected, outcomes)]
        trace.final = modal_vote(list(zip(selected, outcomes)))
        return trace


def answer_long(
    question: str,
    document: Document | str,
    answerer: Answerer,
    scorer: SimilarityScorer,
    threshold: float = 0.85,
    top_n: int = 3,
    chunk_budget: int = 350,
) -> LongDocAnswerTrace:
    cfg = QAConfig(threshold=threshold, top_n=top_n, chunk_budget=chunk_budget)
    return LongDocQA(answerer, scorer, cfg).answer_long(question, document)

