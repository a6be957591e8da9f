"""Model-role interfaces consumed by the pipeline and the evaluators."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, runtime_checkable

from qfsc.types import AnswerOutcome, GeneratedQuestion, GenerationRequest, NamedEntity

DEFAULT_CONTEXT_LIMIT = 350


class BackendError(Exception):
    """Base class for model backend failures.

    ``retryable`` tells whether the failing call may succeed if repeated and
    ``attempts`` how many times it was tried before giving up.
    """

    retryable = False

    def __init__(self, message: str, *, attempts: int = 1, retryable: Optional[bool] = None):
        super().__init__(message)
        self.attempts = attempts
        if retryable is not None:
            self.retryable = retryable


class TransportError(BackendError):
    retryable = True


class BackendTimeout(TransportError):
    pass


class HTTPStatusError(BackendError):
    def __init__(self, status: int, message: str, **kw):
        kw.setdefault("retryable", status == 429 or status >= 500)
        super().__init__(f"HTTP {status}: {message}", **kw)
        self.status = status


class MalformedResponseError(BackendError):
    pass


class ContextTooLongError(ValueError):
    """Raised by single-shot answerers; callers must chunk the context first."""


@runtime_checkable
class Generator(Protocol):
    def generate(self, req: GenerationRequest) -> str: ...


@runtime_checkable
class Answerer(Protocol):
    max_context_chars: int

    def answer(self, question: str, context: str) -> AnswerOutcome: ...


@runtime_checkable
class QuestionMaker(Protocol):
    def make_questions(self, targets: Sequence[str], context: str) -> list[GeneratedQuestion]: ...


@runtime_checkable
class EntityTagger(Protocol):
    def tag_entities(self, text: str) -> list[NamedEntity]: ...


@runtime_checkable
class SimilarityScorer(Protocol):
    def similarity(self, candidate: str, reference: str) -> float: ...


@dataclass(frozen=True)
class Backends:
    """The five model roles bundled together.

    ``chunk_scorer`` ranks question/chunk pairs inside the long-document QA
    engine; when unset the general ``similarity`` scorer is used.
    """

    generator: Generator
    answerer: Answerer
    question_maker: QuestionMaker
    tagger: EntityTagger
    similarity: SimilarityScorer
    chunk_scorer: Optional[SimilarityScorer] = None

    @property
    def ranker(self) -> SimilarityScorer:
        return self.chunk_scorer if self.chunk_scorer is not None else self.similarity


def check_context(context: str, limit: int) -> None:
    if len(context) > limit:
        raise ContextTooLongError(
            f"context of {len(context)} characters exceeds single-shot limit {limit}"
        )


def dedupe_entities(entities: Sequence[NamedEntity]) -> list[NamedEntity]:
    """Sort by start, drop overlaps and case-insensitive duplicate surfaces."""
    seen: set[str] = set()
    out: list[NamedEntity] = []
    last_end = 0
    for ent in sorted(entities, key=lambda e: (e.start, -e.end)):
        key = ent.surface.casefold()
        if ent.start < last_end or key in seen:
            continue
        seen.add(key)
        out.append(ent)
        last_end = ent.end
    return out
