"""Domain records shared across the pipeline and the evaluators."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Any, Optional


@dataclass(frozen=True)
class Document:
    """A source text unit."""

    id: str
    text: str
    title: Optional[str] = None
    source_url: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.text or not self.text.strip():
            raise ValueError(f"document {self.id!r} has empty text")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Document:
        return cls(
            id=str(data["id"]),
            text=data["text"],
            title=data.get("title"),
            source_url=data.get("source_url"),
        )


@dataclass(frozen=True)
class GenerationRequest:
    user_prompt: str
    system_instruction: str = ""
    max_output_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.user_prompt:
            raise ValueError("user_prompt must be non-empty")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")


class AnswerKind(str, enum.Enum):
    ANSWERED = "answered"
    UNANSWERABLE = "unanswerable"


@dataclass(frozen=True)
class AnswerOutcome:
    """Result of one QA call: an answer text or the unanswerable marker."""

    kind: AnswerKind
    text: str = ""
    source_chunk_index: Optional[int] = None
    chunk_score: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind is AnswerKind.ANSWERED and not self.text.strip():
            raise ValueError("answered outcome needs non-empty text")
        if self.kind is AnswerKind.UNANSWERABLE and self.text:
            raise ValueError("unanswerable outcome must carry empty text")
        if self.source_chunk_index is not None and self.source_chunk_index < 0:
            raise ValueError("source_chunk_index must be non-negative")
        if self.chunk_score is not None and not -1.0 <= self.chunk_score <= 1.0:
            raise ValueError("chunk_score must lie in [-1, 1]")

    @classmethod
    def answered(cls, text: str, **kw: Any) -> AnswerOutcome:
        return cls(AnswerKind.ANSWERED, text, **kw)

    @classmethod
    def unanswerable(cls, **kw: Any) -> AnswerOutcome:
        return cls(AnswerKind.UNANSWERABLE, "", **kw)

    @property
    def is_answered(self) -> bool:
        return self.kind is AnswerKind.ANSWERED

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "text": self.text,
            "source_chunk_index": self.source_chunk_index,
            "chunk_score": self.chunk_score,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AnswerOutcome:
        return cls(
            AnswerKind(data["kind"]),
            data.get("text", ""),
            source_chunk_index=data.get("source_chunk_index"),
            chunk_score=data.get("chunk_score"),
        )


@dataclass(frozen=True)
class NamedEntity:
    surface: str
    start: int
    end: int
    label: Optional[str] = None

    def check(self, source: str) -> None:
        """Raise ValueError unless the span is a valid slice of ``source``."""
        if not 0 <= self.start < self.end <= len(source):
            raise ValueError(f"span ({self.start}, {self.end}) out of range")
        if source[self.start:self.end] != self.surface:
            raise ValueError(f"surface {self.surface!r} does not match source slice")


class QuestionOrigin(str, enum.Enum):
    LLM_DECOMPOSITION = "llm_decomposition"
    ENTITY_QG = "entity_qg"
    SOURCE_QG = "source_qg"
    SUMMARY_QG = "summary_qg"


@dataclass(frozen=True)
class GeneratedQuestion:
    text: str
    origin: QuestionOrigin
    target_answer: Optional[str] = None
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("question text must be non-empty")
        if self.origin is QuestionOrigin.ENTITY_QG and self.target_answer is None:
            raise ValueError("entity-driven questions must carry their target answer")
        if self.weight < 0:
            raise ValueError("question weight must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "origin": self.origin.value,
            "target_answer": self.target_answer,
            "weight": self.weight,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GeneratedQuestion:
        return cls(
            text=data["text"],
            origin=QuestionOrigin(data["origin"]),
            target_answer=data.get("target_answer"),
            weight=float(data.get("weight", 1.0)),
        )


@dataclass
class RunLog:
    """Append-only list of warning/failure events for one run."""

    events: list[dict[str, Any]] = field(default_factory=list)

    def warn(self, message: str, **context: Any) -> None:
        self.events.append({"level": "warning", "message": message, **context})

    def error(self, message: str, **context: Any) -> None:
        self.events.append({"level": "error", "message": message, **context})
