"""Run configuration.

Config files are YAML or JSON with optional top-level sections ``backend``,
``qa`` and ``eval``; unknown keys are rejected so typos fail loudly.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

API_KEY_ENV = "QFSC_API_KEY"


@dataclass(frozen=True)
class BackendConfig:
    base_url: str = "https://api.openai.com/v1"
    model_name: str = "gpt-4.1-mini"
    embedding_model: str = "text-embedding-3-small"
    timeout_s: float = 60.0
    max_inflight: int = 4
    retry_delays: tuple[float, ...] = (1.0, 2.0, 4.0)

    def digest(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class QAConfig:
    threshold: float = 0.85
    top_n: int = 3
    chunk_budget: int = 350
    max_workers: int = 1

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise ValueError("top_n must be positive")
        if self.chunk_budget < 1:
            raise ValueError("chunk_budget must be positive")


@dataclass(frozen=True)
class EvalConfig:
    qags_k: int = 10
    question_cap: int = 10


@dataclass(frozen=True)
class RunConfig:
    backend: Optional[BackendConfig] = None
    qa: QAConfig = field(default_factory=QAConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    decomposition_cap: int = 8
    task_workers: int = 2


def _build(cls, data: Optional[dict[str, Any]]):
    if data is None:
        return cls()
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    if "retry_delays" in data:
        data = {**data, "retry_delays": tuple(float(x) for x in data["retry_delays"])}
    return cls(**data)


def load_config(path: str | Path) -> RunConfig:
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    sections = {"backend", "qa", "eval", "decomposition_cap", "task_workers"}
    unknown = set(raw) - sections
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    return RunConfig(
        backend=_build(BackendConfig, raw["backend"]) if "backend" in raw else None,
        qa=_build(QAConfig, raw.get("qa")),
        eval=_build(EvalConfig, raw.get("eval")),
        decomposition_cap=int(raw.get("decomposition_cap", 8)),
        task_workers=int(raw.get("task_workers", 2)),
    )
