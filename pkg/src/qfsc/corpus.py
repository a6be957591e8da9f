"""Corpus JSONL: one ``{"id", "title"?, "text", "query"}`` object per line."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from qfsc.types import Document


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    text: str
    query: str
    title: Optional[str] = None

    def to_document(self) -> Document:
        return Document(id=self.id, text=self.text, title=self.title)

    def to_dict(self) -> dict:
        d = {"id": self.id}
        if self.title is not None:
            d["title"] = self.title
        d["text"] = self.text
        d["query"] = self.query
        return d


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class CorpusError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics[:5]))
        self.diagnostics = diagnostics


def _check_entry(obj, lineno: int) -> list[Diagnostic]:
    if not isinstance(obj, dict):
        return [Diagnostic(lineno, "record is not a JSON object")]
    problems = []
    for key in ("id", "text", "query"):
        if key not in obj:
            problems.append(Diagnostic(lineno, f"missing field {key!r}"))
        elif not isinstance(obj[key], str):
            problems.append(Diagnostic(lineno, f"field {key!r} must be a string"))
        elif not obj[key].strip():
            problems.append(Diagnostic(lineno, f"field {key!r} is empty"))
    if "title" in obj and obj["title"] is not None and not isinstance(obj["title"], str):
        problems.append(Diagnostic(lineno, "field 'title' must be a string"))
    extra = set(obj) - {"id", "title", "text", "query"}
    if extra:
        problems.append(Diagnostic(lineno, f"unknown fields {sorted(extra)}"))
    return problems


def scan_corpus(path: str | Path) -> tuple[list[CorpusEntry], list[Diagnostic]]:
    """Parse the corpus, collecting every problem instead of stopping at the first."""
    entries: list[CorpusEntry] = []
    diags: list[Diagnostic] = []
    first_seen: dict[str, int] = {}
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                diags.append(Diagnostic(lineno, f"not valid UTF-8 ({exc.reason} at byte {exc.start})"))
                continue
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                diags.append(Diagnostic(lineno, f"invalid JSON: {exc.msg}"))
                continue
            problems = _check_entry(obj, lineno)
            if problems:
                diags.extend(problems)
                continue
            if obj["id"] in first_seen:
                diags.append(Diagnostic(lineno, f"duplicate id {obj['id']!r} (first on line {first_seen[obj['id']]})"))
                continue
            first_seen[obj["id"]] = lineno
            entries.append(CorpusEntry(obj["id"], obj["text"], obj["query"], obj.get("title")))
    return entries, diags


def load_corpus(path: str | Path) -> list[CorpusEntry]:
    entries, diags = scan_corpus(path)
    if diags:
        raise CorpusError(diags)
    return entries


def write_corpus(entries: list[CorpusEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_dict(), ensure_ascii=False) + "\n")
