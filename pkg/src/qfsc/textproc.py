"""Text utilities: answer normalization, unigram tokens, sentences, chunking.

All functions here are pure and safe to call from any thread.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

DEFAULT_CHUNK_BUDGET = 350

# Short titles that end with a period but rarely end a sentence.
ABBREVIATIONS = frozenset(
    {"dr", "mr", "mag", "prof", "doc", "ga", "gdč", "g", "st", "sv", "npr", "tj", "oz", "mrs", "ms", "jr", "sr"}
)

_SENT_END = re.compile(r"[.!?]+[\"'«»“”’)\]]*(?=\s|$)")
_NON_SPACE = re.compile(r"\S")


@dataclass(frozen=True)
class Chunk:
    index: int
    text: str
    start: int
    end: int

    @property
    def char_span(self) -> tuple[int, int]:
        return (self.start, self.end)


def _strip_punct(s: str) -> str:
    return "".join(ch for ch in s if not unicodedata.category(ch).startswith("P"))


def normalize_answer(s: str) -> str:
    """Lowercase, drop Unicode punctuation, collapse whitespace."""
    return " ".join(_strip_punct(s.lower()).split())


def tokenize(s: str) -> list[str]:
    return normalize_answer(s).split()


def normalize_whitespace(s: str) -> str:
    return " ".join(s.split())


def _is_abbreviation(text: str, punct_start: int) -> bool:
    if text[punct_start] != ".":
        return False
    i = punct_start
    while i > 0 and (text[i - 1].isalnum() or text[i - 1] == "_"):
        i -= 1
    word = text[i:punct_start]
    if not word:
        return False
    return (len(word) == 1 and word.isalpha()) or word.lower() in ABBREVIATIONS


def sentence_spans(s: str) -> list[tuple[int, int]]:
    """Character spans of sentences in ``s``, leading/trailing whitespace excluded.

    A boundary is a run of ``.!?`` (plus closing quotes/brackets) followed by
    whitespace and an uppercase letter, or by the end of the text. A single
    period after a one-letter word or a known title does not end a sentence.
    """
    spans: list[tuple[int, int]] = []
    start = 0
    for m in _SENT_END.finditer(s):
        end = m.end()
        nxt = _NON_SPACE.search(s, end)
        if nxt and not nxt.group().isupper():
            continue
        if nxt and _is_abbreviation(s, m.start()) and m.end() - m.start() == 1:
            continue
        spans.append((start, end))
        start = end
    spans.append((start, len(s)))

    out = []
    for a, b in spans:
        while a < b and s[a].isspace():
            a += 1
        while b > a and s[b - 1].isspace():
            b -= 1
        if a < b:
            out.append((a, b))
    return out


def split_sentences(s: str) -> list[str]:
    """Sentences of ``s`` with internal whitespace collapsed to single spaces."""
    return [normalize_whitespace(s[a:b]) for a, b in sentence_spans(s)]


def _hard_split(s: str, start: int, end: int, budget: int) -> list[tuple[int, int]]:
    pieces = []
    pos = start
    while end - pos > budget:
        limit = pos + budget
        cut = limit
        for i in range(limit, pos, -1):
            if s[i].isspace():
                cut = i
                break
        piece_end = cut
        while piece_end > pos and s[piece_end - 1].isspace():
            piece_end -= 1
        pieces.append((pos, piece_end))
        pos = cut
        while pos < end and s[pos].isspace():
            pos += 1
    if pos < end:
        pieces.append((pos, end))
    return pieces


def chunk_text(s: str, budget: int = DEFAULT_CHUNK_BUDGET) -> list[Chunk]:
    """Greedily pack whole sentences into chunks of at most ``budget`` characters.

    Sentences longer than the budget are cut at the last whitespace before
    the limit, or at the limit itself when there is none. Chunk text is the
    exact source slice ``s[start:end]``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    units: list[tuple[int, int]] = []
    for a, b in sentence_spans(s):
        if b - a > budget:
            units.extend(_hard_split(s, a, b, budget))
        else:
            units.append((a, b))

    chunks: list[Chunk] = []
    cur_start = cur_end = None
    for a, b in units:
        if cur_start is not None and b - cur_start <= budget:
            cur_end = b
            continue
        if cur_start is not None:
            chunks.append(Chunk(len(chunks), s[cur_start:cur_end], cur_start, cur_end))
        cur_start, cur_end = a, b
    if cur_start is not None:
        chunks.append(Chunk(len(chunks), s[cur_start:cur_end], cur_start, cur_end))
    return chunks


def join_chunks(source: str, chunks: list[Chunk]) -> str:
    """Rebuild text from chunks, with a space wherever the source had whitespace."""
    parts = []
    for prev, cur in zip([None, *chunks], chunks):
        if prev is not None and prev.end < cur.start:
            parts.append(" ")
        parts.append(cur.text)
    return "".join(parts)
