"""Turn a user query into sub-questions under one of three settings.

* ``no_aug``: no sub-questions; the query goes to the summarizer as is.
* ``decomp_aug``: an LLM splits the query using a few-shot prompt.
* ``ner_aug``: entities tagged in the query are turned into questions by QG.
"""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import replace
from typing import Optional, Sequence

from qfsc.backends.base import EntityTagger, Generator, QuestionMaker
from qfsc.prompts import load_template, render
from qfsc.types import GeneratedQuestion, GenerationRequest, QuestionOrigin, RunLog

log = logging.getLogger(__name__)

DEFAULT_DECOMPOSITION_CAP = 8

INTERROGATIVES = (
    "kdo", "koga", "komu", "kom", "kaj", "česa", "čemu", "čem", "čim",
    "kje", "kam", "kod", "od kod", "kdaj", "kako", "zakaj", "koliko", "kolikokrat",
    "kateri", "katera", "katero", "katere", "katerih", "kakšen", "kakšna", "kakšno",
    "kakšni", "čigav", "čigava", "ali", "who", "what", "when", "where", "why", "how", "which",
)

_PREFIX = re.compile(r"^\s*(?:\d+\s*[.)]|[-•*])\s*")


class Setting(str, enum.Enum):
    NO_AUG = "no_aug"
    DECOMP_AUG = "decomp_aug"
    NER_AUG = "ner_aug"


def parse_question_list(
    raw: str,
    interrogatives: Sequence[str] = INTERROGATIVES,
    cap: int = DEFAULT_DECOMPOSITION_CAP,
) -> list[str]:
    """Parse numbered/bulleted LLM output into at most ``cap`` questions.

    A line is kept if it ends with ``?`` or starts with an interrogative
    word; anything else is treated as commentary.
    """
    words = tuple(w.lower() for w in interrogatives)
    out = []
    for line in raw.splitlines():
        text = _PREFIX.sub("", line, count=1).strip()
        if not text:
            continue
        lowered = text.lower()
        starts_interrogative = any(
            lowered == w or lowered.startswith(w + " ") or lowered.startswith(w + ",") for w in words
        )
        if text.endswith("?") or starts_interrogative:
            out.append(text)
        if len(out) >= cap:
            break
    return out


class Decomposer:
    def __init__(
        self,
        generator: Optional[Generator] = None,
        tagger: Optional[EntityTagger] = None,
        question_maker: Optional[QuestionMaker] = None,
        *,
        cap: int = DEFAULT_DECOMPOSITION_CAP,
        template: Optional[str] = None,
        interrogatives: Sequence[str] = INTERROGATIVES,
    ):
        self.generator = generator
        self.tagger = tagger
        self.question_maker = question_maker
        self.cap = cap
        self.template = template if template is not None else load_template("decompose")
        self.interrogatives = interrogatives

    def decompose(self, query: str, setting: Setting, run_log: Optional[RunLog] = None) -> list[GeneratedQuestion]:
        if not query.strip():
            raise ValueError("query must be non-empty")
        setting = Setting(setting)
        if setting is Setting.NO_AUG:
            return []
        if setting is Setting.DECOMP_AUG:
            return self._llm_decompose(query, run_log)
        return self._entity_questions(query)

    def _llm_decompose(self, query: str, run_log: Optional[RunLog]) -> list[GeneratedQuestion]:
        if self.generator is None:
            raise RuntimeError("decomp_aug needs a generator backend")
        req = GenerationRequest(render(self.template, query=query), temperature=0.0, max_output_tokens=256)
        raw = self.generator.generate(req)
        texts = parse_question_list(raw, self.interrogatives, self.cap)
        if not texts:
            msg = "decomposition produced no questions; falling back to no_aug"
            log.warning(msg)
            if run_log is not None:
                run_log.warn(msg, stage="decompose", query=query)
            return []
        return [GeneratedQuestion(t, QuestionOrigin.LLM_DECOMPOSITION) for t in texts]

    def _entity_questions(self, query: str) -> list[GeneratedQuestion]:
        if self.tagger is None or self.question_maker is None:
            raise RuntimeError("ner_aug needs tagger and question-maker backends")
        surfaces: list[str] = []
        seen: set[str] = set()
        for ent in self.tagger.tag_entities(query):
            key = ent.surface.casefold()
            if key not in seen:
                seen.add(key)
                surfaces.append(ent.surface)
        surfaces = surfaces[: self.cap]
        if not surfaces:
            return []
        questions = self.question_maker.make_questions(surfaces, query)
        return [replace(q, origin=QuestionOrigin.ENTITY_QG) for q in questions]


def decompose(query: str, setting: Setting, backends=None, cap: int = DEFAULT_DECOMPOSITION_CAP,
              run_log: Optional[RunLog] = None) -> list[GeneratedQuestion]:
    if backends is None:
        return Decomposer(cap=cap).decompose(query, setting, run_log)
    d = Decomposer(backends.generator, backends.tagger, backends.question_maker, cap=cap)
    return d.decompose(query, setting, run_log)
