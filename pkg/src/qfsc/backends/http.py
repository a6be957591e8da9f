"""Backends talking to an OpenAI-compatible HTTP API.

All roles share one :class:`ChatClient`, which owns retries, the in-flight
request limit, and error classification. The API key is read from the
``QFSC_API_KEY`` environment variable and never logged.
"""
from __future__ import annotations

import json
import logging
import math
import os
import re
import threading
import time
from typing import Any, Callable, Optional, Sequence

import httpx

from qfsc.backends.base import (
    DEFAULT_CONTEXT_LIMIT,
    BackendError,
    Backends,
    BackendTimeout,
    HTTPStatusError,
    MalformedResponseError,
    TransportError,
    check_context,
    dedupe_entities,
)
from qfsc.config import API_KEY_ENV, BackendConfig
from qfsc.types import AnswerOutcome, GeneratedQuestion, GenerationRequest, NamedEntity, QuestionOrigin

log = logging.getLogger(__name__)

UNANSWERABLE_TOKEN = "<unanswerable>"
ATTEMPT_HEADER = "X-Attempt"

_LIST_PREFIX = re.compile(r"^\s*(?:\d+[.)]|[-•*])\s*")


class ChatClient:
    """Thread-safe client for ``/chat/completions`` and ``/embeddings``.

    ``base_url`` is expected to include the API version prefix, e.g.
    ``http://localhost:8000/v1``. Transport errors, timeouts, 429 and 5xx
    are retried after each delay in ``config.retry_delays``; other failures
    raise immediately.
    """

    def __init__(
        self,
        config: BackendConfig,
        *,
        api_key: Optional[str] = None,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self._http = httpx.Client(base_url=config.base_url, timeout=config.timeout_s, transport=transport)
        self._slots = threading.BoundedSemaphore(config.max_inflight)
        self._sleep = sleep

    def __repr__(self) -> str:
        return f"ChatClient(base_url={self.config.base_url!r}, model={self.config.model_name!r})"

    def close(self) -> None:
        self._http.close()

    def post_json(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        body = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
        delays = tuple(self.config.retry_delays)
        attempt = 0
        while True:
            attempt += 1
            headers = {"Content-Type": "application/json", ATTEMPT_HEADER: str(attempt)}
            if self._api_key:
                headers["Authorization"] = f"Bearer {self._api_key}"
            try:
                with self._slots:
                    resp = self._http.post(path, content=body, headers=headers)
            except httpx.TimeoutException as exc:
                err: BackendError = BackendTimeout(f"timeout calling {path}: {exc}", attempts=attempt)
            except httpx.TransportError as exc:
                err = TransportError(f"transport failure calling {path}: {exc}", attempts=attempt)
            else:
                if 200 <= resp.status_code < 300:
                    try:
                        data = resp.json()
                    except ValueError as exc:
                        raise MalformedResponseError(f"non-JSON body from {path}", attempts=attempt) from exc
                    if not isinstance(data, dict):
                        raise MalformedResponseError(f"unexpected JSON body from {path}", attempts=attempt)
                    return data
                err = HTTPStatusError(resp.status_code, resp.text[:200], attempts=attempt)

            if not err.retryable or attempt > len(delays):
                raise err
            log.warning("attempt %d on %s failed (%s); retrying in %.1fs", attempt, path, err, delays[attempt - 1])
            self._sleep(delays[attempt - 1])

    def chat(self, req: GenerationRequest, model: Optional[str] = None) -> str:
        payload = {
            "model": model or self.config.model_name,
            "messages": [
                {"role": "system", "content": req.system_instruction},
                {"role": "user", "content": req.user_prompt},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        data = self.post_json("chat/completions", payload)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError("chat response lacks choices[0].message.content") from exc
        if not isinstance(content, str):
            raise MalformedResponseError("chat message content is not a string")
        return content

    def embed(self, texts: Sequence[str], model: Optional[str] = None) -> list[list[float]]:
        payload = {"model": model or self.config.embedding_model, "input": list(texts)}
        data = self.post_json("embeddings", payload)
        try:
            rows = sorted(data["data"], key=lambda r: r.get("index", 0))
            vectors = [[float(x) for x in row["embedding"]] for row in rows]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponseError("embedding response malformed") from exc
        if len(vectors) != len(texts):
            raise MalformedResponseError("embedding count does not match inputs")
        return vectors


class ChatGenerator:
    def __init__(self, client: ChatClient, model: Optional[str] = None):
        self.client = client
        self.model_name = model or client.config.model_name

    def generate(self, req: GenerationRequest) -> str:
        out = self.client.chat(req, model=self.model_name).strip()
        if not out:
            raise MalformedResponseError("generator returned empty text")
        return out


def parse_answer(raw: str) -> AnswerOutcome:
    """Map raw QA model output to an outcome; the sentinel or blank output means unanswerable."""
    text = raw.strip()
    if text.lower().startswith("odgovor:"):
        text = text[len("odgovor:"):].strip()
    if not text or UNANSWERABLE_TOKEN in text:
        return AnswerOutcome.unanswerable()
    return AnswerOutcome.answered(text)


class LLMAnswerer:
    system = (
        "Si model za odgovarjanje na vprašanja. Odgovori izključno z besedilom iz "
        f"konteksta, čim krajše. Če odgovora v kontekstu ni, izpiši natanko {UNANSWERABLE_TOKEN}."
    )

    def __init__(self, client: ChatClient, model: Optional[str] = None,
                 max_context_chars: int = DEFAULT_CONTEXT_LIMIT):
        self.client = client
        self.model = model
        self.max_context_chars = max_context_chars

    def answer(self, question: str, context: str) -> AnswerOutcome:
        check_context(context, self.max_context_chars)
        prompt = f"Kontekst: {context}\nVprašanje: {question}\nOdgovor:"
        req = GenerationRequest(prompt, system_instruction=self.system, max_output_tokens=64)
        return parse_answer(self.client.chat(req, model=self.model))


class LLMQuestionMaker:
    system = "Si model za tvorjenje vprašanj. Izpiši samo eno vprašanje v slovenščini."

    def __init__(self, client: ChatClient, model: Optional[str] = None):
        self.client = client
        self.model = model

    def make_questions(self, targets: Sequence[str], context: str) -> list[GeneratedQuestion]:
        out = []
        for target in targets:
            prompt = (
                f"Besedilo: {context}\n"
                f"Napiši vprašanje, na katero je pravilen odgovor »{target}«.\nVprašanje:"
            )
            req = GenerationRequest(prompt, system_instruction=self.system, max_output_tokens=96)
            raw = self.client.chat(req, model=self.model)
            lines = [_LIST_PREFIX.sub("", ln).strip() for ln in raw.splitlines()]
            lines = [ln for ln in lines if ln]
            if not lines:
                raise MalformedResponseError(f"no question generated for target {target!r}")
            out.append(GeneratedQuestion(lines[0], QuestionOrigin.ENTITY_QG, target_answer=target))
        return out


class LLMEntityTagger:
    system = (
        "Iz besedila izpiši vsa imenska bitja (osebe, kraje, organizacije, dogodke), "
        "vsako v svoji vrstici, natanko tako, kot so zapisana v besedilu."
    )

    def __init__(self, client: ChatClient, model: Optional[str] = None):
        self.client = client
        self.model = model

    def tag_entities(self, text: str) -> list[NamedEntity]:
        req = GenerationRequest(f"Besedilo: {text}\nImenska bitja:", system_instruction=self.system,
                                max_output_tokens=256)
        raw = self.client.chat(req, model=self.model)
        found = []
        for line in raw.splitlines():
            surface = _LIST_PREFIX.sub("", line).strip()
            if not surface:
                continue
            pos = text.find(surface)
            if pos < 0:
                log.debug("tagger returned %r which is not in the text", surface)
                continue
            found.append(NamedEntity(surface, pos, pos + len(surface)))
        return dedupe_entities(found)


class EmbeddingScorer:
    """Cosine similarity of sentence embeddings, clipped to [0, 1]."""

    def __init__(self, client: ChatClient, model: Optional[str] = None):
        self.client = client
        self.model = model

    def similarity(self, candidate: str, reference: str) -> float:
        if not candidate.strip() or not reference.strip():
            log.warning("similarity on empty input; scoring 0.0")
            return 0.0
        if candidate == reference:
            return 1.0
        a, b = self.client.embed([candidate, reference], model=self.model)
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(x * x for x in b))
        if na == 0 or nb == 0:
            return 0.0
        cos = sum(x * y for x, y in zip(a, b)) / (na * nb)
        return min(1.0, max(0.0, cos))


def http_backends(config: BackendConfig, **client_kw: Any) -> Backends:
    client = ChatClient(config, **client_kw)
    return Backends(
        generator=ChatGenerator(client),
        answerer=LLMAnswerer(client),
        question_maker=LLMQuestionMaker(client),
        tagger=LLMEntityTagger(client),
        similarity=EmbeddingScorer(client),
    )
