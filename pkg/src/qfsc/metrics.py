"""Answer-pair similarity metrics and mean/std aggregation."""
from __future__ import annotations

import logging
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from qfsc.textproc import normalize_answer, tokenize

log = logging.getLogger(__name__)

# Lower is better for these; reports flag them.
LOWER_IS_BETTER = frozenset({"edit_distance"})


@dataclass(frozen=True)
class AnswerPairScores:
    exact_match: int
    token_f1: float
    edit_distance: int
    similarity: float
    similarity_degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "exact_match": self.exact_match,
            "token_f1": self.token_f1,
            "edit_distance": self.edit_distance,
            "similarity": self.similarity,
            "similarity_degenerate": self.similarity_degenerate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AnswerPairScores:
        return cls(
            exact_match=int(d["exact_match"]),
            token_f1=float(d["token_f1"]),
            edit_distance=int(d["edit_distance"]),
            similarity=float(d["similarity"]),
            similarity_degenerate=bool(d.get("similarity_degenerate", False)),
        )


@dataclass(frozen=True)
class AggregateScore:
    mean: float
    std: float
    n: int

    def as_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "n": self.n}

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> Optional[AggregateScore]:
        if d is None:
            return None
        return cls(float(d["mean"]), float(d["std"]), int(d["n"]))


def exact_match(candidate: str, reference: str) -> int:
    return int(normalize_answer(candidate) == normalize_answer(reference))


def token_f1(candidate: str, reference: str) -> float:
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    overlap = sum((Counter(cand) & Counter(ref)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)


def edit_distance(candidate: str, reference: str) -> int:
    """Character Levenshtein distance with unit costs, after case folding."""
    a = candidate.casefold()
    b = reference.casefold()
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def aggregate(values: Iterable[float]) -> AggregateScore:
    """Arithmetic mean and population standard deviation.

    Population std is what makes a 0/1 vector satisfy std = sqrt(p(1-p)).
    """
    vals: Sequence[float] = list(values)
    if not vals:
        raise ValueError("cannot aggregate an empty list")
    return AggregateScore(
        mean=float(statistics.mean(vals)),
        std=float(statistics.pstdev(vals)),
        n=len(vals),
    )


def safe_similarity(scorer, candidate: str, reference: str) -> tuple[float, bool]:
    """Call ``scorer.similarity`` unless an input is blank.

    Returns ``(score, degenerate)``; blank inputs score 0.0 with the flag set
    instead of raising, since evaluators feed arbitrary model output here.
    """
    if not candidate.strip() or not reference.strip():
        log.warning("similarity on empty input; scoring 0.0")
        return 0.0, True
    score = float(scorer.similarity(candidate, reference))
    return min(1.0, max(0.0, score)), False


def pair_scores(candidate: str, reference: str, scorer) -> AnswerPairScores:
    """All four answer-pair metrics; ``scorer`` supplies the embedding similarity."""
    sim, degenerate = safe_similarity(scorer, candidate, reference)
    return AnswerPairScores(
        exact_match=exact_match(candidate, reference),
        token_f1=token_f1(candidate, reference),
        edit_distance=edit_distance(candidate, reference),
        similarity=sim,
        similarity_degenerate=degenerate,
    )


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
