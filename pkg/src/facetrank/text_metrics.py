"""Deterministic tokenization and overlap metrics.

Everything downstream (retrieval, silver-list construction, rewards,
evaluation) funnels through these functions, so they are kept pure and
dependency-free.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class OverlapScore:
    precision: float
    recall: float
    f1: float


ZERO_SCORE = OverlapScore(0.0, 0.0, 0.0)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on maximal runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _clipped_overlap(cand: list, ref: list) -> OverlapScore:
    if not cand or not ref:
        return ZERO_SCORE
    overlap = sum((Counter(cand) & Counter(ref)).values())
    p = overlap / len(cand)
    r = overlap / len(ref)
    return OverlapScore(p, r, _f1(p, r))


def _bigrams(tokens: list[str]) -> list[tuple[str, str]]:
    return list(zip(tokens, tokens[1:]))


def _lcs_length(a: list[str], b: list[str]) -> int:
    # single-row DP, O(len(a) * len(b))
    if not a or not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[-1]


def rouge(candidate: list[str], reference: list[str], variant: str) -> OverlapScore:
    """Rouge score between token sequences.

    variant "bigram": clipped bigram overlap (Rouge-2).
    variant "lcs": longest-common-subsequence precision/recall (Rouge-L).
    An empty side yields an all-zero score.
    """
    if variant == "bigram":
        return _clipped_overlap(_bigrams(candidate), _bigrams(reference))
    if variant == "lcs":
        if not candidate or not reference:
            return ZERO_SCORE
        lcs = _lcs_length(candidate, reference)
        p = lcs / len(candidate)
        r = lcs / len(reference)
        return OverlapScore(p, r, _f1(p, r))
    raise ValueError(f"unknown rouge variant: {variant!r}")


def unigram_f1(candidate: list[str], reference: list[str]) -> OverlapScore:
    """Clipped unigram overlap precision/recall/F1."""
    return _clipped_overlap(candidate, reference)


def phi(candidate_text: str, reference_text: str) -> float:
    """Coverage score: mean of Rouge-2 F1 and Rouge-L F1 on tokenized inputs."""
    cand = tokenize(candidate_text)
    ref = tokenize(reference_text)
    return (rouge(cand, ref, "bigram").f1 + rouge(cand, ref, "lcs").f1) / 2.0


def com_rouge(response: str, sub_answers: list[str]) -> float:
    """Length-weighted coverage of a response over sub-answers.

    Each sub-answer is weighted by its token count normalized over all
    sub-answers, so the weights sum to 1.
    """
    if not sub_answers:
        raise ValueError("degenerate sub-answers")
    counts = [len(tokenize(a)) for a in sub_answers]
    total = sum(counts)
    if total == 0:
        raise ValueError("degenerate sub-answers")
    return sum((c / total) * phi(response, a) for c, a in zip(counts, sub_answers))
