"""Greedy silver ranking targets from the coverage utility function.

At each step a document's utility is the aspect-weighted sum of its
coverage of every sub-answer; aspect weights decay as earlier selections
cover them, so the greedy list spreads across aspects instead of piling
on the best-covered one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .pool import CandidatePool
from .ranker import RankerConfig, sequence_log_prob
from .text_metrics import phi


@dataclass
class SilverTarget:
    docids: list[int]
    step_utilities: list[float]
    weight_trace: list[list[float]]


def aspect_weights(selected_docs: list[str], sub_answers: list[str]) -> list[float]:
    """Per-aspect weights 1 - Norm(best coverage by selected docs).

    With nothing selected (or nothing covered) the coverage vector is all
    zeros; its sum-normalization is defined as all zeros, so every weight
    is 1 and the first step is pure unweighted coverage.
    """
    if not sub_answers:
        raise ValueError("sub_answers must be non-empty")
    cov = [
        max((phi(doc, a) for doc in selected_docs), default=0.0)
        for a in sub_answers
    ]
    total = sum(cov)
    if total == 0:
        return [1.0] * len(sub_answers)
    return [1.0 - c / total for c in cov]


def coverage_gain(doc_text: str, w: list[float], sub_answers: list[str]) -> float:
    """Weighted coverage utility of one document."""
    if len(w) != len(sub_answers):
        raise ValueError("weight / sub-answer dimension mismatch")
    return sum(wi * phi(doc_text, a) for wi, a in zip(w, sub_answers))


def build_silver_list(pool: CandidatePool, sub_answers: list[str], k: int) -> SilverTarget:
    """Greedy argmax of the coverage utility, ties by lowest pool_index."""
    if not sub_answers:
        raise ValueError("sub_answers must be non-empty")
    if k > len(pool.candidates):
        raise ValueError("k exceeds pool size")
    texts = [c.doc.text for c in pool.candidates]
    docids: list[int] = []
    utilities: list[float] = []
    trace: list[list[float]] = []
    remaining = list(range(len(texts)))
    for _ in range(k):
        w = aspect_weights([texts[i] for i in docids], sub_answers)
        best, best_gain = None, -1.0
        for i in remaining:
            gain = coverage_gain(texts[i], w, sub_answers)
            if gain > best_gain:
                best, best_gain = i, gain
        docids.append(best)
        utilities.append(best_gain)
        trace.append(w)
        remaining.remove(best)
    return SilverTarget(docids, utilities, trace)


def sft_loss_value(pool: CandidatePool, target: SilverTarget,
                   config: RankerConfig, backend) -> float:
    """NTP loss of the silver list under the ranker's step distributions."""
    return -sequence_log_prob(pool, config, backend, target.docids)
