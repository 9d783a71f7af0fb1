"""Per-aspect retrieval and candidate-pool merging.

Each aspect is retrieved by concatenating it to the original query. The
merge deduplicates across per-aspect lists with a rank-interleaved
round-robin so a capacity cut keeps per-aspect balance; each surviving
candidate remembers which aspects retrieved it and at what rank.
"""

from __future__ import annotations

from dataclasses import dataclass

from .aspects import SubAspectList
from .corpus import Document, InvertedIndex, retrieve


@dataclass
class Candidate:
    pool_index: int
    doc: Document
    aspect_set: tuple[int, ...]  # aspect indices, ascending
    best_rank: dict[int, int]  # aspect index -> 1-based retrieval rank


@dataclass
class CandidatePool:
    query: str
    aspects: SubAspectList
    candidates: list[Candidate]
    capacity: int


def retrieve_per_aspect(index: InvertedIndex, query: str, aspects: SubAspectList,
                        n: int) -> list[list[tuple[str, float]]]:
    """Retrieve top-n documents for every "query aspect" concatenation."""
    return [retrieve(index, f"{query} {a}", n) for a in aspects.aspects]


def merge_pool(query: str, aspects: SubAspectList,
               per_aspect_lists: list[list[tuple[str, float]]],
               capacity: int, documents: dict[str, Document]) -> CandidatePool:
    """Deduplicating interleaved merge of per-aspect retrieval lists.

    Rank positions are visited in order and, within a position, aspect
    lists in aspect order. The first occurrence of a doc_id admits it (up
    to `capacity` admissions); later occurrences only extend its aspect
    associations.
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    admitted: dict[str, Candidate] = {}
    max_len = max((len(lst) for lst in per_aspect_lists), default=0)
    for pos in range(max_len):
        for aspect_idx, lst in enumerate(per_aspect_lists):
            if pos >= len(lst):
                continue
            doc_id, _score = lst[pos]
            cand = admitted.get(doc_id)
            if cand is None:
                if len(admitted) >= capacity:
                    continue
                cand = Candidate(
                    pool_index=len(admitted),
                    doc=documents[doc_id],
                    aspect_set=(aspect_idx,),
                    best_rank={aspect_idx: pos + 1},
                )
                admitted[doc_id] = cand
            elif aspect_idx not in cand.best_rank:
                cand.aspect_set = tuple(sorted(set(cand.aspect_set) | {aspect_idx}))
                cand.best_rank[aspect_idx] = pos + 1
    candidates = sorted(admitted.values(), key=lambda c: c.pool_index)
    return CandidatePool(query, aspects, candidates, capacity)


def pool_to_dict(query_id: str, pool: CandidatePool) -> dict:
    """Serializable cache form of a pool (doc texts live in the corpus)."""
    return {
        "query_id": query_id,
        "aspects": list(pool.aspects.aspects),
        "candidates": [
            {
                "pool_index": c.pool_index,
                "doc_id": c.doc.doc_id,
                "aspect_set": list(c.aspect_set),
                "best_rank": {str(k): v for k, v in sorted(c.best_rank.items())},
            }
            for c in pool.candidates
        ],
    }


def pool_from_dict(obj: dict, query: str, source: str, capacity: int,
                   documents: dict[str, Document]) -> CandidatePool:
    aspects = SubAspectList(tuple(obj["aspects"]), source=source)
    candidates = [
        Candidate(
            pool_index=c["pool_index"],
            doc=documents[c["doc_id"]],
            aspect_set=tuple(c["aspect_set"]),
            best_rank={int(k): v for k, v in c["best_rank"].items()},
        )
        for c in obj["candidates"]
    ]
    return CandidatePool(query, aspects, candidates, capacity)
