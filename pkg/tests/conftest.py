import os

import pytest

from facetrank.aspects import SubAspectList
from facetrank.corpus import Document
from facetrank.pool import Candidate, CandidatePool

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "synthetic")


@pytest.fixture(scope="session")
def synthetic_paths():
    return (os.path.join(DATA_DIR, "dataset.jsonl"),
            os.path.join(DATA_DIR, "corpus.jsonl"))


def make_pool(texts, query="q", aspects=("a",), source="gold"):
    """Hand-built candidate pool: one candidate per text, aspect 0 for all."""
    aspect_list = SubAspectList(tuple(aspects), source=source)
    candidates = [
        Candidate(pool_index=i, doc=Document(f"d{i}", "", t),
                  aspect_set=(0,), best_rank={0: i + 1})
        for i, t in enumerate(texts)
    ]
    return CandidatePool(query, aspect_list, candidates, capacity=len(texts))
