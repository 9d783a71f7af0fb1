"""Corpus ingestion and a fixed lexical BM25 retriever.

The framework treats the retriever as fixed and opaque, so any scorer can
stand in; this one is a plain inverted-index BM25 kept deterministic
(ties broken by ascending doc_id) so golden tests are stable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .text_metrics import tokenize


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    text: str


@dataclass
class InvertedIndex:
    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    doc_count: int
    avg_doc_length: float
    k1: float = 1.2
    b: float = 0.75
    documents: dict[str, Document] = field(default_factory=dict)


def load_corpus(path: str) -> list[Document]:
    """Read newline-delimited JSON documents."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            docs.append(Document(obj["doc_id"], obj.get("title", ""), obj["text"]))
    return docs


def build_index(documents, k1: float = 1.2, b: float = 0.75) -> InvertedIndex:
    """Build an inverted index over tokenize(title + " " + text)."""
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    doc_map: dict[str, Document] = {}
    for doc in documents:
        if doc.doc_id in doc_lengths:
            raise ValueError(f"duplicate doc_id {doc.doc_id}")
        tokens = tokenize(doc.title + " " + doc.text)
        if not tokens:
            raise ValueError(f"document {doc.doc_id} tokenizes to empty")
        doc_lengths[doc.doc_id] = len(tokens)
        doc_map[doc.doc_id] = doc
        tf: dict[str, int] = {}
        for t in tokens:
            tf[t] = tf.get(t, 0) + 1
        for t, f in tf.items():
            postings.setdefault(t, []).append((doc.doc_id, f))
    if not doc_lengths:
        raise ValueError("empty corpus")
    n = len(doc_lengths)
    avg = sum(doc_lengths.values()) / n
    return InvertedIndex(postings, doc_lengths, n, avg, k1=k1, b=b, documents=doc_map)


def _idf(index: InvertedIndex, term: str) -> float:
    df = len(index.postings.get(term, ()))
    # Lucene-style floor at log(1): strictly positive for any matching term
    return math.log1p((index.doc_count - df + 0.5) / (df + 0.5))


def retrieve(index: InvertedIndex, query: str, n: int) -> list[tuple[str, float]]:
    """Top-n BM25 scored documents for a query string.

    Only documents matching at least one query term are returned; ties are
    broken by ascending doc_id.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    q_tokens = tokenize(query)
    if not q_tokens:
        raise ValueError("empty query")
    scores: dict[str, float] = {}
    for term in q_tokens:
        if term not in index.postings:
            continue
        idf = _idf(index, term)
        for doc_id, tf in index.postings[term]:
            dl = index.doc_lengths[doc_id]
            denom = tf + index.k1 * (1 - index.b + index.b * dl / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (index.k1 + 1) / denom
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n]
