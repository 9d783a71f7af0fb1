"""Generative list-wise ranking: the step-wise decode contract.

The trained encoder-decoder is one possible backend; this module pins the
behavior that is backend-independent: docid-token input formatting, the
masked temperature softmax over reused candidate representations, greedy
and seeded sampled decoding, and sequence log-probabilities.

A scoring backend supplies, for each decode step, the raw logits h.e_i
over the pool given the already-selected prefix:

    backend.step_scores(selected: Sequence[int]) -> np.ndarray of shape (M,)
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .aspects import SubAspectList
from .pool import Candidate, CandidatePool
from .text_metrics import tokenize


@dataclass(frozen=True)
class RankerConfig:
    k: int
    tau: float = 0.1
    allow_repetition: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass
class CandidateEncoding:
    vectors: np.ndarray  # shape (pool size, dim)


@dataclass
class RankingList:
    docids: list[int]
    step_logprobs: list[float]
    mode: str  # greedy | sampled


def format_input(candidate: Candidate, query: str, aspects: SubAspectList) -> str:
    """Docid-token input sequence for one candidate.

    "[D{i}] {query} [Q] {aspect_1} [E] ... {aspect_n} [S] {doc text}",
    listing exactly the aspects that retrieved this candidate.
    """
    names = [aspects.aspects[i] for i in candidate.aspect_set]
    aspect_part = " [E] ".join(names)
    return f"[D{candidate.pool_index}] {query} [Q] {aspect_part} [S] {candidate.doc.text}"


def masked_softmax(scores: np.ndarray, tau: float, mask: set[int]) -> np.ndarray:
    """Temperature softmax with masked indices pinned to exactly zero."""
    m = len(scores)
    if len(mask) >= m:
        raise ValueError("no candidates available")
    logits = np.asarray(scores, dtype=float) / tau
    keep = np.array([i not in mask for i in range(m)])
    shifted = logits[keep] - logits[keep].max()
    expd = np.exp(shifted)
    probs = np.zeros(m)
    probs[keep] = expd / expd.sum()
    return probs


def step_distribution(encodings: CandidateEncoding, decoder_state: np.ndarray,
                      tau: float, mask: set[int]) -> np.ndarray:
    """Probability vector over the pool for one decode step."""
    h = np.asarray(decoder_state, dtype=float)
    if h.shape[0] != encodings.vectors.shape[1]:
        raise ValueError("decoder state dimension mismatch")
    return masked_softmax(encodings.vectors @ h, tau, mask)


def _step_probs(backend, config: RankerConfig, selected: list[int], mask: set[int]) -> np.ndarray:
    scores = np.asarray(backend.step_scores(selected), dtype=float)
    return masked_softmax(scores, config.tau, mask)


def rank(pool: CandidatePool, config: RankerConfig, backend,
         mode: str = "greedy") -> RankingList:
    """Decode a top-k ranking list, greedily or by seeded sampling."""
    if mode not in ("greedy", "sampled"):
        raise ValueError(f"unknown decode mode: {mode!r}")
    m = len(pool.candidates)
    if m == 0:
        raise ValueError("empty pool")
    if not config.allow_repetition and config.k > m:
        raise ValueError("k exceeds pool")
    rng = random.Random(config.seed)
    docids: list[int] = []
    logprobs: list[float] = []
    mask: set[int] = set()
    for _ in range(config.k):
        probs = _step_probs(backend, config, docids, mask)
        if mode == "sampled":
            choice = _draw(probs, rng)
        else:
            choice = int(np.argmax(probs))  # argmax ties -> lowest index
        docids.append(choice)
        logprobs.append(math.log(probs[choice]))
        if not config.allow_repetition:
            mask.add(choice)
    return RankingList(docids, logprobs, mode)


def _draw(probs: np.ndarray, rng: random.Random) -> int:
    x = rng.random()
    acc = 0.0
    last = 0
    for i, p in enumerate(probs):
        if p <= 0.0:
            continue
        acc += p
        last = i
        if x < acc:
            return i
    return last


def sequence_log_prob(pool: CandidatePool, config: RankerConfig, backend,
                      docids: list[int]) -> float:
    """Log-probability of a given docid sequence under the decode contract."""
    m = len(pool.candidates)
    if len(docids) > config.k:
        raise ValueError("sequence longer than k")
    total = 0.0
    mask: set[int] = set()
    selected: list[int] = []
    for d in docids:
        if not 0 <= d < m:
            raise ValueError(f"docid {d} out of range")
        if d in mask:
            raise ValueError("masked docid in sequence")
        probs = _step_probs(backend, config, selected, mask)
        if probs[d] <= 0.0:
            raise ValueError("masked docid in sequence")
        total += math.log(probs[d])
        selected.append(d)
        if not config.allow_repetition:
            mask.add(d)
    return total


class UniformBackend:
    """Constant scores: every unmasked candidate is equally likely."""

    def __init__(self, pool_size: int):
        self.pool_size = pool_size

    def step_scores(self, selected) -> np.ndarray:
        return np.zeros(self.pool_size)


class ReferenceBackend:
    """Deterministic lexical backend usable without any trained model.

    Candidate representations are unit-normalized term-frequency vectors
    over the union vocabulary of query, aspect texts, and pool. The decode
    state at step t is the unit-normalized, coverage-weighted sum of
    "query aspect" term vectors, where an aspect's weight decays as
    already-selected documents cover its text (same normalization as
    silver-list construction, with aspect text standing in for the
    sub-answers that are unavailable at inference time).
    """

    def __init__(self, query: str, aspects: SubAspectList, candidates: list[Candidate]):
        if not aspects.aspects:
            raise ValueError("aspects must be non-empty")
        self.query = query
        self.aspects = aspects
        self.texts = [c.doc.text for c in candidates]
        vocab: dict[str, int] = {}
        for text in [query, *aspects.aspects, *self.texts]:
            for tok in tokenize(text):
                vocab.setdefault(tok, len(vocab))
        self.vocab = vocab
        self.encodings = CandidateEncoding(
            np.stack([self._unit_tf(t) for t in self.texts])
            if self.texts else np.zeros((0, max(len(vocab), 1)))
        )
        self.aspect_vectors = [
            self._unit_tf(f"{query} {a}") for a in aspects.aspects
        ]

    def _unit_tf(self, text: str) -> np.ndarray:
        v = np.zeros(max(len(self.vocab), 1))
        for tok in tokenize(text):
            if tok in self.vocab:
                v[self.vocab[tok]] += 1.0
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else v

    def step_scores(self, selected) -> np.ndarray:
        from .silver import aspect_weights

        chosen = [self.texts[i] for i in selected]
        w = aspect_weights(chosen, list(self.aspects.aspects))
        h = np.zeros(max(len(self.vocab), 1))
        for wj, vj in zip(w, self.aspect_vectors):
            h += wj * vj
        norm = np.linalg.norm(h)
        if norm > 0:
            h = h / norm
        return self.encodings.vectors @ h


def reference_backend(query: str, aspects: SubAspectList,
                      candidates: list[Candidate]) -> ReferenceBackend:
    return ReferenceBackend(query, aspects, candidates)


@dataclass
class RemoteBackend:
    """Scoring backend backed by an HTTP service, one call per decode step.

    Wire contract: {"query", "aspects", "candidates", "selected"} ->
    {"scores": [float; M]}.
    """

    endpoint: str
    query: str
    aspects: SubAspectList
    candidate_texts: list[str]
    timeout: float = 30.0

    def step_scores(self, selected) -> np.ndarray:
        import requests

        resp = requests.post(
            self.endpoint,
            json={
                "query": self.query,
                "aspects": list(self.aspects.aspects),
                "candidates": self.candidate_texts,
                "selected": list(selected),
            },
            timeout=self.timeout,
        )
        resp.raise_for_status()
        scores = resp.json()["scores"]
        if len(scores) != len(self.candidate_texts):
            raise ValueError("remote backend returned wrong score count")
        return np.asarray(scores, dtype=float)
