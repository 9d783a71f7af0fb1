"""Rewards, preference-pair construction, and DPO loss values.

Pairs follow two rules: unilaterality (one member is always the greedy
list, the other a sampled one) and significance (the reward gap must
exceed mu). Parameter updates are out of scope; the DPO loss is exposed
as a pure function for external trainers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from .pool import CandidatePool
from .ranker import RankerConfig, RankingList, rank
from .text_metrics import com_rouge, phi, tokenize, unigram_f1


@dataclass
class RewardedList:
    list: RankingList
    response: str
    reward: float
    provenance: str  # greedy | sampled


@dataclass
class PreferencePair:
    winner: RewardedList
    loser: RewardedList
    gap: float


def reward(response: str, answer: str, sub_answers: list[str]) -> float:
    """phi(response, answer) + com-rouge(response, sub_answers), in [0, 2]."""
    if not answer:
        raise ValueError("answer must be non-empty")
    if not response:
        return 0.0
    return phi(response, answer) + com_rouge(response, sub_answers)


_SENTENCE_RE = re.compile(r"[.!?]+")


def oracle_generate(query: str, ranked_docs: list[str], budget: int) -> str:
    """Deterministic extractive stand-in for an LLM generator.

    Splits the ranked documents into sentences, then greedily picks up to
    `budget` of them. Each pick is scored by unigram F1 against the query
    tokens not yet covered by picked sentences; ties resolve in document
    rank order, then sentence position.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    sentences = []  # (rank, position, text, tokens)
    for rank_idx, doc in enumerate(ranked_docs):
        for pos, raw in enumerate(_SENTENCE_RE.split(doc)):
            toks = tokenize(raw)
            if toks:
                sentences.append((rank_idx, pos, raw.strip(), toks))
    if not sentences:
        return ""
    query_tokens = tokenize(query)
    picked: list[int] = []
    covered: set[str] = set()
    for _ in range(min(budget, len(sentences))):
        target = [t for t in query_tokens if t not in covered]
        best, best_score = None, -1.0
        for idx, (_r, _p, _text, toks) in enumerate(sentences):
            if idx in picked:
                continue
            score = unigram_f1(toks, target).f1 if target else 0.0
            if score > best_score:
                best, best_score = idx, score
        picked.append(best)
        covered.update(sentences[best][3])
    return ". ".join(sentences[i][2] for i in picked) + "."


class OracleGenerator:
    """Generator client wrapping oracle_generate."""

    def __init__(self, budget: int = 3):
        self.budget = budget

    def generate(self, query: str, documents: list[str]) -> str:
        return oracle_generate(query, documents, self.budget)


@dataclass
class HttpGenerator:
    """HTTP generator: {"query", "documents", "max_tokens"} -> {"text"}."""

    endpoint: str
    max_tokens: int = 512
    timeout: float = 60.0
    retries: int = 1

    def generate(self, query: str, documents: list[str]) -> str:
        import requests

        last_err = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(
                    self.endpoint,
                    json={"query": query, "documents": documents,
                          "max_tokens": self.max_tokens},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["text"]
            except Exception as err:  # noqa: BLE001
                last_err = err
        raise RuntimeError(f"generator failed: {last_err}") from last_err


def generate_rewarded_lists(pool: CandidatePool, config: RankerConfig, backend,
                            generator, answer: str, sub_answers: list[str],
                            num_samples: int) -> list[RewardedList]:
    """One greedy list plus num_samples sampled lists, each rewarded."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    lists = [(rank(pool, config, backend, mode="greedy"), "greedy")]
    for i in range(num_samples):
        cfg = replace(config, seed=config.seed + i)
        lists.append((rank(pool, cfg, backend, mode="sampled"), "sampled"))
    out = []
    for ranking, provenance in lists:
        docs = [pool.candidates[d].doc.text for d in ranking.docids]
        response = generator.generate(pool.query, docs)
        out.append(RewardedList(ranking, response,
                                reward(response, answer, sub_answers), provenance))
    return out


def build_us3_pairs(lists: list[RewardedList], mu: float) -> list[PreferencePair]:
    """Unilateral significance pairing against the single greedy list."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    greedy = [l for l in lists if l.provenance == "greedy"]
    if len(greedy) != 1:
        raise ValueError("unilaterality violated")
    g = greedy[0]
    pairs = []
    for s in lists:
        if s.provenance != "sampled":
            continue
        gap = abs(s.reward - g.reward)
        if gap <= mu:
            continue
        winner, loser = (s, g) if s.reward > g.reward else (g, s)
        pairs.append(PreferencePair(winner, loser, gap))
    return pairs


def dpo_loss_value(policy_logprob_w: float, policy_logprob_l: float,
                   reference_logprob_w: float, reference_logprob_l: float,
                   beta: float) -> float:
    """-log sigmoid(beta * [(lp_w - lp_w_ref) - (lp_l - lp_l_ref)])."""
    values = (policy_logprob_w, policy_logprob_l,
              reference_logprob_w, reference_logprob_l)
    if any(not math.isfinite(v) for v in values):
        raise ValueError("non-finite log-probability")
    if beta <= 0:
        raise ValueError("beta must be positive")
    margin = beta * ((policy_logprob_w - reference_logprob_w)
                     - (policy_logprob_l - reference_logprob_l))
    # -log(sigmoid(x)) = log(1 + exp(-x)), computed stably
    if margin >= 0:
        return math.log1p(math.exp(-margin))
    return -margin + math.log1p(math.exp(margin))
