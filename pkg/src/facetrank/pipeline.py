"""End-to-end stage orchestration with cached, fingerprinted artifacts.

Stages: index -> aspects -> retrieve -> pool -> silver -> rank -> pairs
-> eval. Each stage reads the upstream cache files, writes its own
newline-delimited JSON artifact keyed by record id, and embeds the run
config's fingerprint so artifacts from different configurations can never
be mixed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import random
from dataclasses import dataclass

from . import evaluation, preferences, silver
from .aspects import HttpLlmClient, SubAspectList, ExplorerPrompt, predict_aspects
from .corpus import Document, InvertedIndex, build_index, load_corpus, retrieve
from .pool import CandidatePool, merge_pool, pool_from_dict, pool_to_dict, retrieve_per_aspect
from .ranker import RankerConfig, RemoteBackend, rank, reference_backend

log = logging.getLogger(__name__)

STAGES = ("index", "aspects", "retrieve", "pool", "silver", "rank", "pairs", "eval")

_ARTIFACTS = {
    "index": "index.json",
    "aspects": "aspects.jsonl",
    "retrieve": "retrieve.jsonl",
    "pool": "pool.jsonl",
    "silver": "silver.jsonl",
    "rank": "rank.jsonl",
    "pairs": "pairs.jsonl",
    "eval": "report.json",
}


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    question: str
    answer: str
    sub_aspects: tuple[str, ...]
    sub_answers: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    n_per_aspect: int = 50
    pool_capacity: int = 290
    k: int = 10
    tau: float = 0.1
    mu: float = 0.1
    beta: float = 0.1
    num_samples: int = 4
    allow_repetition: bool = False
    seed: int = 0
    aspect_mode: str = "gold"  # gold | predicted
    ablation: str = "none"  # none | no-sa | random-pairs
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    k_rrf: float = 60.0
    relevance_threshold: float = 0.5
    ndcg_cutoffs: tuple[int, ...] = (1, 3, 5, 10)
    generator_budget: int = 3
    explorer_endpoint: str | None = None
    generator_endpoint: str | None = None
    scorer_endpoint: str | None = None
    timeout: float = 30.0
    retries: int = 1

    def fingerprint(self) -> str:
        canon = json.dumps(dataclasses.asdict(self), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def load_config(path: str | None, **overrides) -> RunConfig:
    data = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "ndcg_cutoffs" in data:
        data["ndcg_cutoffs"] = tuple(data["ndcg_cutoffs"])
    return RunConfig(**data)


def load_dataset(path: str) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            try:
                rec = DatasetRecord(
                    id=obj["id"],
                    question=obj["question"],
                    answer=obj["answer"],
                    sub_aspects=tuple(obj["sub_aspects"]),
                    sub_answers=tuple(obj["sub_answers"]),
                )
            except KeyError as err:
                raise ValueError(f"record at line {lineno} missing field {err}") from err
            if len(rec.sub_aspects) != len(rec.sub_answers) or not rec.sub_aspects:
                raise ValueError(f"record {rec.id}: sub_aspects and sub_answers "
                                 "must be aligned and non-empty")
            if len(rec.sub_aspects) < 2:
                log.warning("record %s has fewer than 2 sub-aspects", rec.id)
            if _squash(rec.answer) != _squash(" ".join(rec.sub_answers)):
                log.warning("record %s: answer is not the concatenation of its "
                            "sub-answers", rec.id)
            records.append(rec)
    if not records:
        raise ValueError("empty dataset")
    return records


def _squash(text: str) -> str:
    return " ".join(text.split())


# ---------------------------------------------------------------------------
# artifact IO


def _artifact_path(out_dir: str, stage: str) -> str:
    return os.path.join(out_dir, _ARTIFACTS[stage])


def _require(out_dir: str, stage: str) -> str:
    path = _artifact_path(out_dir, stage)
    if not os.path.exists(path):
        raise FileNotFoundError(f"missing artifact: {stage}")
    return path


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _write_rows(path: str, fingerprint: str, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump({"config_fingerprint": fingerprint}) + "\n")
        for row in rows:
            fh.write(_dump(row) + "\n")


def _read_rows(path: str, fingerprint: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(l) for l in fh if l.strip()]
    if not lines or lines[0].get("config_fingerprint") != fingerprint:
        raise ValueError(f"artifact fingerprint mismatch: {path}")
    return lines[1:]


# ---------------------------------------------------------------------------
# stage implementations


def _load_index(out_dir: str, config: RunConfig, corpus_path: str) -> InvertedIndex:
    _require(out_dir, "index")
    with open(_artifact_path(out_dir, "index"), encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta["config_fingerprint"] != config.fingerprint():
        raise ValueError("artifact fingerprint mismatch: index")
    docs = load_corpus(corpus_path)
    return build_index(docs, k1=config.bm25_k1, b=config.bm25_b)


def _stage_index(config, records, corpus_path, out_dir):
    docs = load_corpus(corpus_path)
    index = build_index(docs, k1=config.bm25_k1, b=config.bm25_b)
    meta = {
        "config_fingerprint": config.fingerprint(),
        "doc_count": index.doc_count,
        "avg_doc_length": index.avg_doc_length,
        "k1": index.k1,
        "b": index.b,
        "vocabulary_size": len(index.postings),
    }
    with open(_artifact_path(out_dir, "index"), "w", encoding="utf-8") as fh:
        fh.write(_dump(meta) + "\n")
    return {"count": index.doc_count}


def _stage_aspects(config, records, corpus_path, out_dir):
    rows = []
    client = None
    if config.aspect_mode == "predicted" and config.ablation != "no-sa":
        if not config.explorer_endpoint:
            raise ValueError("predicted aspect mode requires explorer_endpoint")
        client = HttpLlmClient(config.explorer_endpoint, timeout=config.timeout,
                               retries=config.retries)
    prompt = ExplorerPrompt()
    for rec in records:
        if config.ablation == "no-sa":
            aspects = SubAspectList((rec.question,), source="fallback")
        elif config.aspect_mode == "gold":
            aspects = SubAspectList(rec.sub_aspects, source="gold")
        else:
            aspects = predict_aspects(rec.question, prompt, client)
        rows.append({"id": rec.id, "aspects": list(aspects.aspects),
                     "source": aspects.source})
    _write_rows(_artifact_path(out_dir, "aspects"), config.fingerprint(), rows)
    return {"count": len(rows)}


def _load_aspects(out_dir: str, config: RunConfig) -> dict[str, SubAspectList]:
    rows = _read_rows(_require(out_dir, "aspects"), config.fingerprint())
    return {r["id"]: SubAspectList(tuple(r["aspects"]), source=r["source"])
            for r in rows}


def _stage_retrieve(config, records, corpus_path, out_dir):
    index = _load_index(out_dir, config, corpus_path)
    aspects = _load_aspects(out_dir, config)
    rows = []
    for rec in records:
        lists = retrieve_per_aspect(index, rec.question, aspects[rec.id],
                                    config.n_per_aspect)
        rows.append({"id": rec.id,
                     "lists": [[[d, s] for d, s in lst] for lst in lists]})
    _write_rows(_artifact_path(out_dir, "retrieve"), config.fingerprint(), rows)
    return {"count": len(rows)}


def _load_retrieve(out_dir: str, config: RunConfig) -> dict[str, list[list[tuple[str, float]]]]:
    rows = _read_rows(_require(out_dir, "retrieve"), config.fingerprint())
    return {r["id"]: [[(d, s) for d, s in lst] for lst in r["lists"]] for r in rows}


def _stage_pool(config, records, corpus_path, out_dir):
    docs = {d.doc_id: d for d in load_corpus(corpus_path)}
    aspects = _load_aspects(out_dir, config)
    lists = _load_retrieve(out_dir, config)
    rows = []
    for rec in records:
        pool = merge_pool(rec.question, aspects[rec.id], lists[rec.id],
                          config.pool_capacity, docs)
        rows.append(pool_to_dict(rec.id, pool))
    _write_rows(_artifact_path(out_dir, "pool"), config.fingerprint(), rows)
    return {"count": len(rows)}


def _load_pools(out_dir: str, config: RunConfig, records, corpus_path) -> dict[str, CandidatePool]:
    docs = {d.doc_id: d for d in load_corpus(corpus_path)}
    aspects = _load_aspects(out_dir, config)
    rows = _read_rows(_require(out_dir, "pool"), config.fingerprint())
    by_id = {rec.id: rec for rec in records}
    pools = {}
    for row in rows:
        rec = by_id[row["query_id"]]
        pools[rec.id] = pool_from_dict(row, rec.question,
                                       aspects[rec.id].source,
                                       config.pool_capacity, docs)
    return pools


def _stage_silver(config, records, corpus_path, out_dir):
    pools = _load_pools(out_dir, config, records, corpus_path)
    rows = []
    failures = []
    for rec in records:
        try:
            target = silver.build_silver_list(pools[rec.id],
                                              list(rec.sub_answers), config.k)
        except ValueError as err:
            failures.append({"id": rec.id, "error": str(err)})
            continue
        rows.append({"query_id": rec.id, "docids": target.docids,
                     "step_utilities": target.step_utilities})
    _write_rows(_artifact_path(out_dir, "silver"), config.fingerprint(), rows)
    return {"count": len(rows), "failures": failures}


def _make_backend(config: RunConfig, pool: CandidatePool):
    if config.scorer_endpoint:
        return RemoteBackend(config.scorer_endpoint, pool.query, pool.aspects,
                             [c.doc.text for c in pool.candidates],
                             timeout=config.timeout)
    return reference_backend(pool.query, pool.aspects, pool.candidates)


def _ranker_config(config: RunConfig) -> RankerConfig:
    return RankerConfig(k=config.k, tau=config.tau,
                        allow_repetition=config.allow_repetition,
                        seed=config.seed)


def _stage_rank(config, records, corpus_path, out_dir):
    pools = _load_pools(out_dir, config, records, corpus_path)
    rcfg = _ranker_config(config)
    rows = []
    failures = []
    for rec in records:
        try:
            ranking = rank(pools[rec.id], rcfg, _make_backend(config, pools[rec.id]))
        except ValueError as err:
            failures.append({"id": rec.id, "error": str(err)})
            continue
        rows.append({"query_id": rec.id, "docids": ranking.docids,
                     "step_logprobs": ranking.step_logprobs, "mode": ranking.mode})
    _write_rows(_artifact_path(out_dir, "rank"), config.fingerprint(), rows)
    return {"count": len(rows), "failures": failures}


def _make_generator(config: RunConfig):
    if config.generator_endpoint:
        return preferences.HttpGenerator(config.generator_endpoint,
                                         timeout=config.timeout,
                                         retries=config.retries)
    return preferences.OracleGenerator(budget=config.generator_budget)


def _stage_pairs(config, records, corpus_path, out_dir):
    pools = _load_pools(out_dir, config, records, corpus_path)
    rcfg = _ranker_config(config)
    generator = _make_generator(config)
    rows = []
    failures = []
    for rec_idx, rec in enumerate(records):
        pool = pools[rec.id]
        try:
            lists = preferences.generate_rewarded_lists(
                pool, rcfg, _make_backend(config, pool), generator,
                rec.answer, list(rec.sub_answers), config.num_samples)
            if config.ablation == "random-pairs":
                pairs = _random_pairs(lists, random.Random(config.seed + rec_idx))
            else:
                pairs = preferences.build_us3_pairs(lists, config.mu)
        except ValueError as err:
            failures.append({"id": rec.id, "error": str(err)})
            continue
        for p in pairs:
            rows.append({
                "query_id": rec.id,
                "winner_docids": p.winner.list.docids,
                "loser_docids": p.loser.list.docids,
                "winner_reward": p.winner.reward,
                "loser_reward": p.loser.reward,
                "gap": p.gap,
                "mu": config.mu,
                "beta": config.beta,
            })
    _write_rows(_artifact_path(out_dir, "pairs"), config.fingerprint(), rows)
    return {"count": len(rows), "failures": failures}


def _random_pairs(lists, rng: random.Random):
    """Ablation: pair arbitrary lists, winner by reward, no significance rule."""
    pairs = []
    n = len(lists)
    for _ in range(n - 1):
        i, j = rng.sample(range(n), 2)
        a, b = lists[i], lists[j]
        if a.reward == b.reward:
            continue
        winner, loser = (a, b) if a.reward > b.reward else (b, a)
        pairs.append(preferences.PreferencePair(winner, loser,
                                                winner.reward - loser.reward))
    return pairs


def _stage_eval(config, records, corpus_path, out_dir):
    index = _load_index(out_dir, config, corpus_path)
    pools = _load_pools(out_dir, config, records, corpus_path)
    per_aspect = _load_retrieve(out_dir, config)
    silver_rows = {r["query_id"]: r for r in
                   _read_rows(_require(out_dir, "silver"), config.fingerprint())}
    rank_rows = {r["query_id"]: r for r in
                 _read_rows(_require(out_dir, "rank"), config.fingerprint())}
    generator = _make_generator(config)
    cutoffs = list(config.ndcg_cutoffs)

    per_query: dict[str, dict] = {}
    skipped = []
    for rec in records:
        if rec.id not in silver_rows or rec.id not in rank_rows:
            skipped.append(rec.id)
            continue
        pool = pools[rec.id]
        by_doc_id = {c.doc.doc_id: c for c in pool.candidates}
        silver_texts = [pool.candidates[i].doc.text
                        for i in silver_rows[rec.id]["docids"]]
        relevant = evaluation.label_relevance(pool, rec.answer,
                                              config.relevance_threshold)

        systems = {
            "ranked": [pool.candidates[i].doc.doc_id
                       for i in rank_rows[rec.id]["docids"]],
            "no_ranker": _plain_retrieval_ids(index, rec.question, config.k, pool),
            "rrf": evaluation.rrf_fuse(
                [[d for d, _ in lst] for lst in per_aspect[rec.id]],
                k_rrf=config.k_rrf, top=config.k),
        }
        per_query[rec.id] = {}
        for name, doc_ids in systems.items():
            texts = [by_doc_id[d].doc.text if d in by_doc_id
                     else index.documents[d].text for d in doc_ids]
            response = generator.generate(rec.question, texts)
            metrics = evaluation.evaluate_response(response, rec.answer,
                                                   list(rec.sub_answers))
            metrics.update(evaluation.ranking_metrics(doc_ids, relevant, cutoffs))
            if len(texts) == len(silver_texts):
                metrics["ncom"] = evaluation.ncom(texts, silver_texts,
                                                  list(rec.sub_answers))
            per_query[rec.id][name] = metrics

    means: dict[str, dict[str, float]] = {}
    if per_query:
        system_names = sorted(next(iter(per_query.values())))
        for name in system_names:
            keys = sorted(next(iter(per_query.values()))[name])
            means[name] = {
                key: sum(q[name].get(key, 0.0) for q in per_query.values())
                / len(per_query)
                for key in keys
            }
    report = {
        "config_fingerprint": config.fingerprint(),
        "num_queries": len(per_query),
        "skipped": sorted(skipped),
        "per_query": per_query,
        "means": means,
    }
    with open(_artifact_path(out_dir, "eval"), "w", encoding="utf-8") as fh:
        fh.write(_dump(report) + "\n")
    _write_summary(os.path.join(out_dir, "summary.tsv"), means)
    return {"count": len(per_query), "report": report}


def _plain_retrieval_ids(index, question, k, pool) -> list[str]:
    """Original-query retrieval order, padded from the pool when short."""
    ids = [d for d, _ in retrieve(index, question, k)]
    if len(ids) < k:
        have = set(ids)
        for c in pool.candidates:
            if len(ids) >= k:
                break
            if c.doc.doc_id not in have:
                ids.append(c.doc.doc_id)
    return ids[:k]


def _write_summary(path: str, means: dict[str, dict[str, float]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for system in sorted(means):
            for metric in sorted(means[system]):
                fh.write(f"{system}\t{metric}\t{means[system][metric]:.6f}\n")


_STAGE_FUNCS = {
    "index": _stage_index,
    "aspects": _stage_aspects,
    "retrieve": _stage_retrieve,
    "pool": _stage_pool,
    "silver": _stage_silver,
    "rank": _stage_rank,
    "pairs": _stage_pairs,
    "eval": _stage_eval,
}


def run_stage(stage: str, config: RunConfig, dataset_path: str,
              corpus_path: str, out_dir: str) -> dict:
    """Run one named stage; upstream artifacts must already exist."""
    if stage not in _STAGE_FUNCS:
        raise ValueError(f"unknown stage: {stage!r}")
    os.makedirs(out_dir, exist_ok=True)
    records = load_dataset(dataset_path)
    return _STAGE_FUNCS[stage](config, records, corpus_path, out_dir)


def run_pipeline(config: RunConfig, dataset_path: str, corpus_path: str,
                 out_dir: str) -> dict:
    """Run all stages in order; returns the eval stage's report."""
    stats = {}
    for stage in STAGES:
        stats[stage] = run_stage(stage, config, dataset_path, corpus_path, out_dir)
    return stats["eval"]["report"]
