"""Generate the shipped synthetic corpus and dataset.

20 topics, 10 documents each (200 total). Every document is exactly 8
tokens long and mentions its topic word once, so plain-query BM25 and the
extractive generator tie everywhere and ordering is decided by
deterministic tie-breaks. Per topic:

  2 stub docs   (a-...)  topic + filler; no aspect signal, no payload
  2 glue docs   (b-...)  topic + one keyword from each of two aspects;
                         ranked high by several per-aspect queries, so
                         reciprocal-rank fusion over-promotes them even
                         though they carry no payload
  3 partial docs(c-...)  topic + one aspect keyword + filler; no payload
  3 gold docs   (d-...)  topic + the aspect's three keywords + four
                         payload words; the text IS the sub-answer

Doc-id prefixes make tie-broken orders put stubs and glue first, so
retrieval-order and RRF baselines surface payload-free documents while a
coverage-aware ranker finds the three golds.
"""

from __future__ import annotations

import json
import os

NUM_TOPICS = 20
ASPECT_LABELS = ("history", "design", "impact")


def topic_fixture(t: int):
    """(documents, record) for one topic."""
    topic = f"topic{t:02d}"
    aspects = [f"{label}{t:02d}a {label}{t:02d}b {label}{t:02d}c"
               for label in ASPECT_LABELS]
    payloads = [
        " ".join(f"{label}{t:02d}p{j}" for j in range(4))
        for label in ASPECT_LABELS
    ]
    sub_answers = [f"{topic} {aspects[i]} {payloads[i]}" for i in range(3)]

    docs = []

    def add(doc_id: str, text: str):
        docs.append({"doc_id": doc_id, "title": "", "text": text})

    for i in range(2):
        filler = " ".join(f"fill{t:02d}s{i}x{j}" for j in range(7))
        add(f"{topic}-a-stub-{i}", f"{topic} {filler}")
    # glue 0 touches aspects 0 and 1, glue 1 touches aspects 1 and 2
    for i, (x, y) in enumerate(((0, 1), (1, 2))):
        kw_x = aspects[x].split()[0]
        kw_y = aspects[y].split()[0]
        filler = " ".join(f"fill{t:02d}g{i}x{j}" for j in range(5))
        add(f"{topic}-b-glue-{i}", f"{topic} {kw_x} {kw_y} {filler}")
    for i in range(3):
        kw = aspects[i].split()[0]
        filler = " ".join(f"fill{t:02d}p{i}x{j}" for j in range(6))
        add(f"{topic}-c-part-{i}", f"{topic} {kw} {filler}")
    for i in range(3):
        add(f"{topic}-d-gold-{i}", sub_answers[i])

    record = {
        "id": f"q{t:02d}",
        "question": f"tell me about {topic}",
        "answer": " ".join(sub_answers),
        "sub_aspects": aspects,
        "sub_answers": sub_answers,
    }
    return docs, record


def build(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    all_docs, all_records = [], []
    for t in range(NUM_TOPICS):
        docs, record = topic_fixture(t)
        all_docs.extend(docs)
        all_records.append(record)
    with open(os.path.join(out_dir, "corpus.jsonl"), "w", encoding="utf-8") as fh:
        for d in all_docs:
            fh.write(json.dumps(d, sort_keys=True) + "\n")
    with open(os.path.join(out_dir, "dataset.jsonl"), "w", encoding="utf-8") as fh:
        for r in all_records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    print(f"wrote {len(all_docs)} docs and {len(all_records)} records to {out_dir}")


if __name__ == "__main__":
    import sys

    build(sys.argv[1] if len(sys.argv) > 1 else "data/synthetic")
