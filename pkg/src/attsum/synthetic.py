"""Synthetic corpus generator with a controllable relevance signal.

Builds clusters where the correct summary sentences are detectable only
through query-conditioned pooling, not surface overlap or position:

* Each cluster is assigned a topic.  A topic owns a query lexicon and a
  content lexicon; all of a topic's words get embeddings drawn tightly
  around a shared random center, so the two lexicons look alike to the
  encoder but share no surface forms.
* Relevant sentences use only content-lexicon words and are copied
  verbatim into the references, so their bigram-recall labels are high.
* Every distractor in a cluster is drawn from one rival topic, and the
  rival block outnumbers the relevant block.  An unweighted pooled
  embedding therefore lands nearer the rival's center and ranks the
  wrong sentences first; only by keying pooling weights on the query can
  a model pull the document embedding onto the relevant block.
* Distractors lead every document, which defeats position-based
  selection.
* Bait sentences drop a couple of literal query words into off-topic
  content, which defeats surface TF-IDF ranking while never matching a
  reference bigram.

The train/test split shares the topic pool but draws disjoint sentences.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from attsum.corpus import Cluster, Document, Query, Sentence, save_cluster, tokenize
from attsum.embed import EmbeddingTable, save_embeddings

_SYLLABLES = [
    "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu",
    "na", "pe", "ri", "so", "tu", "va", "we", "xi", "yo", "zu",
]


@dataclass(frozen=True)
class SyntheticSpec:
    n_clusters: int = 20
    n_train: int = 15
    docs_per_cluster: int = 6
    sentences_per_doc: int = 12
    n_topics: int = 8
    query_lexicon: int = 12
    content_lexicon: int = 24
    dim: int = 50
    noise: float = 0.15
    # cosine between a topic's center and its rival's; higher is harder
    rival_correlation: float = 0.45
    seed: int = 20160219


@dataclass(frozen=True)
class SyntheticPaths:
    train_dir: Path
    test_dir: Path
    embeddings: Path


@dataclass(frozen=True)
class _Topic:
    query_words: list[str]
    content_words: list[str]


def _make_word(rng: np.random.Generator, taken: set[str]) -> str:
    while True:
        parts = rng.integers(0, len(_SYLLABLES), size=3)
        word = "".join(_SYLLABLES[p] for p in parts)
        if word not in taken:
            taken.add(word)
            return word


def _make_topics(spec: SyntheticSpec, rng: np.random.Generator) -> list[_Topic]:
    taken: set[str] = set()
    topics = []
    for _ in range(spec.n_topics):
        topics.append(
            _Topic(
                query_words=[_make_word(rng, taken) for _ in range(spec.query_lexicon)],
                content_words=[
                    _make_word(rng, taken) for _ in range(spec.content_lexicon)
                ],
            )
        )
    return topics


def _topic_centers(spec: SyntheticSpec, rng: np.random.Generator) -> list[np.ndarray]:
    """Unit centers on a chain: consecutive topics (each topic and its
    rival) keep cosine ~ rival_correlation, so the margin between a
    relevant sentence and a rival distractor is tight and the ranking
    cannot be satisfied by coarse topic geometry alone."""
    rho = spec.rival_correlation
    centers = []
    for t in range(spec.n_topics):
        fresh = rng.normal(size=spec.dim)
        fresh /= np.linalg.norm(fresh)
        if not centers:
            center = fresh
        else:
            center = rho * centers[-1] + np.sqrt(1 - rho * rho) * fresh
            center /= np.linalg.norm(center)
        centers.append(center)
    return centers


def _make_embeddings(
    spec: SyntheticSpec, topics: list[_Topic], rng: np.random.Generator
) -> EmbeddingTable:
    entries: dict[str, np.ndarray] = {}
    for topic, center in zip(topics, _topic_centers(spec, rng)):
        for word in topic.query_words + topic.content_words:
            vec = center + spec.noise * rng.normal(size=spec.dim) / np.sqrt(spec.dim)
            vec.flags.writeable = False
            entries[word] = vec
    return EmbeddingTable(dim=spec.dim, entries=entries)


def _sentence_text(words: list[str]) -> str:
    return " ".join([words[0].capitalize()] + words[1:]) + "."


def _draw(rng: np.random.Generator, pool: list[str], count: int) -> list[str]:
    idx = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in idx]


def _relevant_sentence(topic: _Topic, rng: np.random.Generator) -> str:
    length = int(rng.integers(9, 13))
    return _sentence_text(_draw(rng, topic.content_words, length))


def _distractor_sentence(
    topics: list[_Topic], rival_idx: int, rng: np.random.Generator
) -> str:
    rival = topics[rival_idx]
    length = int(rng.integers(9, 13))
    pool = rival.query_words + rival.content_words
    return _sentence_text(_draw(rng, pool, length))


def _bait_sentence(
    topics: list[_Topic], topic_idx: int, rng: np.random.Generator
) -> str:
    """Off-topic sentence carrying one literal query word, so it outranks
    every relevant sentence under surface TF-IDF similarity."""
    others = [i for i in range(len(topics)) if i != topic_idx]
    other = topics[others[int(rng.integers(len(others)))]]
    words = _draw(rng, other.content_words, 9)
    q = _draw(rng, topics[topic_idx].query_words, 1)
    words.insert(3, q[0])
    return _sentence_text(words)


def _build_cluster(
    cluster_id: str,
    topic_idx: int,
    topics: list[_Topic],
    spec: SyntheticSpec,
    rng: np.random.Generator,
) -> Cluster:
    topic = topics[topic_idx]
    half = spec.sentences_per_doc // 2
    # Fixed pairing: every cluster on topic t draws its distractors from
    # topic t+1, so held-out clusters pose the same discrimination the
    # training clusters did.  The pairing still cannot be solved without
    # the query: t+1 is the rival here but the relevant topic one cluster
    # over.
    rival_idx = (topic_idx + 1) % len(topics)

    documents = []
    relevant_texts: list[str] = []
    for d in range(spec.docs_per_cluster):
        front = [_distractor_sentence(topics, rival_idx, rng) for _ in range(half - 2)]
        front += [_bait_sentence(topics, topic_idx, rng) for _ in range(2)]
        rng.shuffle(front)
        relevant = [_relevant_sentence(topic, rng) for _ in range(half - 2)]
        relevant_texts.extend(relevant)
        back = relevant + [
            _distractor_sentence(topics, rival_idx, rng) for _ in range(2)
        ]
        rng.shuffle(back)
        doc_id = f"doc{d:02d}"
        sentences = tuple(
            Sentence(
                id=f"{doc_id}:{pos}",
                tokens=tuple(tokenize(text)),
                doc_id=doc_id,
                position=pos,
                text=text,
            )
            for pos, text in enumerate(front + back)
        )
        documents.append(Document(id=doc_id, sentences=sentences))

    # Three references partition the relevant sentences, so every relevant
    # sentence matches exactly one reference and gets a positive label.
    order = list(rng.permutation(len(relevant_texts)))
    references = []
    for r in range(3):
        part = [relevant_texts[i] for i in sorted(order[r::3])]
        references.append(tuple(tokenize(" ".join(part))))

    query_words = _draw(rng, topic.query_words, 8)
    return Cluster(
        id=cluster_id,
        documents=tuple(documents),
        query=Query(tokens=tuple(tokenize(_sentence_text(query_words)))),
        references=tuple(references),
    )


def generate(out_dir: str | Path, spec: SyntheticSpec = SyntheticSpec()) -> SyntheticPaths:
    """Write a train/test corpus and its embedding table under out_dir."""
    out = Path(out_dir)
    rng = np.random.default_rng(spec.seed)
    topics = _make_topics(spec, rng)
    table = _make_embeddings(spec, topics, rng)

    train_dir = out / "train"
    test_dir = out / "test"
    for i in range(spec.n_clusters):
        cluster = _build_cluster(
            f"cluster-{i:03d}", i % spec.n_topics, topics, spec, rng
        )
        base = train_dir if i < spec.n_train else test_dir
        save_cluster(cluster, base / cluster.id)

    emb_path = save_embeddings(table, out / "embeddings.txt")
    return SyntheticPaths(train_dir=train_dir, test_dir=test_dir, embeddings=emb_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m attsum.synthetic",
        description="generate a synthetic summarization corpus",
    )
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=SyntheticSpec.seed)
    parser.add_argument("--clusters", type=int, default=SyntheticSpec.n_clusters)
    parser.add_argument("--train", type=int, default=SyntheticSpec.n_train)
    args = parser.parse_args(argv)
    spec = SyntheticSpec(n_clusters=args.clusters, n_train=args.train, seed=args.seed)
    paths = generate(args.out_dir, spec)
    print(f"train corpus: {paths.train_dir}")
    print(f"test corpus:  {paths.test_dir}")
    print(f"embeddings:   {paths.embeddings}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
