"""Training, ranking, summary selection, baselines, and evaluation.

Training labels every cluster sentence with its bigram recall against the
reference summaries, splits each cluster into a top-quantile positive set
and a bottom-quantile negative set, and minimizes the pairwise hinge with
mini-batch AdaGrad.  Inference ranks sentences by cosine to the pooled
document embedding and greedily selects non-redundant sentences into a
word budget.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from attsum.corpus import (
    Cluster,
    Sentence,
    compile_cluster,
    count_words,
    is_word,
    tokenize,
)
from attsum.embed import EmbeddingTable, sentence_matrix
from attsum.errors import AttsumError, CorpusError
from attsum.model import (
    Encoding,
    ModelConfig,
    ModelParams,
    adagrad_step,
    doc_embedding,
    encode_full,
    init_adagrad,
    init_params,
    pairs_backward,
    rank_score,
    zero_gradients,
)
from attsum.rouge import RougeConfig, label_sentences, ngram_multiset, rouge_n

log = logging.getLogger("attsum")

WORD_LIMIT = 250
MIN_WORDS = 8
RATIO_CUTOFF = 0.5

LEAD = "lead"
QUERY_SIM = "querysim"
ISOLATION = "isolation"
BASELINES = (LEAD, QUERY_SIM, ISOLATION)


@dataclass(frozen=True)
class TrainConfig:
    margin: float = 0.5
    eta: float = 0.1
    batch_size: int = 100
    epochs: int = 10
    seed: int = 0
    pos_quantile: float = 0.25
    neg_quantile: float = 0.25
    cluster_cap: int = 1000
    frozen_relevance: bool = False  # pin relevance at 0.5 (pooling-only model)

    def __post_init__(self):
        if not (0 < self.pos_quantile <= 0.5 and 0 < self.neg_quantile <= 0.5):
            raise ValueError("quantiles must lie in (0, 0.5]")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.margin <= 0 or self.eta <= 0:
            raise ValueError("margin and eta must be positive")
        if self.cluster_cap < 1:
            raise ValueError("cluster_cap must be >= 1")


@dataclass(frozen=True)
class TrainingPair:
    cluster_id: str
    pos_idx: int
    neg_idx: int


@dataclass(frozen=True)
class RankedSentence:
    sentence: Sentence
    relevance: float  # pooling weight in (0, 1)
    score: float  # ranking score; cosine to the document embedding
    word_count: int


@dataclass(frozen=True)
class SummaryLine:
    sentence: Sentence
    text: str  # surface text actually emitted (final line may be cut short)
    word_count: int  # words this line contributes to the budget


@dataclass(frozen=True)
class Summary:
    lines: tuple[SummaryLine, ...]
    total_words: int

    @property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(line.sentence for line in self.lines)

    def text_lines(self) -> list[str]:
        return [line.text for line in self.lines]


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_loss: float
    pairs: int


@dataclass
class TrainResult:
    params: ModelParams
    config: ModelConfig
    history: list[EpochStats]
    skipped_clusters: list[str]


# ---------------------------------------------------------------------------
# Pair sampling


def split_pos_neg(labels: Sequence[float], pos_q: float, neg_q: float):
    """Top/bottom quantile index sets by label, ties broken by position.

    Each set holds max(1, floor(q * n)) indices.  Returns None when the
    sets overlap or their label ranges touch; such a cluster cannot yield
    strictly ordered pairs and must be skipped.
    """
    n = len(labels)
    n_pos = max(1, math.floor(pos_q * n))
    n_neg = max(1, math.floor(neg_q * n))
    by_desc = sorted(range(n), key=lambda i: (-labels[i], i))
    by_asc = sorted(range(n), key=lambda i: (labels[i], i))
    pos = by_desc[:n_pos]
    neg = by_asc[:n_neg]
    if set(pos) & set(neg):
        return None
    if min(labels[i] for i in pos) <= max(labels[i] for i in neg):
        return None
    return pos, neg


@dataclass
class _LabeledCluster:
    cluster_id: str
    sentences: list[Sentence]
    mats: list[np.ndarray]
    q_mat: np.ndarray
    labels: list[float]
    pos: list[int]
    neg: list[int]


def _label_cluster(
    cluster: Cluster, table: EmbeddingTable, config: ModelConfig, tc: TrainConfig
) -> _LabeledCluster | None:
    if not cluster.references:
        log.warning("skipping cluster %s: no references", cluster.id)
        return None
    scored = label_sentences(cluster, n=2)[: tc.cluster_cap]
    labels = [score.recall for _, score in scored]
    split = split_pos_neg(labels, tc.pos_quantile, tc.neg_quantile)
    if split is None:
        log.warning(
            "skipping cluster %s: positive and negative label sets overlap",
            cluster.id,
        )
        return None
    pos, neg = split
    sentences = [s for s, _ in scored]
    return _LabeledCluster(
        cluster_id=cluster.id,
        sentences=sentences,
        mats=[sentence_matrix(table, s.tokens, config.h) for s in sentences],
        q_mat=sentence_matrix(table, cluster.query.tokens, config.h),
        labels=labels,
        pos=pos,
        neg=neg,
    )


def sample_pairs(
    labeled: Sequence[_LabeledCluster], config: TrainConfig, rng: np.random.Generator
) -> Iterator[list[TrainingPair]]:
    """Endless stream of batches: pick a cluster uniformly, then one
    positive and one negative uniformly within it."""
    if not labeled:
        raise AttsumError("no usable training clusters")
    while True:
        batch: list[TrainingPair] = []
        for _ in range(config.batch_size):
            lc = labeled[int(rng.integers(len(labeled)))]
            pos_idx = lc.pos[int(rng.integers(len(lc.pos)))]
            neg_idx = lc.neg[int(rng.integers(len(lc.neg)))]
            batch.append(TrainingPair(lc.cluster_id, pos_idx, neg_idx))
        yield batch


# ---------------------------------------------------------------------------
# Training loop


def train(
    corpus: Sequence[Cluster],
    table: EmbeddingTable,
    config: ModelConfig,
    tc: TrainConfig,
) -> TrainResult:
    """Mini-batch pairwise training; deterministic for a fixed seed.

    Batch gradients are the sum of pair gradients; pairs from the same
    cluster share one encoding pass.  One optimizer step per batch.
    """
    if not corpus:
        raise AttsumError("empty training corpus")
    if config.k != table.dim:
        raise AttsumError(
            f"model expects word dim {config.k}, embedding table has {table.dim}"
        )

    labeled: list[_LabeledCluster] = []
    skipped: list[str] = []
    for cluster in corpus:
        lc = _label_cluster(cluster, table, config, tc)
        if lc is None:
            skipped.append(cluster.id)
        else:
            labeled.append(lc)
    if not labeled:
        raise AttsumError("all training clusters were skipped")

    by_id = {lc.cluster_id: i for i, lc in enumerate(labeled)}
    total_pairs = sum(len(lc.pos) * len(lc.neg) for lc in labeled)
    n_batches = max(1, total_pairs // tc.batch_size)

    rng = np.random.default_rng(tc.seed)
    params = init_params(config, tc.seed)
    state = init_adagrad(config)
    stream = sample_pairs(labeled, tc, rng)

    history: list[EpochStats] = []
    for epoch in range(1, tc.epochs + 1):
        loss_sum = 0.0
        pair_count = 0
        for _ in range(n_batches):
            batch = next(stream)
            groups: dict[int, list[tuple[int, int]]] = {}
            for pair in batch:
                groups.setdefault(by_id[pair.cluster_id], []).append(
                    (pair.pos_idx, pair.neg_idx)
                )
            grads = zero_gradients(config)
            # Fixed iteration order keeps the reduction bit-deterministic.
            for ci in sorted(groups):
                lc = labeled[ci]
                encs = [encode_full(params, m, config.h) for m in lc.mats]
                q_enc = encode_full(params, lc.q_mat, config.h)
                losses, g = pairs_backward(
                    params, encs, q_enc, groups[ci], tc.margin, config,
                    tc.frozen_relevance,
                )
                grads.add(g)
                loss_sum += sum(losses)
            adagrad_step(params, state, grads, tc.eta)
            pair_count += len(batch)
        stats = EpochStats(epoch=epoch, mean_loss=loss_sum / pair_count, pairs=pair_count)
        history.append(stats)
        log.info("epoch %d mean_loss %r pairs %d", stats.epoch, stats.mean_loss, stats.pairs)
    return TrainResult(params=params, config=config, history=history, skipped_clusters=skipped)


def format_epoch_log(history: Sequence[EpochStats]) -> str:
    return "".join(
        f"epoch {s.epoch} mean_loss {s.mean_loss!r} pairs {s.pairs}\n" for s in history
    )


# ---------------------------------------------------------------------------
# Inference: ranking and selection


def rank_sentences(
    params: ModelParams,
    config: ModelConfig,
    table: EmbeddingTable,
    cluster: Cluster,
    frozen_relevance: bool = False,
) -> list[RankedSentence]:
    """Score every sentence by cosine to the pooled document embedding.

    Sorted descending; ties keep compile order.
    """
    if config.k != table.dim:
        raise AttsumError(
            f"model expects word dim {config.k}, embedding table has {table.dim}"
        )
    sentences = compile_cluster(cluster)
    if not sentences:
        raise AttsumError(f"cluster {cluster.id} has no sentences")
    embs = [
        encode_full(params, sentence_matrix(table, s.tokens, config.h), config.h).v
        for s in sentences
    ]
    v_q = encode_full(
        params, sentence_matrix(table, cluster.query.tokens, config.h), config.h
    ).v
    v_d, weights = doc_embedding(params, embs, v_q, frozen_relevance)
    ranked = [
        RankedSentence(
            sentence=s,
            relevance=w,
            score=rank_score(v, v_d),
            word_count=count_words(s.tokens),
        )
        for s, v, w in zip(sentences, embs, weights)
    ]
    ranked.sort(key=lambda r: -r.score)  # stable: compile order breaks ties
    return ranked


def _sentence_bigrams(sentence: Sentence) -> set[tuple[str, str]]:
    words = [t.normalized for t in sentence.tokens if is_word(t.normalized)]
    return set(ngram_multiset(words, 2))


def new_bigram_ratio(candidate: Sentence, current: Summary) -> float:
    """Fraction of the candidate's distinct bigrams absent from the summary.

    A candidate with no bigrams at all counts as fully new (ratio 1.0).
    """
    cand = _sentence_bigrams(candidate)
    if not cand:
        return 1.0
    seen: set[tuple[str, str]] = set()
    for line in current.lines:
        seen |= _sentence_bigrams(line.sentence)
    return len(cand - seen) / len(cand)


def _truncate_line(sentence: Sentence, budget: int) -> tuple[str, int]:
    """Surface text for the first ``budget`` words of a sentence."""
    kept: list[str] = []
    words = 0
    for tok in sentence.tokens:
        if is_word(tok.normalized):
            if words == budget:
                break
            words += 1
        kept.append(tok.surface)
    return " ".join(kept), words


def select_summary(
    ranked: Sequence[RankedSentence],
    word_limit: int = WORD_LIMIT,
    min_words: int = MIN_WORDS,
    ratio_cutoff: float = RATIO_CUTOFF,
) -> Summary:
    """Greedy selection down the ranking.

    Short sentences are skipped outright; a sentence is appended only if
    enough of its bigrams are new.  The sentence that reaches the word
    budget is appended in truncated form and selection stops there.
    """
    lines: list[SummaryLine] = []
    seen: set[tuple[str, str]] = set()
    total = 0
    for r in ranked:
        if r.word_count < min_words:
            continue
        cand = _sentence_bigrams(r.sentence)
        if cand:
            ratio = len(cand - seen) / len(cand)
            if ratio < ratio_cutoff:
                continue
        if total + r.word_count >= word_limit:
            text, words = _truncate_line(r.sentence, word_limit - total)
            lines.append(SummaryLine(sentence=r.sentence, text=text, word_count=words))
            total += words
            break
        lines.append(
            SummaryLine(sentence=r.sentence, text=r.sentence.text, word_count=r.word_count)
        )
        total += r.word_count
        seen |= cand
    return Summary(lines=tuple(lines), total_words=total)


def summarize_cluster(
    params: ModelParams,
    config: ModelConfig,
    table: EmbeddingTable,
    cluster: Cluster,
    word_limit: int = WORD_LIMIT,
    min_words: int = MIN_WORDS,
    ratio_cutoff: float = RATIO_CUTOFF,
) -> Summary:
    ranked = rank_sentences(params, config, table, cluster)
    return select_summary(ranked, word_limit, min_words, ratio_cutoff)


def write_summary(summary: Summary, path: str | Path) -> Path:
    path = Path(path)
    content = "".join(line + "\n" for line in summary.text_lines())
    path.write_text(content, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Baselines


def tfidf_query_scores(cluster: Cluster) -> list[float]:
    """Per-sentence TF-IDF cosine to the query.

    IDF is computed over the cluster's own sentences with
    idf = ln((N + 1) / (df + 1)) + 1 and raw-count TF.
    """
    sentences = compile_cluster(cluster)
    n = len(sentences)
    df: Counter = Counter()
    sent_words: list[list[str]] = []
    for s in sentences:
        words = [t.normalized for t in s.tokens if is_word(t.normalized)]
        sent_words.append(words)
        df.update(set(words))

    def idf(word: str) -> float:
        return math.log((n + 1) / (df[word] + 1)) + 1.0

    def vec(words: list[str]) -> dict[str, float]:
        return {w: c * idf(w) for w, c in Counter(words).items()}

    def cos(a: dict[str, float], b: dict[str, float]) -> float:
        dot = sum(v * b[w] for w, v in a.items() if w in b)
        na = math.sqrt(sum(v * v for v in a.values()))
        nb = math.sqrt(sum(v * v for v in b.values()))
        if na < 1e-12 or nb < 1e-12:
            return 0.0
        return dot / (na * nb)

    q_vec = vec([t.normalized for t in cluster.query.tokens if is_word(t.normalized)])
    return [cos(vec(words), q_vec) for words in sent_words]


def run_baseline(
    method: str,
    cluster: Cluster,
    params: ModelParams | None = None,
    config: ModelConfig | None = None,
    table: EmbeddingTable | None = None,
    lam: float = 1.0,
    word_limit: int = WORD_LIMIT,
    min_words: int = MIN_WORDS,
    ratio_cutoff: float = RATIO_CUTOFF,
) -> Summary:
    """LEAD, QUERY_SIM, or ISOLATION ranking feeding the same selector.

    LEAD keeps document order; QUERY_SIM ranks by TF-IDF cosine to the
    query; ISOLATION ranks by cosine to the sum-pooled document embedding
    plus lam times the TF-IDF query score and needs a model checkpoint
    trained with frozen relevance.
    """
    sentences = compile_cluster(cluster)
    if not sentences:
        raise AttsumError(f"cluster {cluster.id} has no sentences")

    def as_ranked(scores: list[float], presorted: bool = False) -> list[RankedSentence]:
        ranked = [
            RankedSentence(
                sentence=s, relevance=0.5, score=sc, word_count=count_words(s.tokens)
            )
            for s, sc in zip(sentences, scores)
        ]
        if not presorted:
            ranked.sort(key=lambda r: -r.score)
        return ranked

    if method == LEAD:
        ranked = as_ranked([0.0] * len(sentences), presorted=True)
    elif method == QUERY_SIM:
        ranked = as_ranked(tfidf_query_scores(cluster))
    elif method == ISOLATION:
        if params is None or config is None or table is None:
            raise AttsumError("isolation baseline needs a model and embeddings")
        model_ranked = rank_sentences(
            params, config, table, cluster, frozen_relevance=True
        )
        tfidf = tfidf_query_scores(cluster)
        by_id = {r.sentence.id: r.score for r in model_ranked}
        ranked = as_ranked([by_id[s.id] + lam * t for s, t in zip(sentences, tfidf)])
    else:
        raise AttsumError(f"unknown baseline method: {method}")
    return select_summary(ranked, word_limit, min_words, ratio_cutoff)


# ---------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class ClusterScore:
    cluster_id: str
    rouge1: float | None
    rouge2: float | None
    error: str | None = None


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[ClusterScore, ...]
    mean1: float
    mean2: float

    def to_tsv(self) -> str:
        out = ["cluster_id\tROUGE-1\tROUGE-2"]
        for row in self.rows:
            if row.error is not None:
                out.append(f"{row.cluster_id}\tNA\tNA")
            else:
                out.append(
                    f"{row.cluster_id}\t{100 * row.rouge1:.2f}\t{100 * row.rouge2:.2f}"
                )
        out.append(f"mean\t{100 * self.mean1:.2f}\t{100 * self.mean2:.2f}")
        return "\n".join(out) + "\n"


def read_summary_tokens(path: Path) -> list:
    return tokenize(path.read_text(encoding="utf-8"))


def _score_cluster(
    cluster: Cluster, summaries_dir: Path, truncate: int
) -> ClusterScore:
    if not cluster.references:
        return ClusterScore(cluster.id, None, None, error="no references")
    path = summaries_dir / f"{cluster.id}.sum.txt"
    if not path.is_file():
        return ClusterScore(cluster.id, None, None, error=f"missing summary {path.name}")
    tokens = read_summary_tokens(path)
    r1 = rouge_n(tokens, cluster.references, RougeConfig(n=1, truncate_words=truncate))
    r2 = rouge_n(tokens, cluster.references, RougeConfig(n=2, truncate_words=truncate))
    return ClusterScore(cluster.id, r1.recall, r2.recall)


def evaluate(
    corpus: Sequence[Cluster],
    summaries_dir: str | Path,
    truncate: int = WORD_LIMIT,
    jobs: int = 1,
) -> EvalReport:
    """Score each cluster's summary file; macro-average over scored rows.

    A cluster without references or without a summary file becomes an
    error row and the run continues.
    """
    summaries_dir = Path(summaries_dir)
    if not summaries_dir.is_dir():
        raise CorpusError(f"summaries directory not found: {summaries_dir}")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(
                pool.map(lambda c: _score_cluster(c, summaries_dir, truncate), corpus)
            )
    else:
        rows = [_score_cluster(c, summaries_dir, truncate) for c in corpus]
    for row in rows:
        if row.error is not None:
            log.warning("cluster %s not scored: %s", row.cluster_id, row.error)
    scored = [r for r in rows if r.error is None]
    if not scored:
        raise AttsumError("no cluster could be evaluated")
    return EvalReport(
        rows=tuple(rows),
        mean1=sum(r.rouge1 for r in scored) / len(scored),
        mean2=sum(r.rouge2 for r in scored) / len(scored),
    )
