"""ROUGE-N recall scoring (N = 1 or 2).

Used twice: to label training sentences by bigram overlap with the
reference summaries, and to evaluate finished summaries.  Matching is on
lowercased tokens with no stemming; n-gram units are word tokens only
(punctuation-only tokens are dropped before counting).  Multi-reference
scores are the arithmetic mean of per-reference recalls.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from attsum.corpus import Cluster, Sentence, Token, compile_cluster, is_word
from attsum.errors import CorpusError


@dataclass(frozen=True)
class RougeConfig:
    n: int = 2
    truncate_words: int | None = None  # cap on candidate word count, None = off

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        if self.truncate_words is not None and self.truncate_words < 1:
            raise ValueError("truncate_words must be >= 1 when present")


@dataclass(frozen=True)
class RougeScore:
    recall: float
    matched: int  # clipped n-gram matches summed over references
    total_ref_ngrams: int  # reference n-gram count summed over references


def _word_seq(tokens) -> list[str]:
    """Normalized word forms; Token punctuation is dropped, bare strings pass."""
    words: list[str] = []
    for t in tokens:
        if isinstance(t, Token):
            if is_word(t.normalized):
                words.append(t.normalized)
        else:
            words.append(t)
    return words


def ngram_multiset(words: list[str], n: int) -> Counter:
    """All contiguous n-grams with multiplicity; short input gives empty."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


def rouge_n(candidate, references, config: RougeConfig) -> RougeScore:
    """Mean over references of clipped n-gram recall.

    The candidate is truncated to the first ``truncate_words`` words when
    configured.  A reference with no n-grams contributes recall 0.
    """
    if not references:
        raise ValueError("at least one reference is required")
    cand_words = _word_seq(candidate)
    if config.truncate_words is not None:
        cand_words = cand_words[: config.truncate_words]
    cand_counts = ngram_multiset(cand_words, config.n)

    matched_total = 0
    ref_total = 0
    recall_sum = 0.0
    for ref in references:
        ref_counts = ngram_multiset(_word_seq(ref), config.n)
        total = sum(ref_counts.values())
        matched = sum(
            min(count, cand_counts[gram]) for gram, count in ref_counts.items()
        )
        matched_total += matched
        ref_total += total
        if total > 0:
            recall_sum += matched / total
    return RougeScore(
        recall=recall_sum / len(references),
        matched=matched_total,
        total_ref_ngrams=ref_total,
    )


def label_sentences(
    cluster: Cluster, n: int = 2
) -> list[tuple[Sentence, RougeScore]]:
    """Score each compiled sentence against all references, compile order.

    No truncation applies; these scores are the training labels.
    """
    if not cluster.references:
        raise CorpusError(f"cluster {cluster.id} has no reference summaries")
    config = RougeConfig(n=n, truncate_words=None)
    return [
        (s, rouge_n(s.tokens, cluster.references, config))
        for s in compile_cluster(cluster)
    ]
