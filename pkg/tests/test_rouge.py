"""N-gram recall scoring against hand-counted values."""

import pytest

from attsum.corpus import load_cluster, tokenize
from attsum.errors import CorpusError
from attsum.rouge import RougeConfig, RougeScore, label_sentences, ngram_multiset, rouge_n

from conftest import make_cluster_dir

R1 = RougeConfig(n=1)
R2 = RougeConfig(n=2)


class TestConfig:
    def test_n_restricted(self):
        with pytest.raises(ValueError):
            RougeConfig(n=3)

    def test_truncate_positive(self):
        with pytest.raises(ValueError):
            RougeConfig(n=1, truncate_words=0)


class TestNgramMultiset:
    def test_bigrams(self):
        assert ngram_multiset(["a", "b", "c"], 2) == {
            ("a", "b"): 1, ("b", "c"): 1,
        }

    def test_multiplicity(self):
        assert ngram_multiset(["a", "a", "a"], 2) == {("a", "a"): 2}

    def test_short_input_empty(self):
        assert ngram_multiset(["a"], 2) == {}
        assert ngram_multiset([], 1) == {}


class TestRougeN:
    def test_identity_is_one(self):
        score = rouge_n(["a", "b", "c"], [["a", "b", "c"]], R2)
        assert score.recall == 1.0
        assert score.matched == 2 and score.total_ref_ngrams == 2

    def test_hand_bigram_half(self):
        # ref bigrams {ab, bd}; candidate matches only ab
        score = rouge_n(["a", "b", "c"], [["a", "b", "d"]], R2)
        assert score.recall == 0.5

    def test_disjoint_is_zero(self):
        assert rouge_n(["a", "b"], [["c", "d"]], R2).recall == 0.0

    def test_unigram_clipping(self):
        # ref has a three times, candidate only twice
        score = rouge_n(["a", "a"], [["a", "a", "a"]], R1)
        assert score.recall == pytest.approx(2 / 3, abs=1e-15)

    def test_candidate_surplus_clipped(self):
        score = rouge_n(["a", "a", "a", "a"], [["a", "a"]], R1)
        assert score.recall == 1.0

    def test_bigram_multiplicity(self):
        score = rouge_n(["a", "a"], [["a", "a", "a"]], R2)
        assert score.recall == 0.5

    def test_multi_reference_mean(self):
        score = rouge_n(["a", "b"], [["a", "b"], ["c", "d"]], R2)
        assert score.recall == 0.5

    def test_reference_without_ngrams_contributes_zero(self):
        score = rouge_n(["a", "b"], [["a"], ["a", "b"]], R2)
        assert score.recall == 0.5

    def test_truncation_cuts_matches(self):
        cfg = RougeConfig(n=2, truncate_words=2)
        assert rouge_n(["a", "b", "c"], [["b", "c"]], cfg).recall == 0.0
        assert rouge_n(["a", "b", "c"], [["b", "c"]], R2).recall == 1.0

    def test_truncation_counts_words_not_punctuation(self):
        cfg = RougeConfig(n=2, truncate_words=2)
        # tokens: a , b c  -> words a b c; keep [a, b]
        cand = tokenize("a , b c")
        assert rouge_n(cand, [["a", "b"]], cfg).recall == 1.0

    def test_token_input_drops_punctuation(self):
        cand = tokenize("The drug trial, it said.")
        ref = tokenize("the drug trial")
        score = rouge_n(cand, [ref], R2)
        assert score.recall == 1.0  # bigrams (the,drug), (drug,trial)

    def test_empty_reference_list_rejected(self):
        with pytest.raises(ValueError):
            rouge_n(["a"], [], R1)

    def test_reference_order_irrelevant(self):
        refs = [["a", "b", "c"], ["c", "a"], ["b", "b"]]
        a = rouge_n(["a", "b"], refs, R1).recall
        b = rouge_n(["a", "b"], list(reversed(refs)), R1).recall
        assert a == b

    def test_appending_matching_bigram_never_decreases(self):
        ref = [["a", "b", "c", "d"]]
        base = rouge_n(["a", "b"], ref, R2).recall
        more = rouge_n(["a", "b", "c"], ref, R2).recall
        assert more >= base


class TestLabelSentences:
    def make(self, tmp_path):
        cdir = make_cluster_dir(
            tmp_path,
            "lab",
            "what happened?",
            {"d": "Alpha beta gamma delta.\nBeta gamma epsilon zeta.\nOmega psi chi phi."},
            refs=["alpha beta gamma zeta"],
        )
        return load_cluster(cdir)

    def test_hand_labels(self, tmp_path):
        # ref bigrams: (alpha,beta) (beta,gamma) (gamma,zeta), total 3
        labeled = self.make(tmp_path)
        scores = [score.recall for _, score in label_sentences(labeled, n=2)]
        assert scores == pytest.approx([2 / 3, 1 / 3, 0.0], abs=1e-15)

    def test_compile_order_preserved(self, tmp_path):
        labeled = self.make(tmp_path)
        ids = [s.id for s, _ in label_sentences(labeled)]
        assert ids == ["d:0", "d:1", "d:2"]

    def test_no_references_rejected(self, tmp_path):
        cdir = make_cluster_dir(tmp_path, "c", "q?", {"d": "Hello there."})
        with pytest.raises(CorpusError, match="no reference"):
            label_sentences(load_cluster(cdir))

    def test_verbatim_sentence_scores_positive(self, tmp_path):
        cdir = make_cluster_dir(
            tmp_path, "c", "q?",
            {"d": "Exact copy of reference text.\nTotally different words here."},
            refs=["Exact copy of reference text."],
        )
        labeled = label_sentences(load_cluster(cdir))
        assert labeled[0][1].recall == 1.0
        assert labeled[1][1].recall == 0.0
