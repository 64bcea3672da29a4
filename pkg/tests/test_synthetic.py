"""Properties of the generated corpus that training depends on."""

from pathlib import Path

import pytest

from attsum.corpus import count_words, load_corpus
from attsum.embed import load_embeddings
from attsum.pipeline import split_pos_neg, tfidf_query_scores
from attsum.rouge import label_sentences
from attsum.synthetic import SyntheticSpec, generate, main

SMALL = SyntheticSpec(
    n_clusters=4,
    n_train=3,
    docs_per_cluster=3,
    sentences_per_doc=8,
    n_topics=4,
    query_lexicon=10,
    content_lexicon=16,
    dim=8,
    seed=7,
)


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    paths = generate(out, SMALL)
    return paths, load_corpus(paths.train_dir), load_corpus(paths.test_dir)


class TestStructure:
    def test_split_sizes(self, small_corpus):
        _, train, test = small_corpus
        assert len(train) == 3 and len(test) == 1

    def test_cluster_shape(self, small_corpus):
        _, train, _ = small_corpus
        for cluster in train:
            assert len(cluster.documents) == SMALL.docs_per_cluster
            for doc in cluster.documents:
                assert len(doc.sentences) == SMALL.sentences_per_doc
            assert len(cluster.references) == 3
            assert len(cluster.query.tokens) > 0

    def test_embeddings_cover_vocabulary(self, small_corpus):
        paths, train, test = small_corpus
        table = load_embeddings(paths.embeddings)
        assert table.dim == SMALL.dim
        for cluster in list(train) + list(test):
            for doc in cluster.documents:
                for s in doc.sentences:
                    for tok in s.tokens:
                        if tok.normalized.isalpha():
                            assert tok.normalized in table
            for tok in cluster.query.tokens:
                if tok.normalized.isalpha():
                    assert tok.normalized in table


class TestDeterminism:
    def test_same_seed_same_bytes(self, tmp_path):
        a = generate(tmp_path / "a", SMALL)
        b = generate(tmp_path / "b", SMALL)
        files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
        assert a.embeddings.read_bytes() == b.embeddings.read_bytes()


class TestTrainability:
    def test_every_train_cluster_splits(self, small_corpus):
        _, train, _ = small_corpus
        for cluster in train:
            labels = [sc.recall for _, sc in label_sentences(cluster, n=2)]
            split = split_pos_neg(labels, 0.25, 0.25)
            assert split is not None, cluster.id
            pos, neg = split
            assert all(labels[i] > 0 for i in pos)
            assert all(labels[i] == 0 for i in neg)

    def test_relevant_sentences_pass_length_filter(self, small_corpus):
        _, train, test = small_corpus
        for cluster in list(train) + list(test):
            for s, sc in label_sentences(cluster, n=2):
                if sc.recall > 0:
                    assert count_words(s.tokens) >= 8, s.id

    def test_surface_overlap_points_away_from_relevance(self, small_corpus):
        """Reference-matching sentences share no words with the query, while
        some zero-label sentence does; lexical ranking is anti-correlated."""
        _, train, test = small_corpus
        for cluster in list(train) + list(test):
            labels = [sc.recall for _, sc in label_sentences(cluster, n=2)]
            tfidf = tfidf_query_scores(cluster)
            for lab, score in zip(labels, tfidf):
                if lab > 0:
                    assert score == 0.0
            assert max(
                score for lab, score in zip(labels, tfidf) if lab == 0
            ) > 0.0


class TestMain:
    def test_cli_entry(self, tmp_path, capsys):
        code = main([str(tmp_path / "out"), "--clusters", "2", "--train", "1"])
        assert code == 0
        assert (tmp_path / "out" / "train").is_dir()
        assert (tmp_path / "out" / "test").is_dir()
        assert (tmp_path / "out" / "embeddings.txt").is_file()
        assert "train corpus" in capsys.readouterr().out
