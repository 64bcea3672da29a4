"""AttSum: query-focused extractive summarization toolkit.

Trains a convolutional sentence encoder with attention-weighted pooling
over sentence embeddings, ranks sentences by similarity to the pooled
document representation, and assembles summaries under a word budget.
"""

__version__ = "0.1.0"

from attsum.corpus import Cluster, Document, Query, Sentence, Token, load_cluster, load_corpus
from attsum.embed import EmbeddingTable, load_embeddings
from attsum.model import ModelConfig, ModelParams, init_params, load_checkpoint, save_checkpoint
from attsum.pipeline import Summary, TrainConfig, rank_sentences, run_baseline, select_summary, train

__all__ = [
    "Cluster",
    "Document",
    "EmbeddingTable",
    "ModelConfig",
    "ModelParams",
    "Query",
    "Sentence",
    "Summary",
    "Token",
    "TrainConfig",
    "init_params",
    "load_checkpoint",
    "load_cluster",
    "load_corpus",
    "load_embeddings",
    "rank_sentences",
    "run_baseline",
    "save_checkpoint",
    "select_summary",
    "train",
]
