"""Attention-pooled convolutional sentence ranker.

Forward pass per sentence: slide a width-h window over the word-vector
columns, apply one linear filter W (no bias) and tanh, then max-over-time
pool to a length-l sentence embedding.  A bilinear form through M against
the query embedding, squashed by a sigmoid, gives each sentence's
relevance weight; the document embedding is the relevance-weighted sum of
all sentence embeddings.  Sentences are ranked by cosine similarity to
that document embedding.

Training minimizes a pairwise hinge: a sentence with a higher reference
overlap must out-rank a lower one by at least the margin.  The backward
pass is written out by hand below; every sentence in the cluster receives
gradient through the pooling weights, not just the two in the pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from attsum.errors import CheckpointError
from attsum.tensor import (
    GradCheckReport,
    bilinear,
    cosine,
    cosine_grad,
    grad_check,
    max_over_time,
    sigmoid,
)

CHECKPOINT_FORMAT = "attsum.v1"
ADAGRAD_EPSILON = 1e-6


@dataclass(frozen=True)
class ModelConfig:
    h: int = 2  # convolution window size
    k: int = 50  # word-embedding dimension
    l: int = 50  # sentence-embedding dimension

    def __post_init__(self):
        if self.h < 1 or self.k < 1 or self.l < 1:
            raise ValueError(f"config dimensions must be >= 1: {self}")


@dataclass
class ModelParams:
    W: np.ndarray  # l x (h*k) convolution filter
    M: np.ndarray  # l x l bilinear relevance form


@dataclass
class Gradients:
    dW: np.ndarray
    dM: np.ndarray

    def add(self, other: "Gradients") -> None:
        self.dW += other.dW
        self.dM += other.dM

    def scale(self, a: float) -> None:
        self.dW *= a
        self.dM *= a


@dataclass
class AdaGradState:
    gW_sq: np.ndarray
    gM_sq: np.ndarray
    epsilon: float = ADAGRAD_EPSILON


def zero_gradients(config: ModelConfig) -> Gradients:
    return Gradients(
        dW=np.zeros((config.l, config.h * config.k)),
        dM=np.zeros((config.l, config.l)),
    )


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """Uniform [-0.1, 0.1] entries from a seeded generator (reproducible)."""
    rng = np.random.default_rng(seed)
    W = rng.uniform(-0.1, 0.1, size=(config.l, config.h * config.k))
    M = rng.uniform(-0.1, 0.1, size=(config.l, config.l))
    return ModelParams(W=W, M=M)


def init_adagrad(config: ModelConfig) -> AdaGradState:
    return AdaGradState(
        gW_sq=np.zeros((config.l, config.h * config.k)),
        gM_sq=np.zeros((config.l, config.l)),
    )


# ---------------------------------------------------------------------------
# Forward pass


@dataclass
class Encoding:
    """Cached forward state of one encoded token sequence.

    X stacks the h shifted column blocks so column t of X is the
    concatenated window starting at token t; keeping X and the feature map
    C around makes the backward pass a pair of matrix products.
    """

    X: np.ndarray  # (h*k) x T window matrix
    C: np.ndarray  # l x T feature map, already through tanh
    v: np.ndarray  # l pooled embedding
    argmax: np.ndarray  # l winning window index per row


def _windows(mat: np.ndarray, h: int) -> np.ndarray:
    width = mat.shape[1]
    T = width - h + 1
    return np.vstack([mat[:, j : j + T] for j in range(h)])


def encode_full(params: ModelParams, mat: np.ndarray, h: int) -> Encoding:
    X = _windows(mat, h)
    C = np.tanh(params.W @ X)
    v, argmax = max_over_time(C)
    return Encoding(X=X, C=C, v=v, argmax=argmax)


def encode(params: ModelParams, mat: np.ndarray, h: int) -> np.ndarray:
    """Sentence embedding: tanh convolution then max-over-time pooling."""
    return encode_full(params, mat, h).v


def _encode_backward(enc: Encoding, g_v: np.ndarray, gW: np.ndarray) -> None:
    # Max pooling routes each row's gradient to its winning window only;
    # tanh' at the pooled value is 1 - v^2.
    coef = g_v * (1.0 - enc.v**2)
    gW += coef[:, None] * enc.X[:, enc.argmax].T


def relevance(params: ModelParams, v_s: np.ndarray, v_q: np.ndarray) -> float:
    """Query relevance weight in (0, 1) via the bilinear form and sigmoid."""
    return sigmoid(bilinear(v_s, params.M, v_q))


def doc_embedding(
    params: ModelParams,
    sentence_embs: list[np.ndarray],
    v_q: np.ndarray,
    frozen_relevance: bool = False,
) -> tuple[np.ndarray, list[float]]:
    """Relevance-weighted sum of sentence embeddings.

    With frozen_relevance every weight is pinned at 0.5, which makes the
    pooled vector a positive multiple of the plain sum (used by the
    pooling-only baseline).
    """
    if not sentence_embs:
        raise ValueError("doc_embedding requires at least one sentence")
    if frozen_relevance:
        weights = [0.5] * len(sentence_embs)
    else:
        weights = [relevance(params, v, v_q) for v in sentence_embs]
    v_d = np.zeros_like(sentence_embs[0])
    for w, v in zip(weights, sentence_embs):
        v_d += w * v
    return v_d, weights


def rank_score(v_s: np.ndarray, v_d: np.ndarray) -> float:
    return cosine(v_s, v_d)


# ---------------------------------------------------------------------------
# Pairwise hinge loss and its hand-derived backward pass


def _check_pair(n: int, idx_pos: int, idx_neg: int) -> None:
    if idx_pos == idx_neg:
        raise ValueError("pair indices must differ")
    if not (0 <= idx_pos < n and 0 <= idx_neg < n):
        raise ValueError(f"pair indices ({idx_pos}, {idx_neg}) out of range for {n}")


def pair_loss(
    params: ModelParams,
    cluster_mats: list[np.ndarray],
    q_mat: np.ndarray,
    idx_pos: int,
    idx_neg: int,
    margin: float,
    h: int,
    frozen_relevance: bool = False,
) -> float:
    """Hinge max(0, margin - cos(d, s+) + cos(d, s-)) over the full cluster."""
    _check_pair(len(cluster_mats), idx_pos, idx_neg)
    embs = [encode(params, m, h) for m in cluster_mats]
    v_q = encode(params, q_mat, h)
    v_d, _ = doc_embedding(params, embs, v_q, frozen_relevance)
    cos_pos = cosine(embs[idx_pos], v_d)
    cos_neg = cosine(embs[idx_neg], v_d)
    return max(0.0, margin - cos_pos + cos_neg)


def pairs_backward(
    params: ModelParams,
    encodings: list[Encoding],
    q_enc: Encoding,
    pairs: list[tuple[int, int]],
    margin: float,
    config: ModelConfig,
    frozen_relevance: bool = False,
) -> tuple[list[float], Gradients]:
    """Losses and summed gradients for several pairs sharing one cluster.

    The document embedding is identical across the cluster's pairs, and
    every downstream quantity is linear in the upstream gradients, so the
    per-pair contributions to g_vd and the per-sentence direct terms can
    be accumulated before a single sweep through pooling, the bilinear
    form, and the encoder.
    """
    n = len(encodings)
    embs = [e.v for e in encodings]
    v_q = q_enc.v
    v_d, weights = doc_embedding(params, embs, v_q, frozen_relevance)

    losses: list[float] = []
    g_vd = np.zeros_like(v_d)
    g_vs = [np.zeros_like(v_d) for _ in range(n)]
    any_active = False

    for idx_pos, idx_neg in pairs:
        _check_pair(n, idx_pos, idx_neg)
        cos_pos = cosine(embs[idx_pos], v_d)
        cos_neg = cosine(embs[idx_neg], v_d)
        loss = margin - cos_pos + cos_neg
        if loss <= 0.0:
            losses.append(0.0)
            continue
        losses.append(loss)
        any_active = True
        # d loss / d cos_pos = -1, d loss / d cos_neg = +1
        gu, gd = cosine_grad(embs[idx_pos], v_d)
        g_vs[idx_pos] -= gu
        g_vd -= gd
        gu, gd = cosine_grad(embs[idx_neg], v_d)
        g_vs[idx_neg] += gu
        g_vd += gd

    grads = zero_gradients(config)
    if not any_active:
        return losses, grads

    g_vq = np.zeros_like(v_q)
    Mv_q = params.M @ v_q
    for i in range(n):
        # Pooling: v_d = sum_i w_i v_i touches every sentence.
        g_vi = g_vs[i] + weights[i] * g_vd
        if not frozen_relevance:
            g_wi = float(g_vd @ embs[i])
            g_zi = g_wi * weights[i] * (1.0 - weights[i])
            grads.dM += g_zi * np.outer(embs[i], v_q)
            g_vi = g_vi + g_zi * Mv_q
            g_vq += g_zi * (params.M.T @ embs[i])
        _encode_backward(encodings[i], g_vi, grads.dW)
    _encode_backward(q_enc, g_vq, grads.dW)
    return losses, grads


def pair_backward(
    params: ModelParams,
    cluster_mats: list[np.ndarray],
    q_mat: np.ndarray,
    idx_pos: int,
    idx_neg: int,
    margin: float,
    h: int,
    config: ModelConfig,
    frozen_relevance: bool = False,
) -> tuple[float, Gradients]:
    encodings = [encode_full(params, m, h) for m in cluster_mats]
    q_enc = encode_full(params, q_mat, h)
    losses, grads = pairs_backward(
        params, encodings, q_enc, [(idx_pos, idx_neg)], margin, config,
        frozen_relevance,
    )
    return losses[0], grads


def adagrad_step(
    params: ModelParams, state: AdaGradState, grads: Gradients, eta: float
) -> None:
    """In-place diagonal AdaGrad update: acc += g^2, step eta*g/sqrt(acc+eps)."""
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    state.gW_sq += grads.dW**2
    state.gM_sq += grads.dM**2
    params.W -= eta * grads.dW / np.sqrt(state.gW_sq + state.epsilon)
    params.M -= eta * grads.dM / np.sqrt(state.gM_sq + state.epsilon)


# ---------------------------------------------------------------------------
# Checkpoint serialization


def save_checkpoint(params: ModelParams, config: ModelConfig, path) -> Path:
    """JSON checkpoint; floats go through repr so round-trips are bit-exact."""
    path = Path(path)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "h": config.h,
        "k": config.k,
        "l": config.l,
        "W": [float(x) for x in params.W.ravel()],
        "M": [float(x) for x in params.M.ravel()],
    }
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def load_checkpoint(path) -> tuple[ModelParams, ModelConfig]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CheckpointError(f"cannot read {path}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"not an AttSum checkpoint: {path}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"not an AttSum checkpoint: {path}")
    try:
        config = ModelConfig(h=int(payload["h"]), k=int(payload["k"]), l=int(payload["l"]))
        W = np.array(payload["W"], dtype=float)
        M = np.array(payload["M"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    if W.size != config.l * config.h * config.k:
        raise CheckpointError(
            f"checkpoint {path}: W has {W.size} entries, "
            f"expected {config.l * config.h * config.k}"
        )
    if M.size != config.l * config.l:
        raise CheckpointError(
            f"checkpoint {path}: M has {M.size} entries, expected {config.l**2}"
        )
    params = ModelParams(
        W=W.reshape(config.l, config.h * config.k),
        M=M.reshape(config.l, config.l),
    )
    return params, config


# ---------------------------------------------------------------------------
# Flat parameter view (gradient checking)


def flatten_params(params: ModelParams) -> np.ndarray:
    return np.concatenate([params.W.ravel(), params.M.ravel()])


def unflatten_params(theta: np.ndarray, config: ModelConfig) -> ModelParams:
    nw = config.l * config.h * config.k
    return ModelParams(
        W=theta[:nw].reshape(config.l, config.h * config.k).copy(),
        M=theta[nw:].reshape(config.l, config.l).copy(),
    )


def coordinate_name(i: int, config: ModelConfig) -> str:
    nw = config.l * config.h * config.k
    if i < nw:
        return f"W[{i // (config.h * config.k)},{i % (config.h * config.k)}]"
    j = i - nw
    return f"M[{j // config.l},{j % config.l}]"


# ---------------------------------------------------------------------------
# Randomized gradient verification


@dataclass(frozen=True)
class GradCheckTrials:
    trials: int
    resampled: int
    max_rel_error: float
    worst_parameter: str
    worst_trial: int
    passed: bool


@dataclass(frozen=True)
class _PairInstance:
    config: ModelConfig
    params: ModelParams
    mats: list
    q_mat: np.ndarray
    idx_pos: int
    idx_neg: int


def _random_mat(rng: np.random.Generator, k: int, h: int) -> np.ndarray:
    n_tok = int(rng.integers(1, 8))
    width = max(n_tok, h)
    mat = rng.normal(size=(k, width))
    if n_tok < width:
        mat[:, n_tok:] = 0.0
    return mat


def _random_pair_instance(rng: np.random.Generator) -> _PairInstance:
    k = int(rng.integers(2, 7))
    l = int(rng.integers(2, 7))
    config = ModelConfig(h=2, k=k, l=l)
    n = int(rng.integers(2, 6))
    mats = [_random_mat(rng, k, config.h) for _ in range(n)]
    q_mat = _random_mat(rng, k, config.h)
    params = ModelParams(
        W=rng.uniform(-0.5, 0.5, size=(l, config.h * k)),
        M=rng.uniform(-0.5, 0.5, size=(l, l)),
    )
    pick = rng.choice(n, size=2, replace=False)
    return _PairInstance(config, params, mats, q_mat, int(pick[0]), int(pick[1]))


def _instance_differentiable(inst: _PairInstance, margin: float) -> bool:
    """Reject instances sitting on a non-smooth point.

    Finite differences are meaningless at max-pool ties, near-zero norms
    (cosine convention switch), and at or near the hinge kink, so such
    draws are resampled rather than checked.
    """
    encs = [encode_full(inst.params, m, inst.config.h) for m in inst.mats]
    q_enc = encode_full(inst.params, inst.q_mat, inst.config.h)
    for enc in encs + [q_enc]:
        if enc.C.shape[1] >= 2:
            top_two = np.partition(enc.C, -2, axis=1)[:, -2:]
            if np.any(top_two[:, 1] - top_two[:, 0] < 1e-6):
                return False
        if np.linalg.norm(enc.v) < 1e-3:
            return False
    embs = [e.v for e in encs]
    v_d, _ = doc_embedding(inst.params, embs, q_enc.v)
    if np.linalg.norm(v_d) < 1e-3:
        return False
    loss = margin - cosine(embs[inst.idx_pos], v_d) + cosine(embs[inst.idx_neg], v_d)
    return loss >= 1e-3


def check_instance(inst: _PairInstance, epsilon: float, threshold: float, margin: float) -> GradCheckReport:
    def loss_fn(theta: np.ndarray):
        p = unflatten_params(theta, inst.config)
        loss, grads = pair_backward(
            p, inst.mats, inst.q_mat, inst.idx_pos, inst.idx_neg, margin,
            inst.config.h, inst.config,
        )
        return loss, np.concatenate([grads.dW.ravel(), grads.dM.ravel()])

    return grad_check(
        loss_fn,
        flatten_params(inst.params),
        epsilon=epsilon,
        threshold=threshold,
        names=lambda i: coordinate_name(i, inst.config),
    )


def run_gradient_check(
    seed: int = 0,
    trials: int = 200,
    epsilon: float = 1e-5,
    threshold: float = 1e-4,
    margin: float = 0.5,
) -> GradCheckTrials:
    """Verify the analytic pair gradient on random tiny instances."""
    rng = np.random.default_rng(seed)
    resampled = 0
    max_err = 0.0
    worst = ""
    worst_trial = -1
    for t in range(trials):
        inst = _random_pair_instance(rng)
        while not _instance_differentiable(inst, margin):
            resampled += 1
            inst = _random_pair_instance(rng)
        report = check_instance(inst, epsilon, threshold, margin)
        if report.max_rel_error > max_err:
            max_err = report.max_rel_error
            worst = report.worst_parameter
            worst_trial = t
    return GradCheckTrials(
        trials=trials,
        resampled=resampled,
        max_rel_error=max_err,
        worst_parameter=worst,
        worst_trial=worst_trial,
        passed=max_err < threshold,
    )
