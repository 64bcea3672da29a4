"""Frozen word-embedding table and sentence matrix assembly.

File format: plain text, one word per line as "word c1 c2 ... ck" with
space-separated decimal floats.  An optional first line "<count> <dim>"
(two bare integers) is skipped.  Duplicate words keep the first
occurrence.  Lookup is by the token's normalized form; out-of-vocabulary
tokens map to the zero vector, so they contribute nothing to convolution
sums and inference stays deterministic.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from attsum.corpus import Token
from attsum.errors import EmbeddingError


class EmbeddingTable:
    """Immutable word -> vector map with dimension ``dim``."""

    def __init__(self, dim: int, entries: dict[str, np.ndarray]):
        self.dim = dim
        self._entries = entries
        self._zero = np.zeros(dim)
        self._zero.flags.writeable = False

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    def lookup(self, token: Token) -> np.ndarray:
        """Vector for the token's normalized form; zeros when unknown."""
        vec = self._entries.get(token.normalized)
        return vec if vec is not None else self._zero

    def lookup_word(self, normalized: str) -> np.ndarray:
        vec = self._entries.get(normalized)
        return vec if vec is not None else self._zero


def load_embeddings(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise EmbeddingError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise EmbeddingError(f"{path} is not valid UTF-8") from exc

    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    start = 0

    # Optional "<count> <dim>" header: exactly two integer fields.
    if lines:
        fields = lines[0].split()
        if len(fields) == 2:
            try:
                int(fields[0]), int(fields[1])
                start = 1
            except ValueError:
                pass

    for lineno, line in enumerate(lines[start:], start=start + 1):
        fields = line.split()
        if not fields:
            continue
        word, comps = fields[0], fields[1:]
        if not comps:
            raise EmbeddingError(f"{path}:{lineno}: no vector components")
        try:
            vec = np.array([float(c) for c in comps])
        except ValueError as exc:
            raise EmbeddingError(
                f"{path}:{lineno}: non-numeric vector component"
            ) from exc
        if dim is None:
            dim = len(comps)
        elif len(comps) != dim:
            raise EmbeddingError(
                f"{path}:{lineno}: expected {dim} components, got {len(comps)}"
            )
        if word not in entries:
            vec.flags.writeable = False
            entries[word] = vec

    if dim is None:
        raise EmbeddingError(f"{path}: no embedding entries")
    return EmbeddingTable(dim=dim, entries=entries)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> Path:
    """Write a table in the text format (with header line)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for word, vec in table._entries.items():
            comps = " ".join(repr(float(c)) for c in vec)
            fh.write(f"{word} {comps}\n")
    return path


def sentence_matrix(table: EmbeddingTable, tokens, h: int) -> np.ndarray:
    """Stack token vectors as columns, zero-padded right to width max(n, h).

    Padding guarantees at least one convolution window of size h exists.
    """
    if h < 1:
        raise ValueError(f"window size must be >= 1, got {h}")
    n = len(tokens)
    width = max(n, h)
    mat = np.zeros((table.dim, width))
    for i, tok in enumerate(tokens):
        mat[:, i] = table.lookup(tok)
    return mat
