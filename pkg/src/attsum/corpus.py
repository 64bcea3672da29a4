"""Domain model and ingestion for document clusters.

On-disk layout of a cluster directory (UTF-8 plain text):

    <cluster_id>/query.txt          query text, one or more sentences
    <cluster_id>/docs/<doc_id>.txt  one document per file (required, >= 1)
    <cluster_id>/refs/<ref_id>.txt  one reference summary per file (optional)

A corpus is a directory of such cluster directories.

Tokenization rules (deterministic, applied everywhere downstream):

1. Text is split on Unicode whitespace into chunks.
2. Leading punctuation characters (Unicode category P*) are peeled off a
   chunk one at a time, each becoming its own token.
3. Trailing punctuation is peeled the same way, except that a final "."
   stays attached when the remaining core contains another "." (so
   abbreviations like "U.S." survive as one token).
4. ``normalized`` is the lowercased surface; matching, embeddings, ROUGE
   and bigram counting all operate on ``normalized``.

Sentence splitting: a sentence ends at ".", "!" or "?" followed by
whitespace and then an uppercase letter or digit, unless the chunk ending
at the terminator is on the abbreviation guard list below.  Within a
document file, line breaks are hard sentence boundaries.

A token counts as a *word* when its normalized form contains at least one
letter or digit; punctuation-only tokens never count toward word budgets
or the minimum-length selection filter.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from attsum.errors import CorpusError

# Chunks ending in these (lowercased, leading punctuation stripped) never
# terminate a sentence.
ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "rev.", "hon.", "st.", "jr.", "sr.",
    "gen.", "sen.", "rep.", "gov.", "capt.", "lt.", "col.", "sgt.", "maj.",
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "al.", "inc.", "ltd.", "co.",
    "corp.", "dept.", "est.", "no.", "u.s.", "u.k.", "u.n.", "a.m.", "p.m.",
    "ph.d.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
    "sept.", "oct.", "nov.", "dec.", "mon.", "tue.", "wed.", "thu.", "fri.",
    "sat.", "sun.", "fig.", "vol.", "ed.", "pp.",
})

_TERMINATORS = frozenset(".!?")


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]
    doc_id: str
    position: int
    text: str  # original surface text, internal whitespace collapsed


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Query:
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class Cluster:
    id: str
    documents: tuple[Document, ...]
    query: Query
    references: tuple[tuple[Token, ...], ...] = field(default_factory=tuple)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def is_word(normalized: str) -> bool:
    """True when the token counts toward word budgets (has a letter or digit)."""
    return any(ch.isalnum() for ch in normalized)


def count_words(tokens) -> int:
    return sum(1 for t in tokens if is_word(t.normalized))


def _make_token(surface: str) -> Token:
    return Token(surface=surface, normalized=surface.lower())


def tokenize(text: str) -> list[Token]:
    """Split text into tokens per the module rules; empty input yields []."""
    tokens: list[Token] = []
    for chunk in text.split():
        lead: list[str] = []
        while chunk and _is_punct(chunk[0]):
            lead.append(chunk[0])
            chunk = chunk[1:]
        tail: list[str] = []
        while chunk and _is_punct(chunk[-1]):
            # Abbreviation guard: keep a final "." on cores like "u.s".
            if chunk[-1] == "." and "." in chunk[:-1]:
                break
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(_make_token(ch) for ch in lead)
        if chunk:
            tokens.append(_make_token(chunk))
        tokens.extend(_make_token(ch) for ch in reversed(tail))
    return tokens


def _chunk_before(text: str, end: int) -> str:
    """Whitespace-delimited chunk ending at text[end] inclusive."""
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    chunk = text[start : end + 1].lower()
    while chunk and _is_punct(chunk[0]):
        chunk = chunk[1:]
    return chunk


def split_sentences(text: str) -> list[str]:
    """Split a text block into sentence strings.

    A split point is a terminator (".", "!", "?") followed by whitespace
    and an uppercase letter or digit, provided the chunk ending at the
    terminator is not a guarded abbreviation.
    """
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS and i + 1 < n and text[i + 1].isspace():
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            if j < n and (text[j].isupper() or text[j].isdigit()):
                if ch != "." or _chunk_before(text, i) not in ABBREVIATIONS:
                    piece = text[start : i + 1].strip()
                    if piece:
                        sentences.append(piece)
                    start = j
                    i = j
                    continue
        i += 1
    piece = text[start:].strip()
    if piece:
        sentences.append(piece)
    return sentences


def _split_document(text: str) -> list[str]:
    # Line breaks are hard boundaries; terminator rules apply within a line.
    out: list[str] = []
    for line in text.splitlines():
        out.extend(split_sentences(line))
    return out


def _read_text(path: Path) -> str:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(
            f"{path} is not valid UTF-8 at byte offset {exc.start}"
        ) from exc


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def load_cluster(path: str | Path) -> Cluster:
    """Load one cluster directory.

    References are optional; a missing or empty ``refs/`` directory yields
    a cluster usable for summarization but not for training or evaluation.
    """
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"cluster directory not found: {root}")

    query_path = root / "query.txt"
    if not query_path.is_file():
        raise CorpusError(f"missing query: {query_path}")
    query_tokens = tokenize(_read_text(query_path))
    if not query_tokens:
        raise CorpusError(f"empty query: {query_path}")

    docs_dir = root / "docs"
    doc_files = sorted(docs_dir.glob("*.txt")) if docs_dir.is_dir() else []
    if not doc_files:
        raise CorpusError(f"no documents in {docs_dir}")

    documents: list[Document] = []
    for doc_file in doc_files:
        doc_id = doc_file.stem
        sentences: list[Sentence] = []
        for pos, raw in enumerate(_split_document(_read_text(doc_file))):
            tokens = tokenize(raw)
            if not tokens:
                continue
            sentences.append(
                Sentence(
                    id=f"{doc_id}:{len(sentences)}",
                    tokens=tuple(tokens),
                    doc_id=doc_id,
                    position=len(sentences),
                    text=_collapse_ws(raw),
                )
            )
        documents.append(Document(id=doc_id, sentences=tuple(sentences)))

    references: list[tuple[Token, ...]] = []
    refs_dir = root / "refs"
    if refs_dir.is_dir():
        for ref_file in sorted(refs_dir.glob("*.txt")):
            ref_tokens = tokenize(_read_text(ref_file))
            if ref_tokens:
                references.append(tuple(ref_tokens))

    return Cluster(
        id=root.name,
        documents=tuple(documents),
        query=Query(tokens=tuple(query_tokens)),
        references=tuple(references),
    )


def load_corpus(path: str | Path) -> list[Cluster]:
    """Load every cluster directory under ``path``, sorted by name."""
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"corpus directory not found: {root}")
    dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not dirs:
        raise CorpusError(f"no cluster directories in {root}")
    return [load_cluster(p) for p in dirs]


def save_cluster(cluster: Cluster, path: str | Path) -> Path:
    """Write a cluster back to the directory format (round-trip safe).

    Documents are written one sentence per line; references one per file.
    Reloading yields token-identical structures.
    """
    root = Path(path)
    (root / "docs").mkdir(parents=True, exist_ok=True)
    (root / "query.txt").write_text(
        " ".join(t.surface for t in cluster.query.tokens) + "\n", encoding="utf-8"
    )
    for doc in cluster.documents:
        lines = [s.text for s in doc.sentences]
        (root / "docs" / f"{doc.id}.txt").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
    if cluster.references:
        refs_dir = root / "refs"
        refs_dir.mkdir(exist_ok=True)
        for i, ref in enumerate(cluster.references):
            (refs_dir / f"ref{i:02d}.txt").write_text(
                " ".join(t.surface for t in ref) + "\n", encoding="utf-8"
            )
    return root


def compile_cluster(cluster: Cluster) -> list[Sentence]:
    """All sentences of the cluster in document order, then position order."""
    out: list[Sentence] = []
    for doc in cluster.documents:
        out.extend(doc.sentences)
    return out
