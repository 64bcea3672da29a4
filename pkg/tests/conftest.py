"""Shared builders for on-disk fixtures."""

from pathlib import Path

import pytest


def make_cluster_dir(
    root: Path,
    cluster_id: str,
    query: str,
    docs: dict[str, str],
    refs: list[str] | None = None,
) -> Path:
    """Lay out one cluster directory: query.txt, docs/, optional refs/."""
    cdir = root / cluster_id
    (cdir / "docs").mkdir(parents=True)
    (cdir / "query.txt").write_text(query, encoding="utf-8")
    for doc_id, text in docs.items():
        (cdir / "docs" / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    if refs:
        (cdir / "refs").mkdir()
        for i, text in enumerate(refs):
            (cdir / "refs" / f"ref{i:02d}.txt").write_text(text, encoding="utf-8")
    return cdir


def make_embedding_file(
    path: Path, entries: dict[str, list[float]], header: bool = False
) -> Path:
    lines = []
    if header:
        dim = len(next(iter(entries.values())))
        lines.append(f"{len(entries)} {dim}")
    for word, vec in entries.items():
        lines.append(word + " " + " ".join(str(c) for c in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def toy_cluster_dir(tmp_path: Path) -> Path:
    """Small two-document cluster with two references."""
    return make_cluster_dir(
        tmp_path,
        "toy-00",
        "How did the drug trial affect patients?",
        {
            "a": (
                "The drug trial improved patient outcomes across the board.\n"
                "Researchers praised the methodology of the drug trial.\n"
                "Unrelated sports news filled the evening broadcast."
            ),
            "b": (
                "Patients reported fewer side effects during the drug trial.\n"
                "The stadium roared as the home team scored again."
            ),
        },
        refs=[
            "The drug trial improved patient outcomes and reduced side effects.",
            "Patients in the drug trial reported fewer side effects overall.",
        ],
    )
