"""End-to-end runs of every subcommand through cli.main."""

import json
from pathlib import Path

import pytest

from attsum import cli, model
from attsum.model import init_params

from conftest import make_cluster_dir, make_embedding_file

TRAINABLE_DOC = (
    "Alpha beta alpha beta alpha beta alpha beta.\n"
    "Beta alpha beta alpha beta alpha beta alpha.\n"
    "Gamma gamma gamma gamma gamma gamma gamma gamma.\n"
    "Gamma gamma gamma alpha gamma gamma gamma gamma.\n"
    "Gamma beta gamma gamma gamma gamma gamma gamma.\n"
    "Gamma gamma gamma gamma gamma gamma beta gamma."
)
REF = "alpha beta alpha beta alpha beta alpha beta"


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Corpus, embeddings, and a trained checkpoint shared by the tests."""
    root = tmp_path_factory.mktemp("cli")
    cluster_dir = make_cluster_dir(
        root / "corpus", "train-0", "alpha beta outcomes",
        {"d": TRAINABLE_DOC}, refs=[REF],
    )
    emb = make_embedding_file(
        root / "emb.txt",
        {"alpha": [1.0, 0.1, 0.0], "beta": [0.9, 0.2, 0.1], "gamma": [-1.0, 0.5, -0.3]},
    )
    ckpt = root / "model.json"
    code = cli.main([
        "train", "--corpus", str(root / "corpus"), "--embeddings", str(emb),
        "--out", str(ckpt), "--epochs", "2", "--batch", "4", "--l", "4",
    ])
    assert code == 0
    return {"root": root, "corpus": root / "corpus", "cluster": cluster_dir,
            "emb": emb, "ckpt": ckpt}


class TestUsageErrors:
    def test_help_exits_zero(self, capsys):
        assert cli.main(["--help"]) == 0
        assert "train" in capsys.readouterr().out

    def test_version_exits_zero(self, capsys):
        assert cli.main(["--version"]) == 0

    def test_missing_subcommand(self, capsys):
        assert cli.main([]) == 1

    def test_unknown_flag(self, capsys):
        assert cli.main(["gradcheck", "--bogus"]) == 1

    def test_missing_required_flag(self, capsys):
        assert cli.main(["summarize", "--out", "x"]) == 1

    def test_bad_method_choice(self, workspace, capsys):
        code = cli.main([
            "baseline", "--method", "centroid",
            "--cluster", str(workspace["cluster"]), "--out", "x",
        ])
        assert code == 1

    def test_bad_hyperparameter(self, workspace, capsys):
        code = cli.main([
            "train", "--corpus", str(workspace["corpus"]),
            "--embeddings", str(workspace["emb"]),
            "--out", str(workspace["root"] / "bad.json"), "--eta", "0",
        ])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestTrain:
    def test_writes_all_outputs(self, workspace):
        ckpt = workspace["ckpt"]
        assert ckpt.is_file()
        assert Path(f"{ckpt}.log").is_file()
        assert Path(f"{ckpt}.loss.png").is_file()
        manifest = json.loads(Path(f"{ckpt}.manifest.json").read_text(encoding="utf-8"))
        assert manifest["command"] == "train"
        assert manifest["config"]["epochs"] == 2
        assert manifest["config"]["k"] == 3

    def test_log_has_one_line_per_epoch(self, workspace):
        log = Path(f"{workspace['ckpt']}.log").read_text(encoding="utf-8")
        lines = log.strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("epoch 1 mean_loss ")

    def test_checkpoint_loads(self, workspace):
        params, config = model.load_checkpoint(workspace["ckpt"])
        assert params.W.shape == (4, 6)  # l=4, h*k=6
        assert params.M.shape == (4, 4)

    def test_deterministic_rerun(self, workspace, tmp_path):
        out = tmp_path / "again.json"
        code = cli.main([
            "train", "--corpus", str(workspace["corpus"]),
            "--embeddings", str(workspace["emb"]),
            "--out", str(out), "--epochs", "2", "--batch", "4", "--l", "4",
        ])
        assert code == 0
        assert out.read_bytes() == workspace["ckpt"].read_bytes()
        assert Path(f"{out}.log").read_bytes() == Path(
            f"{workspace['ckpt']}.log"
        ).read_bytes()

    def test_zero_epochs_keeps_initial_params(self, workspace, tmp_path):
        out = tmp_path / "init.json"
        code = cli.main([
            "train", "--corpus", str(workspace["corpus"]),
            "--embeddings", str(workspace["emb"]),
            "--out", str(out), "--epochs", "0", "--l", "4", "--seed", "5",
        ])
        assert code == 0
        params, config = model.load_checkpoint(out)
        init = init_params(config, 5)
        assert (params.W == init.W).all() and (params.M == init.M).all()

    def test_missing_corpus_is_data_error(self, workspace, tmp_path, capsys):
        code = cli.main([
            "train", "--corpus", str(tmp_path / "nope"),
            "--embeddings", str(workspace["emb"]), "--out", str(tmp_path / "x"),
        ])
        assert code == 2
        assert "error" in capsys.readouterr().err


class TestSummarize:
    def test_writes_summary_and_manifest(self, workspace, tmp_path, capsys):
        out = tmp_path / "sum.txt"
        code = cli.main([
            "summarize", "--model", str(workspace["ckpt"]),
            "--embeddings", str(workspace["emb"]),
            "--cluster", str(workspace["cluster"]), "--out", str(out),
        ])
        assert code == 0
        assert out.is_file()
        assert Path(f"{out}.manifest.json").is_file()
        assert capsys.readouterr().out.startswith("wrote")

    def test_word_limit_respected(self, workspace, tmp_path):
        out = tmp_path / "sum.txt"
        code = cli.main([
            "summarize", "--model", str(workspace["ckpt"]),
            "--embeddings", str(workspace["emb"]),
            "--cluster", str(workspace["cluster"]), "--out", str(out),
            "--limit", "10",
        ])
        assert code == 0
        from attsum.pipeline import read_summary_tokens
        from attsum.corpus import is_word

        words = [t for t in read_summary_tokens(out) if is_word(t.normalized)]
        assert len(words) <= 10

    def test_missing_model_is_data_error(self, workspace, tmp_path, capsys):
        code = cli.main([
            "summarize", "--model", str(tmp_path / "missing.json"),
            "--embeddings", str(workspace["emb"]),
            "--cluster", str(workspace["cluster"]), "--out", str(tmp_path / "x"),
        ])
        assert code == 2

    def test_dim_mismatch_is_data_error(self, workspace, tmp_path, capsys):
        emb2 = make_embedding_file(tmp_path / "e2.txt", {"alpha": [1.0, 0.0]})
        code = cli.main([
            "summarize", "--model", str(workspace["ckpt"]),
            "--embeddings", str(emb2),
            "--cluster", str(workspace["cluster"]), "--out", str(tmp_path / "x"),
        ])
        assert code == 2
        assert "dim" in capsys.readouterr().err


class TestEvaluate:
    def test_report_and_chart(self, workspace, tmp_path, capsys):
        sums = tmp_path / "sums"
        sums.mkdir()
        (sums / "train-0.sum.txt").write_text(
            "Alpha beta alpha beta alpha beta alpha beta.\n", encoding="utf-8"
        )
        out = tmp_path / "report.tsv"
        code = cli.main([
            "evaluate", "--corpus", str(workspace["corpus"]),
            "--summaries", str(sums), "--out", str(out),
        ])
        assert code == 0
        text = out.read_text(encoding="utf-8")
        assert text.startswith("cluster_id\tROUGE-1\tROUGE-2")
        assert "train-0\t100.00\t100.00" in text
        assert Path(f"{out}.png").is_file()
        assert Path(f"{out}.manifest.json").is_file()
        assert "train-0\t100.00\t100.00" in capsys.readouterr().out

    def test_missing_summaries_dir_is_data_error(self, workspace, tmp_path, capsys):
        code = cli.main([
            "evaluate", "--corpus", str(workspace["corpus"]),
            "--summaries", str(tmp_path / "nope"), "--out", str(tmp_path / "r.tsv"),
        ])
        assert code == 2


class TestBaseline:
    def test_lead_and_querysim(self, workspace, tmp_path):
        for method in ("lead", "querysim"):
            out = tmp_path / f"{method}.txt"
            code = cli.main([
                "baseline", "--method", method,
                "--cluster", str(workspace["cluster"]), "--out", str(out),
            ])
            assert code == 0
            assert out.is_file()
            assert Path(f"{out}.manifest.json").is_file()

    def test_isolation_requires_model_flags(self, workspace, tmp_path, capsys):
        code = cli.main([
            "baseline", "--method", "isolation",
            "--cluster", str(workspace["cluster"]), "--out", str(tmp_path / "x"),
        ])
        assert code == 1
        assert "isolation" in capsys.readouterr().err

    def test_isolation_with_frozen_model(self, workspace, tmp_path):
        ckpt = tmp_path / "frozen.json"
        code = cli.main([
            "train", "--corpus", str(workspace["corpus"]),
            "--embeddings", str(workspace["emb"]),
            "--out", str(ckpt), "--epochs", "1", "--batch", "4", "--l", "4",
            "--frozen-relevance",
        ])
        assert code == 0
        out = tmp_path / "iso.txt"
        code = cli.main([
            "baseline", "--method", "isolation",
            "--cluster", str(workspace["cluster"]), "--out", str(out),
            "--model", str(ckpt), "--embeddings", str(workspace["emb"]),
        ])
        assert code == 0
        assert out.is_file()


class TestGradcheck:
    def test_pass_run(self, capsys):
        code = cli.main(["gradcheck", "--trials", "5", "--seed", "101"])
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS" in out
        assert "max_rel_error" in out

    def test_unreachable_threshold_fails(self, capsys):
        code = cli.main([
            "gradcheck", "--trials", "3", "--seed", "101", "--threshold", "1e-15",
        ])
        assert code == 3
        assert "FAIL" in capsys.readouterr().out


class TestLabel:
    def test_writes_tsv(self, workspace, tmp_path, capsys):
        out = tmp_path / "labels.tsv"
        code = cli.main([
            "label", "--cluster", str(workspace["cluster"]), "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text(encoding="utf-8").strip().splitlines()
        assert lines[0] == "sentence_id\trouge2\ttext"
        assert lines[1].startswith("d:0\t1.000000\t")
        assert len(lines) == 7  # header + six sentences
        assert Path(f"{out}.manifest.json").is_file()

    def test_no_references_is_data_error(self, tmp_path, capsys):
        cdir = make_cluster_dir(tmp_path, "bare", "q?", {"d": "Hello there."})
        code = cli.main(["label", "--cluster", str(cdir), "--out", str(tmp_path / "x")])
        assert code == 2
