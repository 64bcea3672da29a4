"""Command-line interface.

Subcommands: train, summarize, evaluate, baseline, gradcheck, label.
Every subcommand that writes an output file also writes a
``<out>.manifest.json`` recording the command, resolved configuration,
and input paths, so a run can be reproduced exactly.

Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 internal
invariant failure (including a failed gradient check).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from attsum import __version__, model, pipeline, plots, rouge
from attsum.corpus import load_cluster, load_corpus
from attsum.embed import load_embeddings
from attsum.errors import AttsumError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; this tool reserves 2 for data
    # errors, so usage problems exit 1 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_manifest(out: Path, command: str, inputs: dict, config: dict) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "config": config,
    }
    Path(f"{out}.manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    table = load_embeddings(args.embeddings)
    try:
        config = model.ModelConfig(h=args.h, k=table.dim, l=args.l)
        tc = pipeline.TrainConfig(
            margin=args.margin,
            eta=args.eta,
            batch_size=args.batch,
            epochs=args.epochs,
            seed=args.seed,
            pos_quantile=args.pos_q,
            neg_quantile=args.neg_q,
            cluster_cap=args.cluster_cap,
            frozen_relevance=args.frozen_relevance,
        )
    except ValueError as exc:
        print(f"attsum train: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    result = pipeline.train(corpus, table, config, tc)
    out = Path(args.out)
    model.save_checkpoint(result.params, config, out)
    Path(f"{out}.log").write_text(
        pipeline.format_epoch_log(result.history), encoding="utf-8"
    )
    plots.loss_curve(result.history, f"{out}.loss.png")
    _write_manifest(
        out,
        "train",
        {"corpus": str(args.corpus), "embeddings": str(args.embeddings)},
        {
            "epochs": tc.epochs,
            "eta": tc.eta,
            "batch": tc.batch_size,
            "margin": tc.margin,
            "h": config.h,
            "k": config.k,
            "l": config.l,
            "seed": tc.seed,
            "pos_q": tc.pos_quantile,
            "neg_q": tc.neg_quantile,
            "cluster_cap": tc.cluster_cap,
            "frozen_relevance": tc.frozen_relevance,
        },
    )
    print(f"wrote checkpoint {out}")
    return EXIT_OK


def _load_model_and_table(model_path, embeddings_path):
    params, config = model.load_checkpoint(model_path)
    table = load_embeddings(embeddings_path)
    if config.k != table.dim:
        raise AttsumError(
            f"checkpoint expects word dim {config.k}, "
            f"embedding table has {table.dim}"
        )
    return params, config, table


def _cmd_summarize(args) -> int:
    params, config, table = _load_model_and_table(args.model, args.embeddings)
    cluster = load_cluster(args.cluster)
    summary = pipeline.summarize_cluster(
        params, config, table, cluster,
        word_limit=args.limit, min_words=args.min_words, ratio_cutoff=args.ratio,
    )
    out = Path(args.out)
    pipeline.write_summary(summary, out)
    _write_manifest(
        out,
        "summarize",
        {"model": str(args.model), "embeddings": str(args.embeddings),
         "cluster": str(args.cluster)},
        {"limit": args.limit, "min_words": args.min_words, "ratio": args.ratio},
    )
    print(f"wrote {out} ({summary.total_words} words, {len(summary.lines)} sentences)")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    corpus = load_corpus(args.corpus)
    report = pipeline.evaluate(corpus, args.summaries, jobs=args.jobs)
    out = Path(args.out)
    out.write_text(report.to_tsv(), encoding="utf-8")
    plots.report_chart(report, f"{out}.png")
    _write_manifest(
        out,
        "evaluate",
        {"corpus": str(args.corpus), "summaries": str(args.summaries)},
        {"jobs": args.jobs, "truncate": pipeline.WORD_LIMIT},
    )
    sys.stdout.write(report.to_tsv())
    return EXIT_OK


def _cmd_baseline(args) -> int:
    cluster = load_cluster(args.cluster)
    params = config = table = None
    if args.method == pipeline.ISOLATION:
        if not args.model or not args.embeddings:
            print(
                "attsum baseline: error: --method isolation requires "
                "--model and --embeddings",
                file=sys.stderr,
            )
            return EXIT_USAGE
        params, config, table = _load_model_and_table(args.model, args.embeddings)
    summary = pipeline.run_baseline(
        args.method, cluster, params=params, config=config, table=table, lam=args.lam
    )
    out = Path(args.out)
    pipeline.write_summary(summary, out)
    _write_manifest(
        out,
        "baseline",
        {"cluster": str(args.cluster), "model": str(args.model) if args.model else None,
         "embeddings": str(args.embeddings) if args.embeddings else None},
        {"method": args.method, "lambda": args.lam},
    )
    print(f"wrote {out} ({summary.total_words} words, {len(summary.lines)} sentences)")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    result = model.run_gradient_check(
        seed=args.seed, trials=args.trials, epsilon=args.eps, threshold=args.threshold
    )
    print(
        f"gradcheck trials {result.trials} resampled {result.resampled} "
        f"max_rel_error {result.max_rel_error:.3e} "
        f"worst {result.worst_parameter} (trial {result.worst_trial})"
    )
    print("PASS" if result.passed else "FAIL")
    return EXIT_OK if result.passed else EXIT_INTERNAL


def _cmd_label(args) -> int:
    cluster = load_cluster(args.cluster)
    labeled = rouge.label_sentences(cluster, n=2)
    lines = ["sentence_id\trouge2\ttext"]
    lines += [f"{s.id}\t{score.recall:.6f}\t{s.text}" for s, score in labeled]
    out = Path(args.out)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_manifest(out, "label", {"cluster": str(args.cluster)}, {"n": 2})
    print(f"wrote {out} ({len(labeled)} sentences)")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="attsum", description="query-focused extractive summarizer")
    parser.add_argument("--version", action="version", version=f"attsum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a ranking model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--l", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pos-q", type=float, default=0.25)
    p.add_argument("--neg-q", type=float, default=0.25)
    p.add_argument("--cluster-cap", type=int, default=1000)
    p.add_argument(
        "--frozen-relevance",
        action="store_true",
        help="pin pooling weights at 0.5 (for the isolation baseline model)",
    )
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("summarize", help="summarize one cluster")
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--cluster", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--limit", type=int, default=pipeline.WORD_LIMIT)
    p.add_argument("--min-words", type=int, default=pipeline.MIN_WORDS)
    p.add_argument("--ratio", type=float, default=pipeline.RATIO_CUTOFF)
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("evaluate", help="score summaries against references")
    p.add_argument("--corpus", required=True)
    p.add_argument("--summaries", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("baseline", help="run a baseline summarizer")
    p.add_argument("--method", required=True, choices=list(pipeline.BASELINES))
    p.add_argument("--cluster", required=True)
    p.add_argument("--model")
    p.add_argument("--embeddings")
    p.add_argument("--lambda", type=float, default=1.0, dest="lam")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("gradcheck", help="verify analytic gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("label", help="dump per-sentence training labels")
    p.add_argument("--cluster", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_label)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except AttsumError as exc:
        print(f"attsum: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"attsum: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
