"""Command line entry point: the full pipeline as subcommands.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import compression, corpus as corpus_mod, embeddings, grid as grid_mod
from . import spectral, wordpiece
from .errors import DataError, NumericError
from .manifest import RunManifest

EXIT_DATA = 3
EXIT_NUMERIC = 4


def _load_corpus_arg(path: str, language: str | None) -> corpus_mod.Corpus:
    lang = language or Path(path).stem
    return corpus_mod.load_corpus(path, lang)


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError as e:
        raise DataError(f"bad size list {text!r}: {e}") from e


def _format_selected(selected) -> str:
    return "  ".join(f"{n}_{r:g}" for n, r in selected)


def cmd_curve(args) -> int:
    if args.k < 2:
        print("usage error: --k must be >= 2 (the regression needs data)",
              file=sys.stderr)
        return 2
    manifest = RunManifest(command="curve", seed=args.seed, config={
        "corpus": args.corpus, "language": args.language, "k": args.k,
        "n_max": args.n_max, "seed": args.seed, "min_frequency": args.min_frequency,
    })
    manifest.add_input(args.corpus)
    c = _load_corpus_arg(args.corpus, args.language)
    analyzer = compression.CompressionAnalyzer(c, min_frequency=args.min_frequency)
    with manifest.time_stage("curve"):
        curve = analyzer.build_curve(k=args.k, n_max=args.n_max, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    compression.save_curve(curve, out / "curve.json")
    manifest.write(out)
    print(f"language: {curve.language_id}")
    print(f"n_min: {curve.n_min}  a: {curve.asymptote_a:.4f}  beta: {curve.beta:.4f}")
    print(f"selected: {_format_selected(curve.selected)}")
    return 0


def cmd_select_sizes(args) -> int:
    curve = compression.load_curve(args.curve)
    selected = compression.select_sizes(curve, floor_r=args.floor_r)
    print(_format_selected(selected))
    return 0


def cmd_train_tokenizer(args) -> int:
    manifest = RunManifest(command="train-tokenizer", config={
        "corpus": args.corpus, "language": args.language, "size": args.size,
        "min_frequency": args.min_frequency,
    })
    manifest.add_input(args.corpus)
    c = _load_corpus_arg(args.corpus, args.language)
    vocab = wordpiece.train(c, args.size, min_frequency=args.min_frequency)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    wordpiece.save_vocab(vocab, out)
    manifest.write(out.parent)
    print(f"trained vocabulary of {len(vocab)} tokens -> {out}")
    return 0


def _fixture_vocab() -> wordpiece.Vocabulary:
    ref = resources.files("vocabcompat.data") / "bert_example_vocab.txt"
    with resources.as_file(ref) as path:
        return wordpiece.load_vocab(path)


def cmd_tokenize(args) -> int:
    if args.fixture:
        vocab = _fixture_vocab()
        split_punct = True
    else:
        if not args.vocab:
            raise DataError("tokenize needs --vocab or --fixture")
        vocab = wordpiece.load_vocab(args.vocab)
        split_punct = args.split_punct
    if args.text is not None:
        texts = [args.text]
    elif args.file:
        texts = [t for _, t in corpus_mod.load_corpus(args.file, "input").units]
    else:
        texts = [line.rstrip("\n") for line in sys.stdin]
    for text in texts:
        pieces = wordpiece.encode_pieces(vocab, text,
                                         isolate_punctuation=split_punct)
        print(" ".join(pieces))
    return 0


def cmd_compress(args) -> int:
    c = _load_corpus_arg(args.corpus, args.language)
    analyzer = compression.CompressionAnalyzer(c, min_frequency=args.min_frequency)
    a = analyzer.asymptote()
    print(f"n_min: {analyzer.n_min}  a: {a:.6f}")
    for n in _parse_sizes(args.sizes):
        print(f"n={n}  acr={analyzer.acr(n):.6f}  rcr={analyzer.rcr(n):.6f}")
    return 0


def cmd_embed(args) -> int:
    manifest = RunManifest(command="embed", seed=args.seed, config={
        "corpus": args.corpus, "language": args.language, "vocab": args.vocab,
        "dim": args.dim, "window": args.window, "negatives": args.negatives,
        "epochs": args.epochs, "seed": args.seed,
    })
    manifest.add_input(args.corpus)
    manifest.add_input(args.vocab)
    c = _load_corpus_arg(args.corpus, args.language)
    vocab = wordpiece.load_vocab(args.vocab)
    config = embeddings.EmbedConfig(dim=args.dim, window=args.window,
                                    negatives=args.negatives, epochs=args.epochs)
    with manifest.time_stage("embed"):
        em = embeddings.train_embeddings(c, vocab, config, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    embeddings.save_embeddings(em, out, vocab=vocab)
    manifest.write(out.parent)
    print(f"trained {em.vocab_size}x{em.dim} embeddings -> {out}")
    return 0


def cmd_svg(args) -> int:
    em_e = embeddings.load_embeddings(args.emb_e)
    em_f = embeddings.load_embeddings(args.emb_f)
    value = spectral.svg(spectral.singular_values(em_e),
                         spectral.singular_values(em_f), k=args.k)
    print(f"{value:.10g}")
    return 0


def _load_grid_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config, "rb") as f:
            cfg = tomllib.load(f)
    flat = dict(cfg.get("grid", cfg))
    for key in ("corpus_e", "corpus_f", "lang_e", "lang_f", "sizes_e",
                "sizes_f", "seed", "out", "cache_dir", "dim", "epochs"):
        value = getattr(args, key, None)
        if value is not None:
            flat[key] = value
    for key in ("corpus_e", "corpus_f", "sizes_e", "sizes_f", "out"):
        if key not in flat:
            raise DataError(f"grid run: missing required setting {key!r}")
    return flat


def cmd_grid_run(args) -> int:
    flat = _load_grid_config(args)
    sizes_e = _parse_sizes(flat["sizes_e"]) if isinstance(flat["sizes_e"], str) \
        else tuple(flat["sizes_e"])
    sizes_f = _parse_sizes(flat["sizes_f"]) if isinstance(flat["sizes_f"], str) \
        else tuple(flat["sizes_f"])
    seed = int(flat.get("seed", 0))
    manifest = RunManifest(command="grid run", seed=seed, config={
        k: v for k, v in flat.items() if k != "out"})
    manifest.add_input(flat["corpus_e"])
    manifest.add_input(flat["corpus_f"])
    c_e = _load_corpus_arg(flat["corpus_e"], flat.get("lang_e"))
    c_f = _load_corpus_arg(flat["corpus_f"], flat.get("lang_f"))
    embed_cfg = embeddings.EmbedConfig(
        dim=int(flat.get("dim", 100)), epochs=int(flat.get("epochs", 5)))
    config = grid_mod.GridConfig(
        sizes_e=sizes_e, sizes_f=sizes_f, embed=embed_cfg, seed=seed,
        cache_dir=flat.get("cache_dir"))
    curve_e = compression.load_curve(flat["curve_e"]) if flat.get("curve_e") else None
    curve_f = compression.load_curve(flat["curve_f"]) if flat.get("curve_f") else None
    runner = grid_mod.GridRunner(c_e, c_f, config)
    with manifest.time_stage("grid"):
        result = runner.run(curve_e, curve_f)
    out = Path(flat["out"])
    out.mkdir(parents=True, exist_ok=True)
    grid_mod.export_grid(result, "json", out / "grid.json")
    manifest.write(out)
    print(f"grid {len(sizes_e)}x{len(sizes_f)} written to {out / 'grid.json'} "
          f"({runner.stats['trainings']} trainings, "
          f"{runner.stats['cache_hits']} cache hits)")
    return 0


def cmd_grid_export(args) -> int:
    g = grid_mod.grid_from_dict(
        json.loads(Path(args.grid).read_text(encoding="utf-8")))
    out = args.out or str(Path(args.grid).with_suffix(f".{args.format}"))
    grid_mod.export_grid(g, args.format, out)
    print(f"wrote {out}")
    return 0


def cmd_correlate(args) -> int:
    if args.fixture:
        if args.fixture != "table7":
            raise DataError(f"unknown fixture {args.fixture!r}")
        ref = resources.files("vocabcompat.data") / "table7.csv"
        with resources.as_file(ref) as path:
            rows = list(csv.DictReader(path.open(encoding="utf-8")))
    elif args.csv:
        rows = list(csv.DictReader(open(args.csv, encoding="utf-8")))
    else:
        raise DataError("correlate needs --csv or --fixture")
    if not rows:
        raise DataError("correlation input is empty")

    scores = [float(r["score"]) for r in rows]
    if "ratio_abs" in rows[0] and "ratio_rel" in rows[0]:
        ratio_abs = [float(r["ratio_abs"]) for r in rows]
        ratio_rel = [float(r["ratio_rel"]) for r in rows]
    else:
        ref_rows = [r for r in rows if r["language_id"] == args.reference]
        if not ref_rows:
            raise DataError(f"reference language {args.reference!r} not in input")
        ref = ref_rows[0]
        ratio_abs = [
            spectral.compatibility_ratio(float(r["r_abs"]), float(ref["r_abs"]))
            for r in rows
        ]
        ratio_rel = [
            spectral.compatibility_ratio(float(r["r_rel"]), float(ref["r_rel"]))
            for r in rows
        ]
    p_abs = spectral.pearson(ratio_abs, scores)
    p_rel = spectral.pearson(ratio_rel, scores)
    print(f"pearson_acr {p_abs:.2f}")
    print(f"pearson_rcr {p_rel:.2f}")
    return 0


def cmd_fake(args) -> int:
    c = corpus_mod.load_corpus(args.infile, args.language or Path(args.infile).stem)
    if args.invert:
        result = corpus_mod.unfake_language(c, args.marker)
    else:
        result = corpus_mod.fake_language(c, args.marker)
    corpus_mod.save_corpus(result, args.out)
    print(f"wrote {result.language_id} corpus -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vocabcompat",
        description="Cross-lingual subword vocabulary compatibility toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def corpus_args(sp):
        sp.add_argument("--corpus", required=True)
        sp.add_argument("--language")
        sp.add_argument("--min-frequency", dest="min_frequency", type=int, default=1)

    sp = sub.add_parser("curve", help="sample, fit and select vocabulary sizes")
    corpus_args(sp)
    sp.add_argument("--k", type=int, default=12)
    sp.add_argument("--n-max", dest="n_max", type=int,
                    default=compression.DEFAULT_N_MAX)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("select-sizes", help="re-run size selection on a curve.json")
    sp.add_argument("--curve", required=True)
    sp.add_argument("--floor-r", dest="floor_r", type=float, default=None)
    sp.set_defaults(func=cmd_select_sizes)

    sp = sub.add_parser("train-tokenizer", help="train a WordPiece vocabulary")
    corpus_args(sp)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_train_tokenizer)

    sp = sub.add_parser("tokenize", help="encode text with a vocabulary")
    sp.add_argument("--vocab")
    sp.add_argument("--fixture", nargs="?", const="bert-example",
                    help="use the bundled demo vocabulary")
    sp.add_argument("--text")
    sp.add_argument("--file")
    sp.add_argument("--split-punct", dest="split_punct", action="store_true")
    sp.set_defaults(func=cmd_tokenize)

    sp = sub.add_parser("compress", help="print ACR/RCR at given sizes")
    corpus_args(sp)
    sp.add_argument("--sizes", required=True, help="comma-separated sizes")
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("embed", help="train static subword embeddings")
    corpus_args(sp)
    sp.add_argument("--vocab", required=True)
    sp.add_argument("--dim", type=int, default=100)
    sp.add_argument("--window", type=int, default=5)
    sp.add_argument("--negatives", type=int, default=5)
    sp.add_argument("--epochs", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("svg", help="singular value gap between two embedding files")
    sp.add_argument("--emb-e", dest="emb_e", required=True)
    sp.add_argument("--emb-f", dest="emb_f", required=True)
    sp.add_argument("--k", type=int, default=spectral.SVG_TOP_K)
    sp.set_defaults(func=cmd_svg)

    sp = sub.add_parser("grid", help="run or export a compatibility grid")
    gsub = sp.add_subparsers(dest="grid_command", required=True)
    gp = gsub.add_parser("run")
    gp.add_argument("--config", help="TOML config; flags override it")
    gp.add_argument("--corpus-e", dest="corpus_e")
    gp.add_argument("--corpus-f", dest="corpus_f")
    gp.add_argument("--lang-e", dest="lang_e")
    gp.add_argument("--lang-f", dest="lang_f")
    gp.add_argument("--sizes-e", dest="sizes_e")
    gp.add_argument("--sizes-f", dest="sizes_f")
    gp.add_argument("--seed", type=int)
    gp.add_argument("--dim", type=int)
    gp.add_argument("--epochs", type=int)
    gp.add_argument("--cache-dir", dest="cache_dir")
    gp.add_argument("--out")
    gp.set_defaults(func=cmd_grid_run)
    ge = gsub.add_parser("export")
    ge.add_argument("--grid", required=True, help="grid.json path")
    ge.add_argument("--format", choices=["json", "csv", "pgm"], required=True)
    ge.add_argument("--out")
    ge.set_defaults(func=cmd_grid_export)

    sp = sub.add_parser("correlate", help="Pearson correlation of ratio columns")
    sp.add_argument("--csv")
    sp.add_argument("--fixture", nargs="?", const="table7")
    sp.add_argument("--reference", default="eng")
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("fake", help="apply or invert the fake-language transform")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--language")
    sp.add_argument("--marker", default=corpus_mod.DEFAULT_FAKE_MARKER)
    sp.add_argument("--invert", action="store_true")
    sp.set_defaults(func=cmd_fake)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
