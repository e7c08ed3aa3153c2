"""citeinfluence command-line front end.

Commands compose through files only:

    citeinfluence ingest corpus.jsonl
    citeinfluence features corpus.jsonl -o features.tsv
    citeinfluence train features.tsv --features countsInPaper_whole,sim_titleCore -o model.txt
    citeinfluence predict model.txt features.tsv -o predictions.tsv
    citeinfluence evaluate features.tsv --folds 10 --seed 0
    citeinfluence netstats --edges edges.tsv --authors authors.tsv --entity authors
    citeinfluence synth -o demo/
    citeinfluence report --corpus corpus.jsonl --edges edges.tsv --authors authors.tsv -o report/

Every run writes a JSON manifest (inputs, configuration, tool version and
sha256 digests of the outputs) next to its output, or to ``--manifest``.
Exit status: 0 ok, 1 invalid input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .corpus import CorpusError, corpus_stats, load_corpus, write_corpus
from .features import FEATURE_NAMES, FeatureTable, extract_features, read_feature_table, write_feature_table
from .model import (
    DEFAULT_TOP_K,
    TrainConfig,
    cross_validate,
    greedy_feature_selection,
    load_model,
    predict_paper,
    random_baseline,
    save_model,
    train,
)
from .network import (
    CitationNetwork,
    FilterSpec,
    entity_scores,
    filter_edges,
    load_network,
    read_ids,
)
from .report import Table, additive_table, build_report, format_table, summarize
from .textproc import load_lexicons

log = logging.getLogger("citeinfluence")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
_CORPUS_SUFFIXES = (".jsonl", ".json", ".ndjson")


class InputError(Exception):
    """Bad command-line input; exits with status 1."""


@dataclass
class RunManifest:
    command: str
    inputs: dict[str, str]
    config: dict
    tool_version: str = __version__
    outputs: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


# --- helpers ------------------------------------------------------------------

def _sep(args) -> str:
    return "," if args.format == "csv" else "\t"


def _feature_list(spec: str | None) -> tuple[str, ...] | None:
    if spec is None:
        return None
    feats = tuple(f.strip() for f in spec.split(",") if f.strip())
    unknown = [f for f in feats if f not in FEATURE_NAMES]
    if unknown:
        raise InputError(f"unknown feature(s): {', '.join(unknown)}")
    if not feats:
        raise InputError("--features is empty")
    return feats


def _top_k(value: str) -> int | str:
    if value == "auto":
        return value
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("--top-k must be a positive integer or 'auto'") from None
    if k < 1:
        raise argparse.ArgumentTypeError("--top-k must be a positive integer or 'auto'")
    return k


def _t2(value: str) -> float:
    if value.lower() in ("inf", "infinity"):
        return math.inf
    return float(int(value))


def _is_corpus(path: str) -> bool:
    return Path(path).suffix.lower() in _CORPUS_SUFFIXES


def _load_table(args, path: str) -> FeatureTable:
    """A feature table from a corpus (extracted now) or a feature dump."""
    if _is_corpus(path):
        papers = load_corpus(path, standardize=getattr(args, "standardize", False))
        return extract_features(papers, load_lexicons(args.lexicon_dir), jobs=args.jobs)
    return read_feature_table(path, _sep(args))


def _config(args, features: Sequence[str] | None = None) -> TrainConfig:
    feats = features or _feature_list(args.features) or ("countsInPaper_whole",)
    return TrainConfig(feats, folds=args.folds, seed=args.seed, top_k=args.top_k)


def _emit(text: str, out: str | None, outputs: list[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        outputs.append(Path(out))


def _network(args) -> CitationNetwork:
    net = load_network(args.edges, args.authors, args.papers)
    if args.t1 != 1 or not math.isinf(args.t2):
        net = filter_edges(net, FilterSpec(args.t1, args.t2))
    return net


# --- commands -------------------------------------------------------------------

def cmd_ingest(args, outputs: list[Path]) -> None:
    papers = load_corpus(args.corpus, standardize=args.standardize)
    stats = corpus_stats(papers)
    if args.output:
        write_corpus(papers, args.output)
        outputs.append(Path(args.output))
    sep = _sep(args)
    text = "".join(f"{k}{sep}{v}\n" for k, v in asdict(stats).items())
    if args.stats:
        Path(args.stats).write_text(text, encoding="utf-8")
        outputs.append(Path(args.stats))
    else:
        sys.stdout.write(text)


def cmd_features(args, outputs: list[Path]) -> None:
    papers = load_corpus(args.corpus, standardize=args.standardize)
    table = extract_features(papers, load_lexicons(args.lexicon_dir), normalize=not args.raw, jobs=args.jobs)
    if table.disabled:
        log.warning("features disabled for missing lexicons: %s", ", ".join(sorted(table.disabled)))
    write_feature_table(table, args.output, _sep(args))
    outputs.append(Path(args.output))


def cmd_train(args, outputs: list[Path]) -> None:
    table = _load_table(args, args.input)
    if not (table.labels >= 0).any():
        raise InputError("training data has no gold labels")
    model = train(table, _config(args))
    save_model(model, args.output)
    outputs.append(Path(args.output))
    if model.capped:
        log.warning("weights hit the cap; training data may be separable")


def cmd_predict(args, outputs: list[Path]) -> None:
    model = load_model(args.model)
    table = _load_table(args, args.input)
    k = args.top_k if isinstance(args.top_k, int) else None
    X = table.matrix(model.feature_names)
    probs = model.probabilities(X)
    sep = _sep(args)
    lines = [sep.join(("paper_id", "ref_index", "probability", "top_k", "threshold"))]
    for pid, ix in table.groups().items():
        refs = [table.keys[i].ref_index for i in ix]
        chosen = predict_paper(model, X[ix], refs, k)
        for i in ix:
            ref = table.keys[i].ref_index
            lines.append(sep.join((pid, str(ref), repr(float(probs[i])), str(int(ref in chosen)), str(int(probs[i] > model.threshold)))))
    _emit("\n".join(lines) + "\n", args.output, outputs)


def cmd_evaluate(args, outputs: list[Path]) -> None:
    table = _load_table(args, args.input)
    if not (table.labels >= 0).any():
        raise InputError("evaluation data has no gold labels")
    base = _config(args)
    sep = _sep(args)
    if args.greedy:
        candidates = _feature_list(args.features) or tuple(n for n in FEATURE_NAMES if n not in table.disabled)
        steps = greedy_feature_selection(table, candidates, base, args.max_features)
        result = Table(
            "greedy_selection",
            ("step", "added", "macro_f", "macro_p", "macro_r"),
            [(i + 1, s.feature, s.macro_f, s.macro_p, s.macro_r) for i, s in enumerate(steps)],
        )
    elif args.features is None and not args.model_set:
        result = additive_table(table, base)
    else:
        rows = []
        rep = random_baseline(table, base)
        rows.append(("random", rep.macro_f, rep.macro_p, rep.macro_r))
        sets = [_feature_list(s) for s in args.model_set] if args.model_set else [_feature_list(args.features)]
        per_paper = []
        for feats in sets:
            rep = cross_validate(table, _config(args, feats))
            rows.append(("+".join(feats), rep.macro_f, rep.macro_p, rep.macro_r))
            per_paper += [(rep.name, s.paper_id, s.fold, s.precision, s.recall, s.f) for s in rep.per_paper]
        result = Table("evaluation", ("features", "macro_f", "macro_p", "macro_r"), rows)
        if args.per_paper:
            pp = Table("per_paper", ("features", "paper_id", "fold", "precision", "recall", "f"), per_paper)
            Path(args.per_paper).write_text(format_table(pp, sep), encoding="utf-8")
            outputs.append(Path(args.per_paper))
    _emit(format_table(result, sep), args.output, outputs)
    if args.summary:
        print(summarize(result, top=50), file=sys.stderr)


def cmd_netstats(args, outputs: list[Path]) -> None:
    net = _network(args)
    if args.entity == "authors" and not net.authors:
        raise InputError("--entity authors needs --authors")
    scores = entity_scores(net, args.entity, args.exponent)
    ids = args.ids or sorted(scores)
    missing = [i for i in ids if i not in scores]
    if missing:
        raise InputError(f"unknown {args.entity}: {', '.join(missing)}")
    sep = _sep(args)
    cols = ("paper_id", "citations", "cip") if args.entity == "papers" else ("author_id", "h_index", "hip_index")
    lines = [sep.join(cols)]
    for i in ids:
        conv, primed = scores[i]
        lines.append(sep.join((i, _num(conv), _num(primed))))
    _emit("\n".join(lines) + "\n", args.output, outputs)


def cmd_synth(args, outputs: list[Path]) -> None:
    from .network import write_network
    from .synthetic import corpus_records, generate_honoree_network

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    corpus = out / "corpus.jsonl"
    with open(corpus, "w", encoding="utf-8") as fh:
        for rec in corpus_records(args.papers_n, args.seed):
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    net, honorees = generate_honoree_network(args.seed)
    write_network(net, out / "edges.tsv", out / "authors.tsv")
    (out / "honorees.txt").write_text("\n".join(honorees) + "\n", encoding="utf-8")
    outputs.extend([corpus, out / "edges.tsv", out / "authors.tsv", out / "honorees.txt"])


def _num(v) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def cmd_report(args, outputs: list[Path]) -> None:
    if not (args.corpus or args.features_table or args.edges):
        raise InputError("report needs --corpus, --features-table and/or --edges")
    table = None
    if args.corpus:
        papers = load_corpus(args.corpus, standardize=args.standardize)
        table = extract_features(papers, load_lexicons(args.lexicon_dir), jobs=args.jobs)
    elif args.features_table:
        table = read_feature_table(args.features_table, _sep(args))
    net = _network(args) if args.edges else None
    honorees = read_ids(args.honorees) if args.honorees else None
    if honorees and net is None:
        raise InputError("--honorees needs --edges and --authors")
    paths = build_report(
        args.output,
        table=table,
        config=TrainConfig(_feature_list(args.features) or ("countsInPaper_whole",), args.folds, args.seed, top_k=args.top_k),
        net=net,
        honorees=honorees,
        group_size=args.group_size,
        max_groups=args.max_groups,
        exponent=args.exponent,
        sep=_sep(args),
        figures=not args.no_figures,
    )
    outputs.extend(paths)
    if args.summary:
        for p in paths:
            if p.suffix != ".png":
                print(f"{p}", file=sys.stderr)


# --- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    common.add_argument("--format", choices=("tsv", "csv"), default="tsv", help="delimited output format")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for feature extraction")
    common.add_argument("--manifest", help="where to write the run manifest")
    common.add_argument("-v", "--verbose", action="store_true")

    corpus_opts = argparse.ArgumentParser(add_help=False)
    corpus_opts.add_argument("--standardize", action="store_true", help="map free-form headings to section labels")
    corpus_opts.add_argument("--lexicon-dir", help="directory with gi.tsv, wn.tsv, emotion.tsv and list extensions")

    model_opts = argparse.ArgumentParser(add_help=False)
    model_opts.add_argument("--features", help="comma-separated feature names")
    model_opts.add_argument("--folds", type=int, default=10)
    model_opts.add_argument("--top-k", type=_top_k, default="auto", help=f"references marked per paper, or 'auto' (default; falls back to {DEFAULT_TOP_K})")

    net_opts = argparse.ArgumentParser(add_help=False)
    net_opts.add_argument("--edges", help="citing<TAB>cited<TAB>mentions")
    net_opts.add_argument("--authors", help="author<TAB>paper")
    net_opts.add_argument("--papers", help="paper ids closing the network, one per line")
    net_opts.add_argument("--t1", type=int, default=1, help="minimum in-paper mention count")
    net_opts.add_argument("--t2", type=_t2, default=math.inf, help="keep references ranked below T2 per citing paper")
    net_opts.add_argument("--exponent", type=float, default=2.0, help="mention-count exponent for cip")

    p = argparse.ArgumentParser(prog="citeinfluence", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common, corpus_opts], help="validate a corpus and report counts")
    s.add_argument("corpus")
    s.add_argument("-o", "--output", help="write the validated corpus (token arrays, explicit mentions)")
    s.add_argument("--stats", help="write counts here instead of stdout")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("features", parents=[common, corpus_opts], help="extract the 38 features per pair")
    s.add_argument("corpus")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--raw", action="store_true", help="skip per-paper normalization")
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("train", parents=[common, corpus_opts, model_opts], help="fit a logistic model")
    s.add_argument("input", help="corpus (.jsonl) or feature table")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", parents=[common, corpus_opts], help="score pairs with a trained model")
    s.add_argument("model")
    s.add_argument("input", help="corpus (.jsonl) or feature table")
    s.add_argument("--top-k", type=_top_k, default="auto")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", parents=[common, corpus_opts, model_opts], help="cross-validated macro P/R/F")
    s.add_argument("input", help="corpus (.jsonl) or feature table")
    s.add_argument("--model-set", action="append", help="feature list of one model (repeatable)")
    s.add_argument("--greedy", action="store_true", help="greedy forward selection")
    s.add_argument("--max-features", type=int)
    s.add_argument("--per-paper", help="write per-paper scores here")
    s.add_argument("--summary", action="store_true", help="also print a readable table to stderr")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("netstats", parents=[common, net_opts], help="citation counts, cip, h- and hip-index")
    s.add_argument("--entity", choices=("papers", "authors"), default="authors")
    s.add_argument("--ids", nargs="+", help="restrict output to these ids")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_netstats)

    s = sub.add_parser("report", parents=[common, corpus_opts, model_opts, net_opts], help="all tables and figures")
    s.add_argument("--corpus")
    s.add_argument("--features-table")
    s.add_argument("--honorees", help="honoree author ids, one per line")
    s.add_argument("--group-size", type=int, default=100)
    s.add_argument("--max-groups", type=int, default=10)
    s.add_argument("--no-figures", action="store_true", help="delimited tables only")
    s.add_argument("--summary", action="store_true")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.set_defaults(func=cmd_report)
    s = sub.add_parser("synth", parents=[common], help="write a seeded demo corpus and honoree network")
    s.add_argument("--papers-n", type=int, default=100, help="papers in the demo corpus")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)
    return p


def _inputs(args) -> dict[str, str]:
    out = {}
    for key in ("corpus", "input", "model", "edges", "authors", "papers", "honorees", "features_table"):
        path = getattr(args, key, None)
        if path and Path(path).is_file():
            out[path] = sha256_file(path)
    lex = getattr(args, "lexicon_dir", None)
    if lex and Path(lex).is_dir():
        for f in sorted(Path(lex).glob("*.tsv")):
            out[str(f)] = sha256_file(f)
    return out


def _run_config(args) -> dict:
    skip = {"func", "manifest", "verbose", "command", "summary", "output", "stats", "per_paper"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        cfg[k] = "inf" if isinstance(v, float) and math.isinf(v) else v
    return cfg


def _manifest_path(args) -> Path | None:
    if args.manifest:
        return Path(args.manifest)
    out = getattr(args, "output", None)
    if out is None:
        return None
    if args.command in ("report", "synth"):
        return Path(out) / "manifest.json"
    return Path(f"{out}.manifest.json")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    np.seterr(all="ignore")
    outputs: list[Path] = []
    try:
        args.func(args, outputs)
    except (CorpusError, InputError, FileNotFoundError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    manifest = RunManifest(
        command=args.command,
        inputs=_inputs(args),
        config=_run_config(args),
        outputs={str(p): sha256_file(p) for p in outputs},
    )
    path = _manifest_path(args)
    if path is None:
        sys.stderr.write(manifest.to_json())
    else:
        path.write_text(manifest.to_json(), encoding="utf-8")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
