"""Command-line entry point.

Subcommands cover the full pipeline: building the index from a dump,
printing pairwise measure components, evaluating against a test set,
tuning the combination parameters, the stability analyses, supervised
cross-validation, and index statistics. All outputs are reproducible from
the same inputs, config and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from collections import Counter
from typing import Optional

from . import collocation as colloc
from . import combine as comb
from . import corpus, esa, evaluation, svr, wordnet
from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    check_config_paths,
    full_config_hash,
    index_config_hash,
    load_config,
    save_config,
)
from .textpipe import parse_pos_sidecar

CACHE_ENV = "RELMIX_CACHE_DIR"


class CliError(Exception):
    """User-facing failure; message is printed as a single line."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relmix",
        description="semantic relatedness from encyclopedia text, "
        "a lexical ontology and n-gram statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--dump", help="MediaWiki XML export")
        p.add_argument("--wordnet-dir", dest="wordnet_dir", help="WordNet data.* directory")
        p.add_argument("--ngrams-uni", dest="ngrams_uni", help="unigram count TSV")
        p.add_argument("--ngrams-bi", dest="ngrams_bi", help="bigram count TSV")
        p.add_argument("--testset", help="word-pair judgment TSV")
        p.add_argument("--index", help="index file path")
        p.add_argument("--ic-table", dest="ic_table", help="information-content table")
        p.add_argument("--pos-annotations", dest="pos_annotations",
                       help="POS sidecar file keyed by page id")
        p.add_argument("--min-terms", dest="min_terms", type=int)
        p.add_argument("--min-links", dest="min_links", type=int)
        p.add_argument("--mode", choices=("stemmed", "pos-noun", "pos-all"))
        p.add_argument("--sentence-weight", dest="sentence_weight", type=int)
        p.add_argument("--prune-sections", dest="prune_sections",
                       action="store_const", const=True, default=None)
        p.add_argument("--seed", type=int)
        p.add_argument("--dedupe", action="store_const", const=True, default=None)
        p.add_argument("--params", help="combination parameters file")
        p.add_argument("--out-dir", dest="out_dir", default=".")
        p.add_argument("--force", action="store_true",
                       help="skip the index/config hash check")

    for name, doc in (
        ("build-index", "stream a dump into an index file"),
        ("measure", "print measure components for one word pair"),
        ("eval", "score a test set and write the report CSVs"),
        ("tune", "optimize the combination parameters on a test set"),
        ("stability", "leave-one-out stability CSV and top movers"),
        ("removal-curve", "correlation under progressive low-score removal"),
        ("svr-eval", "cross-validated supervised predictions"),
        ("index-stats", "print index statistics"),
        ("save-config", "write the effective configuration to a file"),
    ):
        p = sub.add_parser(name, help=doc)
        add_common(p)
        if name == "measure":
            p.add_argument("w1")
            p.add_argument("w2")
        if name in ("eval", "stability", "removal-curve"):
            p.add_argument("--measure", choices=("esa", "ew", "ewc"), default="ewc")
            p.add_argument("--score-fn", choices=("measure", "gold"), default="measure",
                           help="'gold' echoes the judgments (pipeline test hook)")
            p.add_argument("--skip-failures", action="store_true")
        if name == "tune":
            p.add_argument("--restarts", type=int, default=8)
        if name == "svr-eval":
            p.add_argument("--features", choices=("ewc", "ew", "scalar"), default="ewc")
            p.add_argument("--folds", type=int, default=10)
            p.add_argument("--degree", type=int, default=4)
            p.add_argument("--svr-c", dest="svr_c", type=float, default=1.0)
            p.add_argument("--epsilon", type=float, default=0.1)
            p.add_argument("--save-model", dest="save_model")
        if name == "save-config":
            p.add_argument("path")
    return parser


def _effective_config(args) -> RunConfig:
    cfg = load_config(args.config, check_paths=False) if args.config else RunConfig()
    overrides = {}
    for key in ("dump", "wordnet_dir", "ngrams_uni", "ngrams_bi", "testset", "index",
                "ic_table", "pos_annotations", "min_terms", "min_links", "mode",
                "sentence_weight", "prune_sections", "seed", "dedupe"):
        overrides[key] = getattr(args, key, None)
    cfg = apply_overrides(cfg, **overrides)
    if getattr(args, "params", None):
        cfg = apply_overrides(
            cfg,
            **{k: getattr(comb.load_params(args.params), k)
               for k in ("lambda_", "m", "s", "lambda_prime", "m_prime", "s_prime", "xi")},
        )
    check_config_paths(cfg)
    return cfg


def _require(value: str, what: str, flag: str) -> str:
    if not value:
        raise CliError(f"missing {what}: pass {flag} or set it in the config")
    return value


# ---------------------------------------------------------------------------
# Pipeline assembly
# ---------------------------------------------------------------------------


def _cache_path(cfg: RunConfig, dump: str) -> Optional[str]:
    cache_dir = os.environ.get(CACHE_ENV)
    if not cache_dir:
        return None
    os.makedirs(cache_dir, exist_ok=True)
    stat = os.stat(dump)
    key = f"{os.path.abspath(dump)}|{stat.st_size}|{int(stat.st_mtime)}"
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
    return os.path.join(cache_dir, f"pages-{digest}.ndjson")


def load_cleaned_pages(cfg: RunConfig) -> list[corpus.Page]:
    """Dump -> cleaned concept pages with resolved link statistics."""
    dump = _require(cfg.dump, "dump file", "--dump")
    cache = _cache_path(cfg, dump)
    if cache and os.path.exists(cache):
        return list(corpus.read_page_store(cache))
    diagnostics = Counter()
    concepts: list[corpus.Page] = []
    redirects: dict[str, str] = {}
    for page in corpus.parse_dump(dump):
        if page.is_redirect:
            redirects[corpus.normalize_title(page.title)] = page.redirect_target
        elif page.namespace == 0:
            concepts.append(corpus.clean_page(page, diagnostics))
    corpus.link_stats(concepts, redirects)
    if cache:
        corpus.write_page_store(concepts, cache)
    return concepts


def build_index_from_config(cfg: RunConfig) -> esa.InvertedIndex:
    pages = load_cleaned_pages(cfg)
    pos_annotations = None
    if cfg.mode != "stemmed" or cfg.prune_sections:
        path = _require(cfg.pos_annotations, "POS annotations", "--pos-annotations")
        with open(path, encoding="utf-8") as fh:
            pos_annotations = parse_pos_sidecar(fh)
    if cfg.prune_sections:
        pruned = []
        for page in pages:
            tags = pos_annotations.get(page.id)
            if tags is None:
                raise CliError(f"no POS annotations for page {page.id}")
            pruned.append(corpus.prune_sections(page, tags, cfg.prune_threshold))
        pages = pruned
    pages = corpus.filter_pages(pages, corpus.FilterCriteria(cfg.min_terms, cfg.min_links))
    if not pages:
        raise CliError("no pages survive the filter criteria")
    sentence_weights = None
    if cfg.sentence_weight > 1:
        sentence_weights = {
            p.id: corpus.weight_sentences(p, cfg.sentence_weight) for p in pages
        }
    return esa.build_index(
        pages,
        mode=cfg.mode,
        pos_annotations=pos_annotations,
        sentence_weights=sentence_weights,
        extra_metadata={
            "config_hash": index_config_hash(cfg),
            "min_terms": cfg.min_terms,
            "min_links": cfg.min_links,
            "sentence_weight": cfg.sentence_weight,
            "prune_sections": cfg.prune_sections,
        },
    )


class Scorer:
    """Loads the configured resources once and scores word pairs."""

    def __init__(self, cfg: RunConfig, force: bool = False):
        self.cfg = cfg
        index_path = _require(cfg.index, "index file", "--index")
        if not os.path.exists(index_path):
            raise CliError(f"index file does not exist: {index_path}")
        self.index = esa.load_index(index_path)
        stored = self.index.metadata.get("config_hash")
        if not force and stored and stored != index_config_hash(cfg):
            raise CliError(
                f"index {index_path} was built with config hash {stored}, current "
                f"settings hash {index_config_hash(cfg)}; use --force to override"
            )
        self.graph = wordnet.load_wordnet(cfg.wordnet_dir) if cfg.wordnet_dir else None
        if self.graph is not None and cfg.ic_table:
            self.graph.ic = wordnet.load_ic(cfg.ic_table)
        self.ngrams = None
        if cfg.ngrams_uni and cfg.ngrams_bi:
            with open(cfg.ngrams_uni, encoding="utf-8") as uni, open(
                cfg.ngrams_bi, encoding="utf-8"
            ) as bi:
                self.ngrams = colloc.load_ngrams(uni, bi, min_year=cfg.ngram_min_year)

    def components(self, w1: str, w2: str) -> dict[str, float]:
        esa_val = esa.esa(self.index, w1, w2)
        wnp_val = wordnet.word_measure("WNP", self.graph, w1, w2) if self.graph else 0.0
        direct = inverse = 0.0
        if self.ngrams is not None:
            try:
                direct = colloc.collocation_index(self.ngrams, w1, w2)
                inverse = colloc.collocation_index(self.ngrams, w2, w1)
            except colloc.CollocationError:
                direct = inverse = 0.0
        return {"esa": esa_val, "wnp": wnp_val, "c_direct": direct, "c_inverse": inverse}

    def score(self, w1: str, w2: str, measure: str = "ewc") -> float:
        parts = self.components(w1, w2)
        if measure == "esa":
            return parts["esa"]
        if measure == "ew":
            return comb.ew(parts["esa"], parts["wnp"], self.cfg.combine)
        cxi = parts["c_direct"] + self.cfg.combine.xi * parts["c_inverse"]
        return comb.ewc(parts["esa"], parts["wnp"], cxi, self.cfg.combine)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_build_index(args) -> int:
    cfg = _effective_config(args)
    index = build_index_from_config(cfg)
    out = cfg.index or os.path.join(args.out_dir, "index.rmx")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    esa.save_index(index, out)
    stats = esa.index_stats(index)
    print(f"indexed {stats.concept_count} concepts, {stats.term_count} terms -> {out}")
    return 0


def cmd_index_stats(args) -> int:
    cfg = _effective_config(args)
    index_path = _require(cfg.index, "index file", "--index")
    index = esa.load_index(index_path)
    print(esa.format_stats(esa.index_stats(index)))
    return 0


def cmd_measure(args) -> int:
    cfg = _effective_config(args)
    scorer = Scorer(cfg, force=args.force)
    parts = scorer.components(args.w1, args.w2)
    cxi = parts["c_direct"] + cfg.combine.xi * parts["c_inverse"]
    ew_val = comb.ew(parts["esa"], parts["wnp"], cfg.combine)
    ewc_val = comb.ewc(parts["esa"], parts["wnp"], cxi, cfg.combine)
    for name, value in (
        ("esa", parts["esa"]),
        ("wnp", parts["wnp"]),
        ("cxi", cxi),
        ("ew", ew_val),
        ("ewc", ewc_val),
    ):
        print(f"{name}\t{value:.6f}")
    return 0


def _load_pairs(cfg: RunConfig) -> list[evaluation.WordPair]:
    testset = _require(cfg.testset, "test set", "--testset")
    pairs = evaluation.load_test_set(testset, dedupe=cfg.dedupe)
    dupes = evaluation.duplicate_pairs(pairs)
    if dupes and not cfg.dedupe:
        names = ", ".join(f"{a} / {b}" for a, b in dupes)
        print(f"note: duplicate pairs kept: {names}", file=sys.stderr)
    return pairs


def _evaluate(args, cfg: RunConfig) -> evaluation.EvalReport:
    pairs = _load_pairs(cfg)
    if args.score_fn == "gold":
        golds = {(p.w1, p.w2): p.gold for p in pairs}
        fn = lambda w1, w2: golds[(w1, w2)]
        return evaluation.evaluate_measure(pairs, fn)
    scorer = Scorer(cfg, force=args.force)
    return evaluation.evaluate_measure(
        pairs, lambda w1, w2: scorer.score(w1, w2, args.measure),
        skip_failures=args.skip_failures,
    )


def cmd_eval(args) -> int:
    cfg = _effective_config(args)
    report = _evaluate(args, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    chash = full_config_hash(cfg)
    evaluation.write_stability_csv(report, os.path.join(args.out_dir, "stability.csv"), chash)
    evaluation.write_removal_csv(report, os.path.join(args.out_dir, "removal_curve.csv"), chash)
    print(f"rho\t{report.rho:.6f}")
    if report.skipped:
        print(f"skipped\t{len(report.skipped)}", file=sys.stderr)
    return 0


def cmd_stability(args) -> int:
    cfg = _effective_config(args)
    report = _evaluate(args, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    evaluation.write_stability_csv(
        report, os.path.join(args.out_dir, "stability.csv"), full_config_hash(cfg)
    )
    ranked = sorted(
        zip(report.pairs, report.stability), key=lambda t: t[1], reverse=True
    )
    for pair, delta in ranked[:40]:
        print(f"{pair.w1} / {pair.w2}\t{delta:+.6f}")
    return 0


def cmd_removal_curve(args) -> int:
    cfg = _effective_config(args)
    report = _evaluate(args, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    evaluation.write_removal_csv(
        report, os.path.join(args.out_dir, "removal_curve.csv"), full_config_hash(cfg)
    )
    for k, rho in report.removal_curve:
        print(f"{k}\t{rho:.6f}")
    return 0


def cmd_tune(args) -> int:
    cfg = _effective_config(args)
    pairs = _load_pairs(cfg)
    scorer = Scorer(cfg, force=args.force)
    parts = [scorer.components(p.w1, p.w2) for p in pairs]
    golds = [p.gold for p in pairs]

    def objective(params: comb.CombineParams) -> float:
        scores = [
            comb.ewc(c["esa"], c["wnp"], c["c_direct"] + params.xi * c["c_inverse"], params)
            for c in parts
        ]
        try:
            return evaluation.spearman(scores, golds)
        except ValueError:
            return float("-inf")

    best, rho = comb.tune(objective, cfg.combine, seed=cfg.seed, restarts=args.restarts)
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, "params.tuned")
    comb.save_params(best, out)
    print(f"rho\t{rho:.6f}")
    print(f"params\t{out}")
    return 0


def cmd_svr_eval(args) -> int:
    cfg = _effective_config(args)
    pairs = _load_pairs(cfg)
    scorer = Scorer(cfg, force=args.force)

    def feature_fn(w1: str, w2: str):
        parts = scorer.components(w1, w2)
        if args.features == "ew":
            return [parts["esa"], parts["wnp"]]
        if args.features == "scalar":
            cxi = parts["c_direct"] + cfg.combine.xi * parts["c_inverse"]
            return [comb.ewc(parts["esa"], parts["wnp"], cxi, cfg.combine)]
        return [parts["esa"], parts["wnp"], parts["c_direct"], parts["c_inverse"]]

    predictions, rho = svr.cross_validate(
        pairs, feature_fn, folds=args.folds, degree=args.degree,
        c=args.svr_c, epsilon=args.epsilon, seed=cfg.seed,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, "predictions.csv")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={full_config_hash(cfg)}\n")
        fh.write("w1,w2,gold,prediction\n")
        for pair, pred in zip(pairs, predictions):
            fh.write(f"{pair.w1},{pair.w2},{pair.gold!r},{pred!r}\n")
    if args.save_model:
        rows = [feature_fn(p.w1, p.w2) for p in pairs]
        model = svr.train_svr(rows, [p.gold for p in pairs], degree=args.degree,
                              c=args.svr_c, epsilon=args.epsilon)
        svr.save_model(model, args.save_model)
    print(f"rho\t{rho:.6f}")
    return 0


def cmd_save_config(args) -> int:
    cfg = _effective_config(args)
    save_config(cfg, args.path)
    print(f"wrote {args.path}")
    return 0


_COMMANDS = {
    "build-index": cmd_build_index,
    "measure": cmd_measure,
    "eval": cmd_eval,
    "tune": cmd_tune,
    "stability": cmd_stability,
    "removal-curve": cmd_removal_curve,
    "svr-eval": cmd_svr_eval,
    "index-stats": cmd_index_stats,
    "save-config": cmd_save_config,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ConfigError, corpus.DumpError, esa.EsaIndexError,
            wordnet.WordnetError, colloc.CollocationError, svr.SvrError,
            ValueError, OSError) as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
