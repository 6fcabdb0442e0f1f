"""Command-line pipeline: ingest, score, query, evaluate, report, plus the
synthetic-data generators.

Conventions: stdout carries only data (summaries, TSV rows); diagnostics go
to stderr. Outputs are never silently overwritten without --force. Exit
codes: 0 success, 1 usage, 2 data error, 3 external-service error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import interchange, metrics, planted, querygen
from .errors import DataError, ExternalServiceError
from .evaluation import StrategyRunner, results_csv, run_evaluation
from .llm import ChatCompletionClient
from .report import write_aggregates, write_plots
from .scoring import compute_scores, read_scores, write_scores
from .store import MultiAspectEmbedding, ingest
from .strategies import QueryEmbedding, StrategyConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_EXTERNAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems with exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _guard_overwrite(paths: list[Path], force: bool) -> None:
    for p in paths:
        if p.exists() and not force:
            raise DataError(f"{p} already exists (pass --force to overwrite)")


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise DataError(f"expected comma-separated integers, got {text!r}") from exc
    if not values:
        raise DataError("empty integer list")
    return values


# ---------------------------------------------------------------------------
# run configuration (TOML)


@dataclass
class RunConfig:
    store_dir: Path
    queries_path: Path
    query_embeddings_path: Path
    results_dir: Path
    scores_path: Path | None = None
    strategies: list[StrategyConfig] = field(default_factory=list)
    k_values: list[int] = field(default_factory=lambda: [10, 15, 20, 25, 30])
    weight: float = metrics.DEFAULT_WEIGHT
    jobs: int = 0
    seed: int = 0
    llm_endpoint: str = ""
    llm_model: str = ""
    llm_api_key_env: str = "MHRAG_API_KEY"


def _strategy_from_table(entry: dict) -> StrategyConfig:
    base = entry.get("base")
    base_cfg = None
    if base is not None:
        base_cfg = _strategy_from_table(base if isinstance(base, dict) else {"kind": base})
    return StrategyConfig(
        kind=str(entry["kind"]),
        k=int(entry.get("k", 1)),
        c=int(entry["c"]) if "c" in entry else None,
        base=base_cfg,
        num_questions=int(entry.get("num_questions", 4)),
    )


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise DataError(f"{path}: cannot parse config: {exc}") from exc
    root = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else root / candidate

    paths = raw.get("paths", {})
    for key in ("store", "queries", "query_embeddings", "results"):
        if key not in paths:
            raise DataError(f"{path}: [paths] section needs {key!r}")
    ev = raw.get("eval", {})
    strategies = [_strategy_from_table(entry) for entry in raw.get("strategies", [])]
    if not strategies:
        raise DataError(f"{path}: needs at least one [[strategies]] entry")
    tags = [s.tag for s in strategies]
    if len(set(tags)) != len(tags):
        raise DataError(f"{path}: duplicate strategy tags {tags}")
    llm = raw.get("llm", {})
    return RunConfig(
        store_dir=resolve(paths["store"]),
        queries_path=resolve(paths["queries"]),
        query_embeddings_path=resolve(paths["query_embeddings"]),
        results_dir=resolve(paths["results"]),
        scores_path=resolve(paths["scores"]) if "scores" in paths else None,
        strategies=strategies,
        k_values=[int(k) for k in ev.get("k_values", [10, 15, 20, 25, 30])],
        weight=float(ev.get("weight", metrics.DEFAULT_WEIGHT)),
        jobs=int(ev.get("jobs", 0)),
        seed=int(ev.get("seed", 0)),
        llm_endpoint=str(llm.get("endpoint", "")),
        llm_model=str(llm.get("model", "")),
        llm_api_key_env=str(llm.get("api_key_env", "MHRAG_API_KEY")),
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    corpus = Path(args.corpus)
    manifest_path = Path(args.manifest) if args.manifest else interchange.locate_manifest(corpus)
    store_dir = Path(args.store_dir)
    _guard_overwrite(
        [store_dir / interchange.MANIFEST_NAME, store_dir / interchange.RECORDS_NAME],
        args.force,
    )
    manifest = interchange.read_manifest(manifest_path)
    store = ingest(manifest, interchange.read_records(corpus))
    interchange.write_store(store, store_dir)
    print(
        f"{len(store)} chunks, h={manifest.h}, d_head={manifest.d_head}, "
        f"d_full={manifest.d_full}"
    )
    return EXIT_OK


def cmd_score(args) -> int:
    store_dir = Path(args.store_dir)
    out = store_dir / interchange.SCORES_NAME
    _guard_overwrite([out], args.force)
    store = interchange.read_store(store_dir)
    scores = compute_scores(store, sample_size=args.sample, seed=args.seed)
    write_scores(scores, out)
    _log(f"wrote {out} ({scores.h} heads)")
    return EXIT_OK


def _load_query_embedding(args) -> QueryEmbedding:
    if args.embedding:
        try:
            obj = json.loads(Path(args.embedding).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"{args.embedding}: cannot read query embedding: {exc}") from exc
        heads = MultiAspectEmbedding.from_rows(obj["heads"]) if "heads" in obj else None
        std = np.asarray(obj["standard"], dtype=np.float64) if "standard" in obj else None
        return QueryEmbedding(heads=heads, standard=std)
    if args.text is not None:
        if not args.embeddings_file:
            raise DataError("--text requires --embeddings-file with precomputed embeddings")
        for chunk, emb, std in interchange.read_records(args.embeddings_file):
            if chunk.text == args.text:
                return QueryEmbedding(heads=emb, standard=std)
        raise DataError(f"no embedding found for the given text in {args.embeddings_file}")
    raise DataError("provide --embedding FILE or --text plus --embeddings-file")


def cmd_query(args) -> int:
    if args.strategy == "fusion":
        raise DataError(
            "fusion needs a live question generator; use the evaluation API for fusion runs"
        )
    store = interchange.read_store(args.store_dir)
    scores = None
    scores_path = Path(args.store_dir) / interchange.SCORES_NAME
    if scores_path.exists():
        scores = read_scores(scores_path)
    query = _load_query_embedding(args)
    config = StrategyConfig(kind=args.strategy, k=args.k, c=args.c)
    runner = StrategyRunner(store, scores=scores)
    ranked = runner.run(config, query)
    for cid, weight in ranked.entries:
        print(f"{cid}\t{weight!r}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = load_run_config(args.config)
    if args.store:
        config.store_dir = Path(args.store)
    if args.queries:
        config.queries_path = Path(args.queries)
    if args.query_embeddings:
        config.query_embeddings_path = Path(args.query_embeddings)
    if args.results_dir:
        config.results_dir = Path(args.results_dir)
    if args.k_values:
        config.k_values = _parse_int_list(args.k_values)
    if args.jobs is not None:
        config.jobs = args.jobs

    for p in (config.store_dir, config.queries_path, config.query_embeddings_path):
        if not Path(p).exists():
            raise DataError(f"input path does not exist: {p}")
    for cfg in config.strategies:
        if cfg.kind == "fusion":
            raise DataError(
                "fusion needs a live question generator; use the evaluation API for fusion runs"
            )

    results_path = config.results_dir / "results.csv"
    _guard_overwrite([results_path], args.force)

    store = interchange.read_store(config.store_dir)
    queries = metrics.read_queries(config.queries_path)
    embeddings = interchange.read_query_embeddings(config.query_embeddings_path)
    scores = None
    scores_path = config.scores_path or config.store_dir / interchange.SCORES_NAME
    if Path(scores_path).exists():
        scores = read_scores(scores_path)

    def embed(query: metrics.EvalQuery) -> QueryEmbedding:
        if query.id not in embeddings:
            raise DataError(f"no embedding for query {query.id!r}")
        heads, std = embeddings[query.id]
        return QueryEmbedding(heads=heads, standard=std)

    jobs = config.jobs if config.jobs > 0 else (os.cpu_count() or 1)
    run = run_evaluation(
        store,
        queries,
        config.strategies,
        config.k_values,
        embed,
        scores=scores,
        w=config.weight,
        jobs=jobs,
    )
    config.results_dir.mkdir(parents=True, exist_ok=True)
    results_path.write_text(results_csv(run.rows), encoding="utf-8")
    for qid, message in run.failures:
        _log(f"skipped query {qid}: {message}")
    _log(f"wrote {results_path} ({len(run.rows)} rows, {len(run.failures)} queries skipped)")
    return EXIT_OK


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    aggregates_path = out_dir / "aggregates.csv"
    _guard_overwrite([aggregates_path], args.force)
    out_dir.mkdir(parents=True, exist_ok=True)
    count = write_aggregates(args.results, aggregates_path)
    _log(f"wrote {aggregates_path} ({count} rows)")
    if args.plots:
        written = write_plots(args.results, out_dir, metric=args.metric)
        for p in written:
            _log(f"wrote {p}")
    return EXIT_OK


def cmd_gen_planted(args) -> int:
    out = Path(args.out)
    targets = [
        out / interchange.MANIFEST_NAME,
        out / interchange.RECORDS_NAME,
        out / "queries.jsonl",
        out / "query_embeddings.jsonl",
    ]
    _guard_overwrite(targets, args.force)

    spec = planted.PlantedCorpusSpec(
        h=args.heads,
        d_head=args.d_head,
        num_categories=args.categories,
        docs_per_category=args.docs_per_category,
        cluster_spread=0.0,
        mixing_seed=args.mixing_seed,
    )
    if args.sigma is not None:
        sigma = args.sigma
    else:
        sigma = args.spread_fraction * planted.measure_separation(spec, args.seed)
    spec = planted.PlantedCorpusSpec(
        h=args.heads,
        d_head=args.d_head,
        num_categories=args.categories,
        docs_per_category=args.docs_per_category,
        cluster_spread=sigma,
        mixing_seed=args.mixing_seed,
    )
    corpus = planted.generate_planted(spec, args.seed)

    plans = querygen.sample_query_plans(
        corpus.category_pools,
        aspect_counts=_parse_int_list(args.aspect_counts),
        queries_per_count=args.queries_per_count,
        seed=args.query_seed,
    )
    query_spread = sigma * args.query_spread_fraction
    pairs = planted.make_planted_queries(
        corpus, plans, seed=args.query_seed, query_spread=query_spread
    )

    out.mkdir(parents=True, exist_ok=True)
    interchange.write_manifest(corpus.manifest, out / interchange.MANIFEST_NAME)
    interchange.write_records(out / interchange.RECORDS_NAME, corpus.iter_records())
    metrics.write_queries(out / "queries.jsonl", (q for q, _ in pairs))
    interchange.write_query_embeddings(
        out / "query_embeddings.jsonl",
        ((q.id, emb.heads, emb.standard) for q, emb in pairs),
    )
    _log(
        f"planted corpus: {len(corpus.categories) * spec.docs_per_category} docs, "
        f"h={spec.h}, d_head={spec.d_head}, spread={sigma:.4f} "
        f"(separation {corpus.separation:.4f}); {len(pairs)} queries"
    )
    return EXIT_OK


def cmd_gen_queries(args) -> int:
    out = Path(args.out)
    flagged_path = Path(args.flagged) if args.flagged else out.parent / "flagged.jsonl"
    _guard_overwrite([out, flagged_path], args.force)

    categories = querygen.load_categories(args.documents, min_chars=args.min_doc_chars)
    plans = querygen.sample_query_plans(
        categories,
        aspect_counts=_parse_int_list(args.aspect_counts),
        queries_per_count=args.queries_per_count,
        seed=args.seed,
    )
    documents = {
        doc_id: (title, text)
        for spec in categories
        for doc_id, title, text in spec.documents
    }
    client = ChatCompletionClient(
        endpoint=args.endpoint,
        model=args.model,
        api_key_env=args.api_key_env,
        temperature=args.temperature,
    )
    results = querygen.generate_story_queries(
        plans,
        documents,
        client.complete,
        parallelism=args.parallelism,
        retry_limit=args.retries,
        min_length=args.min_length,
    )
    category_of = {doc_id: spec.name for spec in categories for doc_id in spec.document_ids}
    accepted = []
    for i, r in enumerate(results):
        if r.flagged:
            continue
        accepted.append(
            metrics.EvalQuery(
                id=f"story-{i:04d}",
                text=r.text,
                aspects=r.plan.aspects,
                ground_truth=tuple((doc_id, category_of[doc_id]) for _, doc_id in r.plan.picks),
            )
        )
    metrics.write_queries(out, accepted)
    flagged_count = querygen.write_flagged_report(flagged_path, results)
    _log(f"wrote {out} ({len(accepted)} queries, {flagged_count} flagged to {flagged_path})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="mhrag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus and write a sealed store")
    p.add_argument("corpus", help="records JSONL file")
    p.add_argument("store_dir", help="output store directory")
    p.add_argument("--manifest", help="manifest path (default: found next to the corpus)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("score", help="compute head importance scores for a store")
    p.add_argument("store_dir")
    p.add_argument("--sample", type=int, default=None, help="pair sample budget per space")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("query", help="run one retrieval and print TSV rows")
    p.add_argument("store_dir")
    p.add_argument(
        "--strategy",
        required=True,
        choices=["standard", "mrag", "split", "mrag1", "mrag2", "split1", "split2", "fusion"],
    )
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--embedding", help="JSON file with the query's heads/standard vectors")
    p.add_argument("--text", help="query text, resolved via --embeddings-file")
    p.add_argument("--embeddings-file", help="records JSONL with precomputed query embeddings")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("evaluate", help="sweep strategies over queries and k values")
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--store")
    p.add_argument("--queries")
    p.add_argument("--query-embeddings")
    p.add_argument("--results-dir")
    p.add_argument("--k-values", help="comma-separated override")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="aggregate a results CSV, optionally plot")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--metric", default="xi_w", choices=["xi", "xi_c", "xi_w"])
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gen-planted", help="generate a planted corpus with queries")
    p.add_argument("--out", required=True)
    p.add_argument("--heads", type=int, default=8)
    p.add_argument("--d-head", type=int, default=16)
    p.add_argument("--categories", type=int, default=25)
    p.add_argument("--docs-per-category", type=int, default=50)
    p.add_argument("--sigma", type=float, default=None, help="absolute cluster spread")
    p.add_argument(
        "--spread-fraction",
        type=float,
        default=0.5,
        help="cluster spread as a fraction of the inter-cluster separation",
    )
    p.add_argument(
        "--query-spread-fraction",
        type=float,
        default=0.5,
        help="query noise as a fraction of the cluster spread",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mixing-seed", type=int, default=0)
    p.add_argument("--query-seed", type=int, default=0)
    p.add_argument("--aspect-counts", default="1,5,10,15,20")
    p.add_argument("--queries-per-count", type=int, default=25)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen_planted)

    p = sub.add_parser("gen-queries", help="generate story queries with a chat model")
    p.add_argument("--documents", required=True, help="categorized documents JSONL")
    p.add_argument("--out", required=True, help="output queries JSONL")
    p.add_argument("--flagged", help="flagged-query report path (default: flagged.jsonl)")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--api-key-env", default="MHRAG_API_KEY")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--aspect-counts", default="1,5,10,15,20")
    p.add_argument("--queries-per-count", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--retries", type=int, default=querygen.DEFAULT_RETRY_LIMIT)
    p.add_argument("--min-length", type=int, default=querygen.DEFAULT_MIN_STORY_CHARS)
    p.add_argument("--min-doc-chars", type=int, default=querygen.DEFAULT_MIN_DOC_CHARS)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen_queries)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ExternalServiceError as exc:
        _log(f"error: {exc}")
        return EXIT_EXTERNAL
    except (DataError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
