"""Evaluation harness: sweep strategies over queries and fetch counts.

One result row is produced per (query, strategy, k) cell. Rows are always
assembled in canonical order (query id, strategy tag, k) so a run with the
same inputs and seeds is byte-identical, regardless of worker count.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DataError
from .metrics import DEFAULT_WEIGHT, EvalQuery, EvalResult, evaluate_retrieval
from .scoring import HeadScores, compute_scores
from .store import MultiSpaceStore
from .strategies import (
    QueryEmbedding,
    QuestionGenerator,
    RankedRetrieval,
    StrategyConfig,
    StrategyError,
    retrieve_mrag,
    retrieve_mrag1,
    retrieve_mrag2,
    retrieve_fusion,
    retrieve_standard,
    split_store,
    split_vector,
)

RESULT_COLUMNS = ("query_id", "strategy", "aspects", "k", "xi", "xi_c", "xi_w")
AGGREGATE_COLUMNS = (
    "strategy",
    "aspects",
    "k",
    "metric",
    "mean",
    "median",
    "q1",
    "q3",
    "min",
    "max",
    "count",
)


class EvaluationError(DataError):
    pass


@dataclass(frozen=True)
class AggregateRow:
    """Five-number summary plus mean for one metric of one sweep cell."""

    strategy_tag: str
    aspects: int
    k: int
    metric: str
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float
    count: int


@dataclass
class EvalRun:
    rows: list[EvalResult]
    aggregates: list[AggregateRow]
    failures: list[tuple[str, str]] = field(default_factory=list)


class StrategyRunner:
    """Executes strategy configs against one sealed store.

    Derives the split store and per-store importance scores lazily and
    caches them, so a sweep pays the preparation cost once.
    """

    def __init__(
        self,
        store: MultiSpaceStore,
        scores: HeadScores | None = None,
        question_gen: QuestionGenerator | None = None,
    ) -> None:
        self.store = store
        self._scores = scores
        self._question_gen = question_gen
        self._split: MultiSpaceStore | None = None
        self._split_scores: HeadScores | None = None

    @property
    def scores(self) -> HeadScores:
        if self._scores is None:
            self._scores = compute_scores(self.store)
        return self._scores

    @property
    def split(self) -> MultiSpaceStore:
        if self._split is None:
            self._split = split_store(self.store)
        return self._split

    @property
    def split_scores(self) -> HeadScores:
        if self._split_scores is None:
            self._split_scores = compute_scores(self.split)
        return self._split_scores

    def run(
        self, config: StrategyConfig, query: QueryEmbedding, query_text: str = ""
    ) -> RankedRetrieval:
        kind, k, c = config.kind, config.k, config.effective_c
        if kind == "standard":
            return retrieve_standard(self.store, self._standard_of(query), k)
        if kind == "mrag":
            return retrieve_mrag(self.store, self.scores, self._heads_of(query), k, c)
        if kind == "mrag1":
            return retrieve_mrag1(self.store, self._heads_of(query), k, c)
        if kind == "mrag2":
            return retrieve_mrag2(self.store, self._heads_of(query), k, c)
        if kind in ("split", "split2", "split1"):
            split_query = split_vector(self._standard_of(query), self.store.manifest.h)
            if kind == "split1":
                return retrieve_mrag1(self.split, split_query, k, c, tag=kind)
            return retrieve_mrag(self.split, self.split_scores, split_query, k, c, tag=kind)
        if kind == "fusion":
            if self._question_gen is None:
                raise StrategyError("fusion strategy requires a question generator")
            base = config.base
            assert base is not None
            return retrieve_fusion(
                lambda q: self.run(base, q),
                self._question_gen,
                query_text,
                k,
                config.num_questions,
                tag=config.tag,
            )
        raise StrategyError(f"unknown strategy kind {kind!r}")

    @staticmethod
    def _standard_of(query: QueryEmbedding) -> np.ndarray:
        if query.standard is None:
            raise StrategyError("query embedding lacks the full-size vector")
        return query.standard

    @staticmethod
    def _heads_of(query: QueryEmbedding):
        if query.heads is None:
            raise StrategyError("query embedding lacks the per-head block")
        return query.heads


def run_evaluation(
    store: MultiSpaceStore,
    queries: Sequence[EvalQuery],
    strategies: Sequence[StrategyConfig],
    k_values: Sequence[int],
    query_embedder: Callable[[EvalQuery], QueryEmbedding],
    scores: HeadScores | None = None,
    question_gen: QuestionGenerator | None = None,
    w: float = DEFAULT_WEIGHT,
    jobs: int | None = None,
) -> EvalRun:
    """Evaluate every (query, strategy, k) cell.

    A query whose embedding fails is recorded and skipped; the run fails
    only when no query could be embedded at all. Cells are independent and
    can run on several workers without affecting the output bytes.
    """
    if not queries:
        raise EvaluationError("no queries to evaluate")
    if not strategies or not k_values:
        raise EvaluationError("need at least one strategy and one k value")
    if len({q.id for q in queries}) != len(queries):
        raise EvaluationError("duplicate query ids")

    runner = StrategyRunner(store, scores=scores, question_gen=question_gen)

    embedded: list[tuple[EvalQuery, QueryEmbedding]] = []
    failures: list[tuple[str, str]] = []
    for q in queries:
        try:
            embedded.append((q, query_embedder(q)))
        except Exception as exc:  # noqa: BLE001 - provider failures are data, not bugs
            failures.append((q.id, str(exc)))
    if not embedded:
        raise EvaluationError("all queries failed to embed")

    cells = [
        (q, emb, cfg, k)
        for q, emb in embedded
        for cfg in strategies
        for k in k_values
    ]

    def evaluate_cell(cell) -> EvalResult:
        q, emb, cfg, k = cell
        ranked = runner.run(cfg.with_k(k), emb, query_text=q.text)
        return evaluate_retrieval(q, ranked.ids, store, ranked.strategy_tag, k, w=w)

    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate_cell, cells))
    else:
        rows = [evaluate_cell(cell) for cell in cells]

    rows.sort(key=lambda r: (r.query_id, r.strategy_tag, r.k))
    return EvalRun(rows=rows, aggregates=aggregate(rows), failures=failures)


def aggregate(rows: Sequence[EvalResult]) -> list[AggregateRow]:
    """Per-(strategy, aspects, k) summaries of each metric, canonical order."""
    groups: dict[tuple[str, int, int], list[EvalResult]] = {}
    for r in rows:
        groups.setdefault((r.strategy_tag, r.aspects, r.k), []).append(r)
    out: list[AggregateRow] = []
    for (tag, aspects, k) in sorted(groups):
        members = groups[(tag, aspects, k)]
        for metric in ("xi", "xi_c", "xi_w"):
            values = np.array([getattr(r, metric) for r in members], dtype=np.float64)
            q1, med, q3 = np.percentile(values, [25.0, 50.0, 75.0])
            out.append(
                AggregateRow(
                    strategy_tag=tag,
                    aspects=aspects,
                    k=k,
                    metric=metric,
                    mean=float(values.mean()),
                    median=float(med),
                    q1=float(q1),
                    q3=float(q3),
                    min=float(values.min()),
                    max=float(values.max()),
                    count=len(values),
                )
            )
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def results_csv(rows: Sequence[EvalResult]) -> str:
    """Render result rows as CSV text with full round-trip decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in rows:
        writer.writerow(
            [r.query_id, r.strategy_tag, r.aspects, r.k, _fmt(r.xi), _fmt(r.xi_c), _fmt(r.xi_w)]
        )
    return buf.getvalue()


def aggregates_csv(rows: Sequence[AggregateRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGGREGATE_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.strategy_tag,
                r.aspects,
                r.k,
                r.metric,
                _fmt(r.mean),
                _fmt(r.median),
                _fmt(r.q1),
                _fmt(r.q3),
                _fmt(r.min),
                _fmt(r.max),
                r.count,
            ]
        )
    return buf.getvalue()


def read_results_csv(path) -> list[EvalResult]:
    """Load result rows back from CSV (matched columns are not persisted)."""
    out: list[EvalResult] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != RESULT_COLUMNS:
            raise EvaluationError(f"{path}: unexpected results header {reader.fieldnames}")
        for rec in reader:
            out.append(
                EvalResult(
                    query_id=rec["query_id"],
                    strategy_tag=rec["strategy"],
                    aspects=int(rec["aspects"]),
                    k=int(rec["k"]),
                    xi=float(rec["xi"]),
                    xi_c=float(rec["xi_c"]),
                    xi_w=float(rec["xi_w"]),
                    matched_ids=(),
                    matched_categories=(),
                )
            )
    return out
