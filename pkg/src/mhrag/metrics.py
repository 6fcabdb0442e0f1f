"""Multi-aspect retrieval quality metrics.

A query with n aspects names n ground-truth documents from n distinct
categories. Three ratios grade a retrieved set against that ground truth:

  success ratio            fraction of ground-truth documents retrieved
  category success ratio   fraction of ground-truth categories covered by
                           at least one retrieved document (one credit per
                           category, so the ratio stays within [0, 1])
  weighted success ratio   (w * ratio + category_ratio) / (w + 1)

The default weighting w = 2 prioritizes exact document matches over mere
category matches 2:1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError
from .store import MultiSpaceStore

DEFAULT_WEIGHT = 2.0


class MetricsError(DataError):
    pass


@dataclass(frozen=True)
class EvalQuery:
    """One evaluation query with its ideal retrieval outcome."""

    id: str
    text: str
    aspects: int
    ground_truth: tuple[tuple[str, str], ...]  # (document id, category)

    def __post_init__(self) -> None:
        if not self.id:
            raise MetricsError("query id must be non-empty")
        if self.aspects < 1:
            raise MetricsError(f"query {self.id!r}: aspects must be >= 1")
        if len(self.ground_truth) != self.aspects:
            raise MetricsError(
                f"query {self.id!r}: {len(self.ground_truth)} ground-truth entries for {self.aspects} aspects"
            )
        ids = [d for d, _ in self.ground_truth]
        cats = [c for _, c in self.ground_truth]
        if len(set(ids)) != len(ids):
            raise MetricsError(f"query {self.id!r}: duplicate ground-truth document ids")
        if len(set(cats)) != len(cats):
            raise MetricsError(f"query {self.id!r}: duplicate ground-truth categories")

    @property
    def ground_truth_ids(self) -> frozenset[str]:
        return frozenset(d for d, _ in self.ground_truth)

    @property
    def ground_truth_categories(self) -> frozenset[str]:
        return frozenset(c for _, c in self.ground_truth)


@dataclass(frozen=True)
class EvalResult:
    """Metric values for one (query, strategy, fetch count) cell."""

    query_id: str
    strategy_tag: str
    aspects: int
    k: int
    xi: float
    xi_c: float
    xi_w: float
    matched_ids: tuple[str, ...]
    matched_categories: tuple[str, ...]


def success_ratio(
    retrieved_ids: Sequence[str], ground_truth: Sequence[tuple[str, str]]
) -> float:
    """Fraction of ground-truth document ids present in the retrieved set."""
    if not ground_truth:
        raise MetricsError("ground truth must be non-empty")
    wanted = {d for d, _ in ground_truth}
    return len(wanted & set(retrieved_ids)) / len(wanted)


def category_success_ratio(
    retrieved_ids: Sequence[str],
    ground_truth: Sequence[tuple[str, str]],
    corpus: MultiSpaceStore,
) -> float:
    """Fraction of ground-truth categories covered by the retrieved set.

    Retrieved ids resolve to categories through the corpus. A category can
    earn at most one credit no matter how many of its documents appear.
    """
    if not ground_truth:
        raise MetricsError("ground truth must be non-empty")
    wanted = {c for _, c in ground_truth}
    covered = set()
    for cid in retrieved_ids:
        if cid not in corpus:
            raise MetricsError(f"retrieved chunk {cid!r} not present in the corpus")
        cat = corpus.chunk(cid).category
        if cat in wanted:
            covered.add(cat)
    return len(covered) / len(wanted)


def weighted_success_ratio(xi: float, xi_c: float, w: float = DEFAULT_WEIGHT) -> float:
    """(w * xi + xi_c) / (w + 1); requires w > 0."""
    if w <= 0:
        raise MetricsError(f"weight must be positive, got {w}")
    return (w * xi + xi_c) / (w + 1)


def evaluate_retrieval(
    query: EvalQuery,
    retrieved_ids: Sequence[str],
    corpus: MultiSpaceStore,
    strategy_tag: str,
    k: int,
    w: float = DEFAULT_WEIGHT,
) -> EvalResult:
    """Grade one retrieved list; records which ids and categories matched."""
    xi = success_ratio(retrieved_ids, query.ground_truth)
    xi_c = category_success_ratio(retrieved_ids, query.ground_truth, corpus)
    wanted_ids = query.ground_truth_ids
    wanted_cats = query.ground_truth_categories
    matched_ids = tuple(cid for cid in retrieved_ids if cid in wanted_ids)
    seen: list[str] = []
    for cid in retrieved_ids:
        cat = corpus.chunk(cid).category
        if cat in wanted_cats and cat not in seen:
            seen.append(cat)
    return EvalResult(
        query_id=query.id,
        strategy_tag=strategy_tag,
        aspects=query.aspects,
        k=k,
        xi=xi,
        xi_c=xi_c,
        xi_w=weighted_success_ratio(xi, xi_c, w),
        matched_ids=matched_ids,
        matched_categories=tuple(seen),
    )


def write_queries(path: str | Path, queries: Iterable[EvalQuery]) -> int:
    """Write queries as JSON-Lines; returns the count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for q in queries:
            obj = {
                "id": q.id,
                "text": q.text,
                "aspects": q.aspects,
                "ground_truth": [{"id": d, "category": c} for d, c in q.ground_truth],
            }
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
            count += 1
    return count


def read_queries(path: str | Path) -> list[EvalQuery]:
    path = Path(path)
    out: list[EvalQuery] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                out.append(
                    EvalQuery(
                        id=str(obj["id"]),
                        text=str(obj["text"]),
                        aspects=int(obj["aspects"]),
                        ground_truth=tuple(
                            (str(g["id"]), str(g["category"])) for g in obj["ground_truth"]
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MetricsError(f"{path}: line {lineno}: bad query: {exc}") from exc
    return out
