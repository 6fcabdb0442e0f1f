"""Retrieval strategies.

The multi-space voting strategy queries every embedding space separately,
then merges the h per-space candidate lists into one ranking: the chunk at
0-based position p of space i's list receives weight s_i * 2^-p, weights of
the same chunk met in several spaces are summed, and the top k chunks by
total weight win (ties broken by ascending chunk id).

Variants swap the weight rule (2^-p alone, or inverse distance), the split
strategies run the same voting over contiguous slices of the full-size
vectors, and the fusion wrapper runs a base strategy once per LLM-generated
sub-question and merges the per-question rankings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .errors import DataError, ExternalServiceError
from .scoring import HeadScores
from .store import MultiAspectEmbedding, MultiSpaceStore, StoreManifest, ingest

STRATEGY_KINDS = ("standard", "mrag", "split", "mrag1", "mrag2", "split1", "split2", "fusion")

# Guard for inverse-distance weights: an exact match would otherwise produce
# an infinite weight.
MIN_DISTANCE = 1e-9


class StrategyError(DataError):
    pass


class QuestionGenerationError(ExternalServiceError):
    """Sub-question generation failed; carries the provider's message."""


@dataclass(frozen=True)
class RankedRetrieval:
    """Strategy output: (chunk id, weight) pairs, best first."""

    entries: tuple[tuple[str, float], ...]
    strategy_tag: str
    k: int

    def __post_init__(self) -> None:
        ids = [cid for cid, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise StrategyError("ranked retrieval has duplicate chunk ids")
        weights = [w for _, w in self.entries]
        if any(weights[i] < weights[i + 1] for i in range(len(weights) - 1)):
            raise StrategyError("ranked retrieval weights must be non-increasing")
        if len(self.entries) > self.k:
            raise StrategyError(f"ranked retrieval longer than k={self.k}")

    @property
    def ids(self) -> list[str]:
        return [cid for cid, _ in self.entries]


@dataclass(frozen=True)
class StrategyConfig:
    """Declarative description of one retrieval strategy.

    `c` is the per-space candidate list length and defaults to `k`.
    Fusion wraps a non-fusion `base` config and generates `num_questions`
    sub-questions.
    """

    kind: str
    k: int
    c: int | None = None
    base: "StrategyConfig | None" = None
    num_questions: int = 4

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise StrategyError(f"unknown strategy kind {self.kind!r}")
        if self.k < 1:
            raise StrategyError(f"k must be >= 1, got {self.k}")
        if self.c is not None and self.c < 1:
            raise StrategyError(f"c must be >= 1, got {self.c}")
        if self.kind == "fusion":
            if self.base is None or self.base.kind == "fusion":
                raise StrategyError("fusion requires a non-fusion base strategy")
            if self.num_questions < 1:
                raise StrategyError("fusion needs num_questions >= 1")

    @property
    def effective_c(self) -> int:
        return self.c if self.c is not None else self.k

    @property
    def tag(self) -> str:
        return f"fusion-{self.base.kind}" if self.kind == "fusion" else self.kind

    def with_k(self, k: int) -> "StrategyConfig":
        base = self.base.with_k(k) if self.base is not None else None
        return StrategyConfig(self.kind, k, self.c, base, self.num_questions)


@dataclass(frozen=True)
class QueryEmbedding:
    """Embeddings of one query: per-head block and/or full-size vector."""

    heads: MultiAspectEmbedding | None = None
    standard: np.ndarray | None = None


class QuestionGenerator(Protocol):
    """Produces sub-questions with embeddings for the fusion wrapper."""

    def __call__(self, query_text: str, num_questions: int) -> list[tuple[str, QueryEmbedding]]:
        ...


def _top_k(weights: dict[str, float], k: int, tag: str) -> RankedRetrieval:
    ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    return RankedRetrieval(entries=tuple(ranked), strategy_tag=tag, k=k)


def retrieve_standard(store: MultiSpaceStore, query_vec: np.ndarray, k: int) -> RankedRetrieval:
    """Single-space baseline over the full-size vectors.

    Weight is the negated cosine distance, so entries stay best-first.
    """
    hits = store.nearest_standard(query_vec, k)
    return RankedRetrieval(
        entries=tuple((cid, -dist) for cid, dist in hits), strategy_tag="standard", k=k
    )


def _check_query_heads(store: MultiSpaceStore, query: MultiAspectEmbedding) -> None:
    if query.h != store.manifest.h:
        raise StrategyError(
            f"query has {query.h} heads but store expects {store.manifest.h}"
        )


def _vote(
    store: MultiSpaceStore,
    query: MultiAspectEmbedding,
    k: int,
    c: int | None,
    weight_of: Callable[[int, int, float], float],
    tag: str,
) -> RankedRetrieval:
    _check_query_heads(store, query)
    c = c if c is not None else k
    totals: dict[str, float] = {}
    for i in range(store.manifest.h):
        for p, (cid, dist) in enumerate(store.nearest(i, query.head(i), c)):
            totals[cid] = totals.get(cid, 0.0) + weight_of(i, p, dist)
    return _top_k(totals, k, tag)


def retrieve_mrag(
    store: MultiSpaceStore,
    scores: HeadScores,
    query: MultiAspectEmbedding,
    k: int,
    c: int | None = None,
    tag: str = "mrag",
) -> RankedRetrieval:
    """Importance-weighted voting: position p in space i scores s_i * 2^-p."""
    if scores.h != store.manifest.h:
        raise StrategyError(f"scores cover {scores.h} heads but store has {store.manifest.h}")
    s = scores.s
    return _vote(store, query, k, c, lambda i, p, dist: float(s[i]) * 2.0**-p, tag)


def retrieve_mrag1(
    store: MultiSpaceStore,
    query: MultiAspectEmbedding,
    k: int,
    c: int | None = None,
    tag: str = "mrag1",
) -> RankedRetrieval:
    """Rank-only voting: every space contributes 2^-p, no importance scores."""
    return _vote(store, query, k, c, lambda i, p, dist: 2.0**-p, tag)


def retrieve_mrag2(
    store: MultiSpaceStore,
    query: MultiAspectEmbedding,
    k: int,
    c: int | None = None,
    tag: str = "mrag2",
) -> RankedRetrieval:
    """Distance-based voting: each hit contributes 1 / max(distance, 1e-9)."""
    return _vote(store, query, k, c, lambda i, p, dist: 1.0 / max(dist, MIN_DISTANCE), tag)


def split_vector(vec: np.ndarray, h: int) -> MultiAspectEmbedding:
    """Slice a full-size vector into h contiguous equal blocks."""
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] % h != 0:
        raise StrategyError(f"cannot split a vector of shape {vec.shape} into {h} blocks")
    return MultiAspectEmbedding(vec.reshape(h, -1))


def split_store(store: MultiSpaceStore) -> MultiSpaceStore:
    """Derive a store whose space i holds the i-th slice of each standard vector.

    The control baseline: same voting machinery, but the spaces come from
    partitioning the single full-size embedding instead of separate heads.
    """
    if not store.has_standard:
        raise StrategyError("split requires standard vectors")
    m = store.manifest
    manifest = StoreManifest(
        h=m.h,
        d_head=m.d_full // m.h,
        d_full=m.d_full,
        distance=m.distance,
        model_tag=m.model_tag,
        layer_index=m.layer_index,
    )

    def records():
        for chunk, _, std in store.iter_records():
            yield chunk, split_vector(std, m.h), std

    return ingest(manifest, records())


def min_max_normalize(weights: list[float]) -> list[float]:
    """Map weights to [0, 1]; a constant list maps to all ones."""
    if not weights:
        return []
    lo, hi = min(weights), max(weights)
    if hi == lo:
        return [1.0] * len(weights)
    return [(w - lo) / (hi - lo) for w in weights]


def retrieve_fusion(
    base_runner: Callable[[QueryEmbedding], RankedRetrieval],
    question_gen: QuestionGenerator,
    query_text: str,
    k: int,
    num_questions: int,
    tag: str = "fusion",
) -> RankedRetrieval:
    """Run a base strategy once per generated sub-question and merge.

    Per-question weights are min-max normalized to [0, 1] before summation
    so rank-based and distance-based base weights merge on one scale.
    """
    questions = question_gen(query_text, num_questions)
    if not questions:
        raise QuestionGenerationError("question generator returned no questions")
    totals: dict[str, float] = {}
    for _, q_emb in questions:
        ranked = base_runner(q_emb)
        normalized = min_max_normalize([w for _, w in ranked.entries])
        for (cid, _), w in zip(ranked.entries, normalized):
            totals[cid] = totals.get(cid, 0.0) + w
    return _top_k(totals, k, tag)
