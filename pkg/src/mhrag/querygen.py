"""Evaluation query construction.

Query plans pick n distinct categories and one document from each; a plan
batch (all plans for one aspect count) never reuses a document. Plans can
then be turned into natural-language story queries by prompting a chat
model to weave every picked document into one story; responses that fail
the mention checks are retried and finally flagged for manual review.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DataError
from .interchange import read_records

DEFAULT_ASPECT_COUNTS = (1, 5, 10, 15, 20)
DEFAULT_QUERIES_PER_COUNT = 25
DEFAULT_MIN_DOC_CHARS = 800
DEFAULT_MIN_STORY_CHARS = 400
DEFAULT_RETRY_LIMIT = 3


class DatagenError(DataError):
    pass


@dataclass(frozen=True)
class CategorySpec:
    """A named document pool; texts must be long enough to embed usefully."""

    name: str
    documents: tuple[tuple[str, str, str], ...]  # (id, title, text)
    min_chars: int = DEFAULT_MIN_DOC_CHARS

    def __post_init__(self) -> None:
        if not self.name:
            raise DatagenError("category name must be non-empty")
        ids = [d for d, _, _ in self.documents]
        if len(set(ids)) != len(ids):
            raise DatagenError(f"category {self.name!r}: duplicate document ids")
        for doc_id, _, text in self.documents:
            if len(text) < self.min_chars:
                raise DatagenError(
                    f"category {self.name!r}: document {doc_id!r} has {len(text)} chars, "
                    f"minimum is {self.min_chars}"
                )

    @property
    def document_ids(self) -> tuple[str, ...]:
        return tuple(d for d, _, _ in self.documents)


@dataclass(frozen=True)
class QueryPlan:
    """n picks of (category, document id), categories pairwise distinct."""

    aspects: int
    picks: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if len(self.picks) != self.aspects:
            raise DatagenError(f"plan has {len(self.picks)} picks for {self.aspects} aspects")
        cats = [c for c, _ in self.picks]
        if len(set(cats)) != len(cats):
            raise DatagenError("plan categories must be pairwise distinct")


def load_categories(
    records_path: str | Path, min_chars: int = DEFAULT_MIN_DOC_CHARS
) -> list[CategorySpec]:
    """Group a document JSONL file into category pools.

    Uses the corpus record format; the `source` field doubles as the
    document title (falling back to the id).
    """
    pools: dict[str, list[tuple[str, str, str]]] = {}
    for chunk, _, _ in read_records(records_path):
        if not chunk.category:
            raise DatagenError(f"document {chunk.id!r} has no category")
        pools.setdefault(chunk.category, []).append(
            (chunk.id, chunk.source or chunk.id, chunk.text)
        )
    return [
        CategorySpec(name=name, documents=tuple(docs), min_chars=min_chars)
        for name, docs in pools.items()
    ]


def _as_pools(
    categories: Sequence[CategorySpec] | Mapping[str, Sequence[str]],
) -> dict[str, list[str]]:
    if isinstance(categories, Mapping):
        return {name: list(doc_ids) for name, doc_ids in categories.items()}
    return {spec.name: list(spec.document_ids) for spec in categories}


def sample_query_plans(
    categories: Sequence[CategorySpec] | Mapping[str, Sequence[str]],
    aspect_counts: Sequence[int] = DEFAULT_ASPECT_COUNTS,
    queries_per_count: int = DEFAULT_QUERIES_PER_COUNT,
    seed: int = 0,
) -> list[QueryPlan]:
    """Sample plans for every aspect count; deterministic given the seed.

    Within one aspect count's batch no document is picked twice; across
    batches documents may recur.
    """
    pools = _as_pools(categories)
    names = list(pools)
    if not names:
        raise DatagenError("no categories to sample from")
    top = max(aspect_counts)
    if top > len(names):
        raise DatagenError(f"{top} aspects requested but only {len(names)} categories exist")
    rng = random.Random(seed)
    plans: list[QueryPlan] = []
    for n in aspect_counts:
        used: set[str] = set()
        for _ in range(queries_per_count):
            eligible = [name for name in names if any(d not in used for d in pools[name])]
            if len(eligible) < n:
                raise DatagenError(
                    f"not enough categories with unused documents for {n} aspects "
                    f"({len(eligible)} available)"
                )
            picked_cats = rng.sample(eligible, n)
            picks = []
            for cat in picked_cats:
                doc = rng.choice([d for d in pools[cat] if d not in used])
                used.add(doc)
                picks.append((cat, doc))
            plans.append(QueryPlan(aspects=n, picks=tuple(picks)))
    return plans


def story_prompt(plan: QueryPlan, documents: Mapping[str, tuple[str, str]]) -> str:
    """Assemble the story-generation prompt; a pure function of its inputs.

    `documents` maps document id to (title, body).
    """
    titles = [documents[doc_id][0] for _, doc_id in plan.picks]
    title_list = ", ".join(titles)
    parts = [
        f"Please create a story about the attached {plan.aspects} articles "
        f"on the topics {title_list}.",
        "",
        "It is very important that each of the attached articles is relevant to the story, "
        "in a way that references the content of the article, not just its title. "
        "But please also mention each title at least once. "
        "Please make sure that all of the attached articles are relevant to your story, "
        "and that each article is referenced in at least two sentences! "
        "They do not necessarily have to be referenced in the same order, "
        "but make sure no article is forgotten.",
        "",
        "Important: Output only the story, no additional text. "
        "And do not use bullet points, or paragraphs.",
        "",
        "Articles:",
        "---------",
    ]
    for _, doc_id in plan.picks:
        title, body = documents[doc_id]
        parts.append(f"Article {title}:")
        parts.append(body)
        parts.append("")
    parts.append("---------")
    parts.append(
        f"Again, make sure that you reference all the following topics in your story: {title_list}"
    )
    return "\n".join(parts)


@dataclass(frozen=True)
class StoryQueryResult:
    """Outcome of one story-generation attempt sequence."""

    plan: QueryPlan
    text: str
    flagged: bool
    attempts: int
    missing_titles: tuple[str, ...]


def _missing_titles(text: str, titles: Sequence[str]) -> tuple[str, ...]:
    lowered = text.lower()
    return tuple(t for t in titles if t.lower() not in lowered)


def generate_story_query(
    plan: QueryPlan,
    documents: Mapping[str, tuple[str, str]],
    complete: Callable[[str], str],
    retry_limit: int = DEFAULT_RETRY_LIMIT,
    min_length: int = DEFAULT_MIN_STORY_CHARS,
) -> StoryQueryResult:
    """Prompt for one story and validate it.

    The response must mention every picked title at least once and reach
    `min_length` characters. Up to `retry_limit` attempts are made; if all
    fail the last response is returned flagged for manual review.
    Transport and auth errors are not retried here and propagate.
    """
    if retry_limit < 1:
        raise DatagenError("retry_limit must be >= 1")
    prompt = story_prompt(plan, documents)
    titles = [documents[doc_id][0] for _, doc_id in plan.picks]
    text = ""
    missing: tuple[str, ...] = tuple(titles)
    for attempt in range(1, retry_limit + 1):
        text = complete(prompt)
        missing = _missing_titles(text, titles)
        if not missing and len(text) >= min_length:
            return StoryQueryResult(plan, text, flagged=False, attempts=attempt, missing_titles=())
    return StoryQueryResult(plan, text, flagged=True, attempts=retry_limit, missing_titles=missing)


def generate_story_queries(
    plans: Sequence[QueryPlan],
    documents: Mapping[str, tuple[str, str]],
    complete: Callable[[str], str],
    parallelism: int = 1,
    retry_limit: int = DEFAULT_RETRY_LIMIT,
    min_length: int = DEFAULT_MIN_STORY_CHARS,
) -> list[StoryQueryResult]:
    """Generate stories for all plans, preserving plan order in the output."""

    def work(plan: QueryPlan) -> StoryQueryResult:
        return generate_story_query(plan, documents, complete, retry_limit, min_length)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            return list(pool.map(work, plans))
    return [work(plan) for plan in plans]


def write_flagged_report(path: str | Path, results: Iterable[StoryQueryResult]) -> int:
    """Write flagged story results as JSONL for manual review."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in results:
            if not r.flagged:
                continue
            obj = {
                "aspects": r.plan.aspects,
                "picks": [{"category": c, "id": d} for c, d in r.plan.picks],
                "attempts": r.attempts,
                "missing_titles": list(r.missing_titles),
                "text": r.text,
            }
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
            count += 1
    return count
