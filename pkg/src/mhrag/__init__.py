"""Multi-space retrieval engine.

Stores one embedding per attention head per text chunk, scores head
importance, retrieves through weighted cross-space voting, and evaluates
retrieval quality with multi-aspect metrics against single-space baselines.
"""

from .errors import DataError, ExternalServiceError, MhragError
from .evaluation import (
    AggregateRow,
    EvalRun,
    StrategyRunner,
    aggregate,
    aggregates_csv,
    results_csv,
    run_evaluation,
)
from .metrics import (
    EvalQuery,
    EvalResult,
    category_success_ratio,
    evaluate_retrieval,
    success_ratio,
    weighted_success_ratio,
)
from .planted import PlantedCorpus, PlantedCorpusSpec, generate_planted, make_planted_queries
from .querygen import (
    CategorySpec,
    QueryPlan,
    StoryQueryResult,
    generate_story_queries,
    generate_story_query,
    sample_query_plans,
    story_prompt,
)
from .scoring import HeadScores, compute_scores, head_norm_means, head_spread_means
from .store import (
    ChunkRecord,
    MultiAspectEmbedding,
    MultiSpaceStore,
    StoreManifest,
    cosine_distance,
    ingest,
)
from .strategies import (
    QueryEmbedding,
    RankedRetrieval,
    StrategyConfig,
    retrieve_fusion,
    retrieve_mrag,
    retrieve_mrag1,
    retrieve_mrag2,
    retrieve_standard,
    split_store,
    split_vector,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateRow",
    "CategorySpec",
    "ChunkRecord",
    "DataError",
    "EvalQuery",
    "EvalResult",
    "EvalRun",
    "ExternalServiceError",
    "HeadScores",
    "MhragError",
    "MultiAspectEmbedding",
    "MultiSpaceStore",
    "PlantedCorpus",
    "PlantedCorpusSpec",
    "QueryEmbedding",
    "QueryPlan",
    "RankedRetrieval",
    "StoreManifest",
    "StoryQueryResult",
    "StrategyConfig",
    "StrategyRunner",
    "aggregate",
    "aggregates_csv",
    "category_success_ratio",
    "compute_scores",
    "cosine_distance",
    "evaluate_retrieval",
    "generate_planted",
    "generate_story_queries",
    "generate_story_query",
    "head_norm_means",
    "head_spread_means",
    "ingest",
    "make_planted_queries",
    "results_csv",
    "retrieve_fusion",
    "retrieve_mrag",
    "retrieve_mrag1",
    "retrieve_mrag2",
    "retrieve_standard",
    "run_evaluation",
    "sample_query_plans",
    "split_store",
    "split_vector",
    "story_prompt",
    "success_ratio",
    "weighted_success_ratio",
]
