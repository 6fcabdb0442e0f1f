#!/usr/bin/env python3
"""Grade a retrieved list with the three multi-aspect metrics.

A query with n aspects names n ground-truth documents from n distinct
categories. The exact-match ratio counts retrieved ground-truth documents;
the category ratio gives one credit per covered category; the weighted
ratio blends the two (2:1 by default, prioritizing exact matches).
"""

from mhrag import (
    ChunkRecord,
    EvalQuery,
    MultiAspectEmbedding,
    StoreManifest,
    evaluate_retrieval,
    ingest,
    success_ratio,
    category_success_ratio,
    weighted_success_ratio,
)

catalog = {
    "sword-1": "swords", "sword-2": "swords",
    "star-1": "stars", "star-2": "stars",
    "tree-1": "trees",
    "rock-1": "rocks",
}
manifest = StoreManifest(h=1, d_head=2, d_full=2, model_tag="demo")
store = ingest(
    manifest,
    (
        (ChunkRecord(id=cid, text=cid, category=cat), MultiAspectEmbedding.from_rows([[1.0, 0.0]]), None)
        for cid, cat in catalog.items()
    ),
)

query = EvalQuery(
    id="demo",
    text="a story touching swords, stars and trees",
    aspects=3,
    ground_truth=(("sword-1", "swords"), ("star-1", "stars"), ("tree-1", "trees")),
)

retrieved = ["sword-1", "sword-2", "star-2", "rock-1"]
print("ground truth:", [d for d, _ in query.ground_truth])
print("retrieved:   ", retrieved)
print()

xi = success_ratio(retrieved, query.ground_truth)
xi_c = category_success_ratio(retrieved, query.ground_truth, store)
print(f"exact-match ratio    : {xi:.4f}   (sword-1 only -> 1/3)")
print(f"category ratio       : {xi_c:.4f}   (swords via sword-1, stars via star-2 -> 2/3)")
print(f"weighted ratio (w=2) : {weighted_success_ratio(xi, xi_c):.4f}")
print()
print("note: sword-2 adds nothing, swords already earned its single credit")

result = evaluate_retrieval(query, retrieved, store, strategy_tag="demo", k=4)
print()
print("full result row:", result)
