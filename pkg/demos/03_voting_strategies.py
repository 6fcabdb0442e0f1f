#!/usr/bin/env python3
"""Walk through the cross-space voting strategy on a hand-sized example.

Each space contributes its top-c list; the chunk at position p of space i
earns weight s_i * 2^-p, and weights of a chunk seen in several spaces are
summed. The demo also shows the rank-only and inverse-distance variants and
the split control that slices the full-size vector instead of using heads.
"""

import numpy as np

from mhrag import (
    ChunkRecord,
    MultiAspectEmbedding,
    StoreManifest,
    compute_scores,
    ingest,
    retrieve_mrag,
    retrieve_mrag1,
    retrieve_mrag2,
    retrieve_standard,
    split_store,
    split_vector,
)
from mhrag.scoring import HeadScores

def at(deg):
    rad = np.radians(deg)
    return [float(np.cos(rad)), float(np.sin(rad))]

# Two spaces. Space 0 ranks A then B near the query; space 1 ranks B then C.
manifest = StoreManifest(h=2, d_head=2, d_full=4, model_tag="demo")
rows = {
    "A": [at(5), at(90)],
    "B": [at(25), at(8)],
    "C": [at(90), at(30)],
}
store = ingest(
    manifest,
    (
        (
            ChunkRecord(id=cid, text=cid),
            MultiAspectEmbedding.from_rows(vecs),
            np.array(vecs[0] + vecs[1]),
        )
        for cid, vecs in rows.items()
    ),
)
query = MultiAspectEmbedding.from_rows([at(0), at(0)])

scores = HeadScores(a=np.ones(2), b=np.array([1.0, 0.5]), s=np.array([1.0, 0.5]), sample_size=None, seed=0)
print("importance scores per space:", scores.s.tolist())
ranked = retrieve_mrag(store, scores, query, k=3, c=2)
print("voting result (id, summed weight):")
for cid, weight in ranked.entries:
    print(f"  {cid}: {weight:.4f}")
print("  A earns 1.0*2^0 in space 0; B earns 1.0*2^-1 + 0.5*2^0 = 1.0 -> tie broken by id")

print()
print("variants over the same store and query:")
print("  rank-only   :", retrieve_mrag1(store, query, k=3, c=2).ids)
print("  1/distance  :", retrieve_mrag2(store, query, k=3, c=2).ids)

print()
print("split control: slice the full-size vector into h blocks and vote")
split = split_store(store)
split_query = split_vector(np.array(at(0) + at(0)), h=2)
split_ranked = retrieve_mrag(split, compute_scores(split), split_query, k=3, c=2)
print("  split ids   :", split_ranked.ids)
print("  standard    :", retrieve_standard(store, np.array(at(0) + at(0)), k=3).ids)
