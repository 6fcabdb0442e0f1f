#!/usr/bin/env python3
"""Build a tiny multi-space store and poke at exact cosine search.

Every chunk carries one small vector per embedding space. Searching happens
per space; different spaces can rank the same corpus very differently.
"""

import numpy as np

from mhrag import ChunkRecord, MultiAspectEmbedding, StoreManifest, ingest

rng = np.random.default_rng(7)

# Three chunks, two spaces, four dimensions per space. Space 0 is built so
# that "alpha" and "beta" point the same way; space 1 separates them.
manifest = StoreManifest(h=2, d_head=4, d_full=8, model_tag="demo")
vectors = {
    "alpha": [[1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]],
    "beta": [[0.9, 0.1, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]],
    "gamma": [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.7, 0.7]],
}

store = ingest(
    manifest,
    (
        (ChunkRecord(id=cid, text=f"chunk {cid}"), MultiAspectEmbedding.from_rows(rows), None)
        for cid, rows in vectors.items()
    ),
)
print(f"sealed store: {len(store)} chunks, {store.manifest.h} spaces of {store.manifest.d_head} dims")

query = np.array([1.0, 0.05, 0.0, 0.0])
for space in range(2):
    hits = store.nearest(space, query, c=3)
    pretty = ", ".join(f"{cid} @ {dist:.3f}" for cid, dist in hits)
    print(f"space {space} nearest: {pretty}")

print()
print("identical direction means distance zero, opposite direction means two:")
probe = store.nearest(0, np.array([1.0, 0.0, 0.0, 0.0]), c=3)
print("  query == alpha's space-0 vector ->", probe[0])
probe = store.nearest(0, np.array([-1.0, 0.0, 0.0, 0.0]), c=3)
print("  reversed query ->", probe[-1])
