import numpy as np
import pytest

from mhrag.store import ChunkRecord, MultiAspectEmbedding, StoreManifest, ingest


def build_store(heads_by_id, standard_by_id=None, categories=None, model_tag="test"):
    """Seal a store from {chunk_id: [[head vectors]]} plus optional extras."""
    first = next(iter(heads_by_id.values()))
    h, d_head = len(first), len(first[0])
    manifest = StoreManifest(h=h, d_head=d_head, d_full=h * d_head, model_tag=model_tag)
    categories = categories or {}

    def records():
        for cid, rows in heads_by_id.items():
            chunk = ChunkRecord(id=cid, text=f"text of {cid}", category=categories.get(cid, ""))
            std = None
            if standard_by_id is not None:
                std = np.asarray(standard_by_id[cid], dtype=np.float64)
            yield chunk, MultiAspectEmbedding.from_rows(rows), std

    return ingest(manifest, records())


def random_store(rng, n_chunks, h, d_head, with_standard=False):
    """Random store with well-spread vectors; ids carry a shuffled suffix."""
    heads = {}
    standard = {} if with_standard else None
    for i in range(n_chunks):
        cid = f"c{i:03d}"
        heads[cid] = rng.normal(size=(h, d_head)).tolist()
        if with_standard:
            standard[cid] = rng.normal(size=h * d_head).tolist()
    return build_store(heads, standard_by_id=standard)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
