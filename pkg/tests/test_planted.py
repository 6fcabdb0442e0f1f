import numpy as np
import pytest

from mhrag.interchange import write_records
from mhrag.planted import (
    PlantedCorpusSpec,
    PlantedError,
    generate_planted,
    make_planted_queries,
    measure_separation,
)
from mhrag.querygen import sample_query_plans
from mhrag.scoring import compute_scores
from mhrag.store import ingest
from mhrag.strategies import retrieve_mrag, split_store


def small_spec(sigma=0.0, **overrides):
    params = dict(
        h=4, d_head=8, num_categories=6, docs_per_category=10, cluster_spread=sigma
    )
    params.update(overrides)
    return PlantedCorpusSpec(**params)


def test_zero_spread_knn_is_category_pure():
    corpus = generate_planted(small_spec(0.0), seed=7)
    store = ingest(corpus.manifest, corpus.iter_records())
    r = corpus.spec.docs_per_category
    for j in range(corpus.spec.h):
        for c, cat in enumerate(corpus.categories):
            hits = store.nearest(j, corpus.centers[c, j], r)
            got = {store.chunk(cid).category for cid, _ in hits}
            assert got == {cat}


def test_mixing_map_is_invertible():
    corpus = generate_planted(small_spec(0.3), seed=3)
    for chunk, emb, std in corpus.iter_records():
        assert np.allclose(corpus.unmix(std), emb.concat(), atol=1e-9)
    # and it genuinely mixes: a slice of the standard vector is not a head
    _, emb0, std0 = next(corpus.iter_records())
    assert not np.allclose(std0[: corpus.spec.d_head], emb0.head(0), atol=1e-3)


def test_same_seed_reproduces_corpus_bytes(tmp_path):
    files = []
    for name in ("one", "two"):
        corpus = generate_planted(small_spec(0.2), seed=11)
        path = tmp_path / f"{name}.jsonl"
        write_records(path, corpus.iter_records())
        files.append(path.read_bytes())
    assert files[0] == files[1]
    other = generate_planted(small_spec(0.2), seed=12)
    path = tmp_path / "three.jsonl"
    write_records(path, other.iter_records())
    assert path.read_bytes() != files[0]


def test_planted_corpus_passes_ingest():
    corpus = generate_planted(small_spec(0.25), seed=5)
    store = ingest(corpus.manifest, corpus.iter_records())
    assert len(store) == 60
    assert store.has_standard
    split = split_store(store)
    assert len(split) == 60


def test_spread_must_stay_below_separation():
    spec = small_spec(0.0)
    sep = measure_separation(spec, seed=9)
    with pytest.raises(PlantedError, match="separation"):
        generate_planted(small_spec(sep * 1.01), seed=9)
    generate_planted(small_spec(sep * 0.9), seed=9)  # just below is fine


def test_measured_separation_matches_realized():
    spec = small_spec(0.4)
    corpus = generate_planted(spec, seed=21)
    assert measure_separation(spec, seed=21) == pytest.approx(corpus.separation)


def test_perfect_recovery_at_zero_spread():
    # Exact query placement on a noise-free corpus recovers every picked
    # document at k = n, for any plan with n <= h.
    corpus = generate_planted(small_spec(0.0), seed=13)
    store = ingest(corpus.manifest, corpus.iter_records())
    scores = compute_scores(store)
    plans = sample_query_plans(
        corpus.category_pools, aspect_counts=[1, 2, 4], queries_per_count=8, seed=2
    )
    pairs = make_planted_queries(corpus, plans, seed=2, query_spread=0.0)
    for query, emb in pairs:
        ranked = retrieve_mrag(store, scores, emb.heads, k=query.aspects)
        assert set(ranked.ids) == set(query.ground_truth_ids), query.id


def test_queries_are_deterministic():
    corpus = generate_planted(small_spec(0.2), seed=4)
    plans = sample_query_plans(corpus.category_pools, aspect_counts=[2], queries_per_count=5, seed=6)
    a = make_planted_queries(corpus, plans, seed=6)
    b = make_planted_queries(corpus, plans, seed=6)
    for (qa, ea), (qb, eb) in zip(a, b):
        assert qa == qb
        assert np.array_equal(ea.heads.heads, eb.heads.heads)
        assert np.array_equal(ea.standard, eb.standard)


def test_query_ground_truth_shape():
    corpus = generate_planted(small_spec(0.1), seed=8)
    plans = sample_query_plans(corpus.category_pools, aspect_counts=[3], queries_per_count=4, seed=1)
    pairs = make_planted_queries(corpus, plans, seed=1)
    for query, emb in pairs:
        assert query.aspects == 3
        assert len(query.ground_truth) == 3
        cats = {c for _, c in query.ground_truth}
        assert len(cats) == 3
        assert emb.heads.h == corpus.spec.h
        assert emb.standard.shape == (corpus.spec.d_full,)
        for doc_id, cat in query.ground_truth:
            assert corpus.category_of[doc_id] == cat


def test_spec_validation():
    with pytest.raises(PlantedError):
        PlantedCorpusSpec(h=0, d_head=4, num_categories=3, docs_per_category=2, cluster_spread=0.1)
    with pytest.raises(PlantedError):
        PlantedCorpusSpec(h=2, d_head=4, num_categories=1, docs_per_category=2, cluster_spread=0.1)
    with pytest.raises(PlantedError):
        PlantedCorpusSpec(h=2, d_head=4, num_categories=3, docs_per_category=2, cluster_spread=-0.5)
