import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from mhrag.interchange import read_manifest, read_records, write_store
from mhrag.store import (
    ChunkRecord,
    DimensionMismatchError,
    DuplicateIdError,
    MissingStandardError,
    MultiAspectEmbedding,
    NonFiniteValueError,
    StoreError,
    StoreManifest,
    ZeroVectorError,
    cosine_distance,
    ingest,
)

from conftest import build_store, random_store


def test_ingest_counts_two_records():
    store = build_store({"a": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], "b": [[0.0, 0.0, 1.0], [1.0, 1.0, 0.0]]})
    assert len(store) == 2
    assert store.manifest.h == 2
    assert store.space(0).shape == (2, 3)
    assert store.space(1).shape == (2, 3)


def test_ingest_dimension_mismatch_names_offender():
    manifest = StoreManifest(h=2, d_head=2, d_full=4)

    def records():
        yield ChunkRecord(id="good", text="t"), MultiAspectEmbedding.from_rows([[1.0, 0.0], [0.0, 1.0]]), None
        yield ChunkRecord(id="bad", text="t"), MultiAspectEmbedding.from_rows([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]), None

    with pytest.raises(DimensionMismatchError, match="'bad'.*2x2.*3x2"):
        ingest(manifest, records())


def test_reference_geometry_manifest():
    # 25 categories x 50 docs at the reference head layout: 32 heads of 128.
    manifest = StoreManifest(h=32, d_head=128, d_full=4096)
    rng = np.random.default_rng(0)

    def records():
        for i in range(1250):
            heads = rng.normal(size=(32, 128))
            yield ChunkRecord(id=f"doc{i:04d}", text="x"), MultiAspectEmbedding(heads), None

    store = ingest(manifest, records())
    assert len(store) == 1250
    assert store.manifest.d_full == 4096


def test_nearest_hand_case():
    store = build_store({"A": [[1.0, 0.0]], "B": [[0.0, 1.0]]})
    hits = store.nearest(0, np.array([1.0, 0.0]), 2)
    assert hits[0][0] == "A" and hits[0][1] == pytest.approx(0.0, abs=1e-15)
    assert hits[1][0] == "B" and hits[1][1] == pytest.approx(1.0)


def test_nearest_identity_match(rng):
    store = random_store(rng, 6, h=2, d_head=4)
    stored = store.space(1)[3]
    hits = store.nearest(1, stored, 1)
    assert hits[0][0] == store.chunk_ids[3]
    assert hits[0][1] == pytest.approx(0.0, abs=1e-12)


def test_nearest_tie_breaks_by_ascending_id():
    # Same direction, different magnitudes: identical cosine distance.
    store = build_store({"zeta": [[2.0, 0.0]], "alpha": [[1.0, 0.0]], "mid": [[3.0, 0.0]]})
    hits = store.nearest(0, np.array([0.0, 1.0]), 3)
    assert [cid for cid, _ in hits] == ["alpha", "mid", "zeta"]
    assert all(d == pytest.approx(1.0) for _, d in hits)


def test_nearest_rejects_bad_space_and_dims(rng):
    store = random_store(rng, 3, h=2, d_head=4)
    with pytest.raises(StoreError, match="space index"):
        store.nearest(2, np.ones(4), 1)
    with pytest.raises(DimensionMismatchError):
        store.nearest(0, np.ones(5), 1)
    with pytest.raises(ZeroVectorError):
        store.nearest(0, np.zeros(4), 1)


def test_nearest_standard_single_vector():
    store = build_store({"only": [[1.0, 2.0]]}, standard_by_id={"only": [3.0, 4.0]})
    hits = store.nearest_standard(np.array([1.0, 1.0]), 1)
    assert hits[0][0] == "only"


def test_nearest_standard_orthogonal_distance():
    store = build_store({"a": [[1.0, 1.0]]}, standard_by_id={"a": [1.0, 0.0]})
    hits = store.nearest_standard(np.array([0.0, 1.0]), 1)
    assert hits[0][1] == pytest.approx(1.0)


def test_nearest_standard_k_larger_than_corpus(rng):
    store = random_store(rng, 4, h=2, d_head=3, with_standard=True)
    hits = store.nearest_standard(np.ones(6), 100)
    assert len(hits) == 4


def test_nearest_standard_missing(rng):
    store = random_store(rng, 3, h=2, d_head=3)
    with pytest.raises(MissingStandardError):
        store.nearest_standard(np.ones(6), 1)


def test_full_scan_total_order_matches_oracle(rng):
    store = random_store(rng, 15, h=3, d_head=5)
    vectors = {cid: store.embedding(cid).head(2).tolist() for cid in store.chunk_ids}
    query = rng.normal(size=5)
    got = store.nearest(2, query, len(store))
    want = oracles.nearest(vectors, query.tolist(), len(store))
    assert [cid for cid, _ in got] == [cid for cid, _ in want]
    for (_, d_got), (_, d_want) in zip(got, want):
        assert d_got == pytest.approx(d_want, rel=1e-12, abs=1e-12)


finite_vec = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=2,
    max_size=8,
)


@given(finite_vec, finite_vec)
def test_cosine_distance_symmetric(u, v):
    n = min(len(u), len(v))
    u, v = u[:n], v[:n]
    if np.linalg.norm(u) == 0.0 or np.linalg.norm(v) == 0.0:
        return
    assert cosine_distance(np.array(u), np.array(v)) == pytest.approx(
        cosine_distance(np.array(v), np.array(u)), rel=1e-12, abs=1e-12
    )


@given(finite_vec)
def test_cosine_distance_self_is_zero(v):
    if np.linalg.norm(v) == 0.0:
        return
    assert cosine_distance(np.array(v), np.array(v)) == pytest.approx(0.0, abs=1e-12)


def test_zero_vector_rejected_at_ingest():
    with pytest.raises(ZeroVectorError, match="space 1"):
        build_store({"a": [[1.0, 0.0], [0.0, 0.0]]})


def test_duplicate_id_rejected():
    manifest = StoreManifest(h=1, d_head=2, d_full=2)

    def records():
        for _ in range(2):
            yield ChunkRecord(id="dup", text="t"), MultiAspectEmbedding.from_rows([[1.0, 0.0]]), None

    with pytest.raises(DuplicateIdError):
        ingest(manifest, records())


def test_non_finite_rejected():
    with pytest.raises(NonFiniteValueError, match="'a'"):
        build_store({"a": [[1.0, float("nan")]]})


def test_standard_vectors_all_or_none():
    manifest = StoreManifest(h=1, d_head=2, d_full=2)

    def records(order):
        stds = {"x": np.array([1.0, 0.0]), "y": None}
        for cid in order:
            yield ChunkRecord(id=cid, text="t"), MultiAspectEmbedding.from_rows([[1.0, 1.0]]), stds[cid]

    with pytest.raises(StoreError, match="missing"):
        ingest(manifest, records(["x", "y"]))
    with pytest.raises(StoreError, match="earlier records had none"):
        ingest(manifest, records(["y", "x"]))


def test_store_is_sealed(rng):
    store = random_store(rng, 3, h=2, d_head=3)
    with pytest.raises(ValueError):
        store.space(0)[0, 0] = 9.0


def test_roundtrip_is_byte_exact(tmp_path, rng):
    heads = {
        "ascii": [[0.1, 1 / 3], [1e-8, -2.5]],
        "unicode-é": [[math.pi, 2.0**-40], [7.0, 1234567.890123]],
    }
    standard = {"ascii": [0.3, -0.7, 1e-300, 4.0], "unicode-é": [1.0, 2.0, 3.0, 4.5]}
    store = build_store(heads, standard_by_id=standard, categories={"ascii": "letters"})
    first_dir = tmp_path / "one"
    write_store(store, first_dir)

    manifest = read_manifest(first_dir / "manifest.json")
    reread = ingest(manifest, read_records(first_dir / "records.jsonl"))
    second_dir = tmp_path / "two"
    write_store(reread, second_dir)

    assert (first_dir / "records.jsonl").read_bytes() == (second_dir / "records.jsonl").read_bytes()
    assert (first_dir / "manifest.json").read_bytes() == (second_dir / "manifest.json").read_bytes()
