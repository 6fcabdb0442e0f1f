"""Domain types and the multi-space vector store.

A corpus is stored as h parallel embedding spaces: every chunk owns one
small vector per space, plus (optionally) one full-size vector used by the
single-space baseline. Search is an exact flat scan under cosine distance.

The store is build-then-freeze: `ingest` consumes the whole record stream,
validates it, and returns a sealed store whose arrays are read-only. All
query operations are pure reads and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataError

# A single-aspect embedding is a plain 1-D float64 vector of size d_head.
SingleAspectEmbedding = np.ndarray


class StoreError(DataError):
    """Store construction or query failure."""


class DuplicateIdError(StoreError):
    pass


class DimensionMismatchError(StoreError):
    pass


class NonFiniteValueError(StoreError):
    pass


class ZeroVectorError(StoreError):
    pass


class MissingStandardError(StoreError):
    """Raised when a standard-vector operation hits a store without them."""


@dataclass(frozen=True)
class ChunkRecord:
    """One retrievable text chunk.

    `category` may be empty for corpora without labels; `source` is a free
    provenance string (document title, URL).
    """

    id: str
    text: str
    category: str = ""
    source: str | None = None


@dataclass(frozen=True)
class StoreManifest:
    """Geometry and provenance shared by every record of one corpus.

    `d_full` is the dimension of the optional full-size vectors and must
    equal h * d_head. `layer_index` records which decoder block produced
    the embeddings (-1 for synthetic corpora).
    """

    h: int
    d_head: int
    d_full: int
    distance: str = "cosine"
    model_tag: str = ""
    layer_index: int = -1

    def __post_init__(self) -> None:
        if self.h < 1 or self.d_head < 1:
            raise StoreError(f"manifest needs h >= 1 and d_head >= 1, got h={self.h}, d_head={self.d_head}")
        if self.d_full != self.h * self.d_head:
            raise StoreError(
                f"manifest d_full must equal h*d_head: {self.d_full} != {self.h}*{self.d_head}"
            )
        if self.distance != "cosine":
            raise StoreError(f"unsupported distance {self.distance!r} (only 'cosine')")


@dataclass(frozen=True)
class MultiAspectEmbedding:
    """Ordered set of h single-aspect embeddings for one chunk or query."""

    heads: np.ndarray  # (h, d_head) float64

    def __post_init__(self) -> None:
        arr = np.asarray(self.heads, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise StoreError(f"multi-aspect embedding must be a (h, d_head) matrix, got shape {arr.shape}")
        object.__setattr__(self, "heads", arr)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "MultiAspectEmbedding":
        lengths = {len(r) for r in rows}
        if len(rows) < 1 or len(lengths) != 1:
            raise StoreError("head rows must be non-empty and share one dimension")
        return cls(np.array(rows, dtype=np.float64))

    @property
    def h(self) -> int:
        return self.heads.shape[0]

    @property
    def d_head(self) -> int:
        return self.heads.shape[1]

    def head(self, i: int) -> SingleAspectEmbedding:
        return self.heads[i]

    def concat(self) -> np.ndarray:
        """The h*d_head concatenation, in head order."""
        return self.heads.reshape(-1)


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cos(u, v). Raises on zero-norm input; result lies in [0, 2]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine distance undefined for zero-norm vectors")
    d = 1.0 - float(np.dot(u, v)) / (nu * nv)
    return min(max(d, 0.0), 2.0)


def _check_vector(vec: np.ndarray, dim: int, what: str, chunk_id: str | None = None) -> np.ndarray:
    tag = f" (chunk {chunk_id!r})" if chunk_id else ""
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise DimensionMismatchError(f"{what}{tag}: expected dimension {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError(f"{what}{tag}: contains NaN or infinity")
    if not np.any(arr):
        raise ZeroVectorError(f"{what}{tag}: zero vector not allowed (cosine undefined)")
    return arr


class MultiSpaceStore:
    """Sealed corpus with h parallel embedding spaces. Built via `ingest`."""

    def __init__(
        self,
        manifest: StoreManifest,
        ids: Sequence[str],
        chunks: dict[str, ChunkRecord],
        heads: np.ndarray,
        standard: np.ndarray | None,
    ) -> None:
        self.manifest = manifest
        self._ids: tuple[str, ...] = tuple(ids)
        self._chunks = chunks
        self._heads = heads  # (n, h, d_head), read-only
        self._standard = standard  # (n, d_full) or None, read-only
        self._row_of = {cid: i for i, cid in enumerate(self._ids)}
        # Rank of each row in ascending-id order; used to break distance ties.
        order = sorted(range(len(self._ids)), key=lambda i: self._ids[i])
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        self._id_rank = rank
        self._head_norms = np.linalg.norm(heads, axis=2) if len(self._ids) else np.zeros((0, manifest.h))
        self._standard_norms = (
            np.linalg.norm(standard, axis=1) if standard is not None and len(self._ids) else None
        )

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._chunks

    @property
    def chunk_ids(self) -> tuple[str, ...]:
        """Chunk ids in ingest order."""
        return self._ids

    @property
    def has_standard(self) -> bool:
        return self._standard is not None

    def chunk(self, chunk_id: str) -> ChunkRecord:
        try:
            return self._chunks[chunk_id]
        except KeyError:
            raise StoreError(f"unknown chunk id {chunk_id!r}") from None

    def embedding(self, chunk_id: str) -> MultiAspectEmbedding:
        return MultiAspectEmbedding(self._heads[self._row(chunk_id)].copy())

    def standard_vector(self, chunk_id: str) -> np.ndarray:
        if self._standard is None:
            raise MissingStandardError("store has no standard vectors")
        return self._standard[self._row(chunk_id)].copy()

    def space(self, space_index: int) -> np.ndarray:
        """The (n, d_head) matrix of space `space_index`, rows in ingest order."""
        self._check_space(space_index)
        return self._heads[:, space_index, :]

    def iter_records(self) -> Iterator[tuple[ChunkRecord, MultiAspectEmbedding, np.ndarray | None]]:
        """Records in ingest order, mirroring what `ingest` consumed."""
        for i, cid in enumerate(self._ids):
            std = self._standard[i].copy() if self._standard is not None else None
            yield self._chunks[cid], MultiAspectEmbedding(self._heads[i].copy()), std

    def nearest(
        self, space_index: int, query_vec: np.ndarray, c: int
    ) -> list[tuple[str, float]]:
        """The c closest chunks to `query_vec` in one space.

        Returns (chunk id, cosine distance) pairs, ascending distance,
        ties broken by ascending chunk id. Length is min(c, corpus size).
        """
        self._check_space(space_index)
        q = _check_vector(query_vec, self.manifest.d_head, "query vector")
        return self._scan(self._heads[:, space_index, :], self._head_norms[:, space_index], q, c)

    def nearest_standard(self, query_vec: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Same contract as `nearest`, over the full-size vectors."""
        if self._standard is None or self._standard_norms is None:
            raise MissingStandardError("store has no standard vectors")
        q = _check_vector(query_vec, self.manifest.d_full, "query vector")
        return self._scan(self._standard, self._standard_norms, q, k)

    def _scan(
        self, matrix: np.ndarray, norms: np.ndarray, q: np.ndarray, count: int
    ) -> list[tuple[str, float]]:
        if count < 1:
            raise StoreError(f"result count must be >= 1, got {count}")
        if len(self._ids) == 0:
            return []
        qn = float(np.linalg.norm(q))
        dist = 1.0 - (matrix @ q) / (norms * qn)
        np.clip(dist, 0.0, 2.0, out=dist)
        order = np.lexsort((self._id_rank, dist))[: min(count, len(self._ids))]
        return [(self._ids[i], float(dist[i])) for i in order]

    def _row(self, chunk_id: str) -> int:
        try:
            return self._row_of[chunk_id]
        except KeyError:
            raise StoreError(f"unknown chunk id {chunk_id!r}") from None

    def _check_space(self, space_index: int) -> None:
        if not 0 <= space_index < self.manifest.h:
            raise StoreError(
                f"space index {space_index} out of range for h={self.manifest.h}"
            )


def ingest(
    manifest: StoreManifest,
    records: Iterable[tuple[ChunkRecord, MultiAspectEmbedding, np.ndarray | None]],
) -> MultiSpaceStore:
    """Validate a record stream and seal it into a queryable store.

    Every record must match the manifest geometry; ids must be unique and
    non-empty; all values finite; zero-norm vectors are rejected because
    cosine distance is undefined on them. Standard vectors are all-or-none
    across the corpus.
    """
    ids: list[str] = []
    chunks: dict[str, ChunkRecord] = {}
    head_blocks: list[np.ndarray] = []
    standard_rows: list[np.ndarray] = []

    for chunk, emb, std in records:
        if not chunk.id:
            raise StoreError("chunk id must be non-empty")
        if not chunk.text:
            raise StoreError(f"chunk {chunk.id!r}: text must be non-empty")
        if chunk.id in chunks:
            raise DuplicateIdError(f"duplicate chunk id {chunk.id!r}")
        if emb.h != manifest.h or emb.d_head != manifest.d_head:
            raise DimensionMismatchError(
                f"chunk {chunk.id!r}: expected {manifest.h}x{manifest.d_head} head block, "
                f"got {emb.h}x{emb.d_head}"
            )
        if not np.all(np.isfinite(emb.heads)):
            raise NonFiniteValueError(f"chunk {chunk.id!r}: head embeddings contain NaN or infinity")
        norms = np.linalg.norm(emb.heads, axis=1)
        if np.any(norms == 0.0):
            bad = int(np.argmin(norms))
            raise ZeroVectorError(f"chunk {chunk.id!r}: zero vector in space {bad}")
        if std is not None:
            if len(standard_rows) != len(ids):
                raise StoreError(
                    f"chunk {chunk.id!r}: standard vector present but earlier records had none"
                )
            standard_rows.append(_check_vector(std, manifest.d_full, "standard vector", chunk.id))
        elif standard_rows:
            raise StoreError(f"chunk {chunk.id!r}: standard vector missing but earlier records had one")
        ids.append(chunk.id)
        chunks[chunk.id] = chunk
        head_blocks.append(emb.heads)

    n = len(ids)
    heads = (
        np.stack(head_blocks) if n else np.zeros((0, manifest.h, manifest.d_head))
    )
    standard: np.ndarray | None = None
    if standard_rows:
        standard = np.stack(standard_rows)
        standard.flags.writeable = False
    heads.flags.writeable = False
    return MultiSpaceStore(manifest, ids, chunks, heads, standard)
