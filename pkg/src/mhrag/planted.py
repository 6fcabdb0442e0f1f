"""Synthetic corpora with known per-space cluster structure.

Every category owns one cluster center per embedding space. A document's
space-j vector sits near its category's space-j center: it carries a strong
document-identity offset in the category's designated (salient) space, a
faint one elsewhere, plus Gaussian noise scaled by the cluster spread. The
identity offsets keep documents individually distinguishable even at zero
spread, which is what makes exact-recovery checks possible.

The full-size vector is a fixed seeded orthogonal mix of the per-space
concatenation, so contiguous slices of it do not recover the head spaces
and the split baseline stays an honest control.

Query embeddings for a plan point space j at the (j mod n)-th picked
document's position in that space, optionally with extra query noise; the
plan's picks are the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError
from .metrics import EvalQuery
from .querygen import QueryPlan
from .store import ChunkRecord, MultiAspectEmbedding, StoreManifest
from .strategies import QueryEmbedding

# Document-identity offset radii, as fractions of the inter-cluster
# separation. Salient applies in the category's designated space.
SALIENT_IDENTITY_FRACTION = 0.25
FAINT_IDENTITY_FRACTION = 0.10


class PlantedError(DataError):
    pass


@dataclass(frozen=True)
class PlantedCorpusSpec:
    """Geometry of a planted corpus.

    `cluster_spread` is the expected noise norm around a cluster center
    (per-coordinate std is cluster_spread / sqrt(d_head)); the generator
    asserts it stays below the realized inter-cluster separation.
    `mixing_seed` fixes the orthogonal map behind the full-size vectors.
    """

    h: int
    d_head: int
    num_categories: int
    docs_per_category: int
    cluster_spread: float
    mixing_seed: int = 0

    def __post_init__(self) -> None:
        if self.h < 1 or self.d_head < 1:
            raise PlantedError("h and d_head must be >= 1")
        if self.num_categories < 2:
            raise PlantedError("need at least 2 categories")
        if self.docs_per_category < 1:
            raise PlantedError("need at least 1 document per category")
        if self.cluster_spread < 0:
            raise PlantedError("cluster_spread must be >= 0")

    @property
    def d_full(self) -> int:
        return self.h * self.d_head


def _unit_rows(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    vecs = rng.standard_normal(shape)
    norms = np.linalg.norm(vecs, axis=-1, keepdims=True)
    return vecs / norms


def _orthogonal_matrix(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(gauss)
    return q * np.sign(np.diag(r))


def _min_center_separation(centers: np.ndarray) -> float:
    """Smallest Euclidean distance between same-space cluster centers."""
    best = np.inf
    for j in range(centers.shape[1]):
        pts = centers[:, j, :]
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        best = min(best, float(dist.min()))
    return best


class PlantedCorpus:
    """Generated corpus plus the latent structure used to build it."""

    def __init__(
        self,
        spec: PlantedCorpusSpec,
        seed: int,
        categories: list[str],
        doc_ids: list[list[str]],
        centers: np.ndarray,
        doc_heads: np.ndarray,
        mixing: np.ndarray,
        separation: float,
    ) -> None:
        self.spec = spec
        self.seed = seed
        self.categories = categories
        self.doc_ids = doc_ids
        self.centers = centers  # (C, h, d_head)
        self.doc_heads = doc_heads  # (C, R, h, d_head)
        self.mixing = mixing  # (d_full, d_full), orthogonal
        self.separation = separation
        self._cat_index = {name: i for i, name in enumerate(categories)}
        self._doc_index = {
            doc_id: (c, r)
            for c, row in enumerate(doc_ids)
            for r, doc_id in enumerate(row)
        }

    @property
    def manifest(self) -> StoreManifest:
        return StoreManifest(
            h=self.spec.h,
            d_head=self.spec.d_head,
            d_full=self.spec.d_full,
            model_tag="planted",
            layer_index=-1,
        )

    @property
    def category_of(self) -> dict[str, str]:
        """Ground-truth map from document id to category."""
        return {
            doc_id: self.categories[c]
            for doc_id, (c, _) in self._doc_index.items()
        }

    @property
    def category_pools(self) -> dict[str, list[str]]:
        """Category name -> document ids, the shape plan sampling expects."""
        return {name: list(self.doc_ids[i]) for i, name in enumerate(self.categories)}

    def designated_space(self, category: str) -> int:
        return self._cat_index[category] % self.spec.h

    def document_heads(self, doc_id: str) -> np.ndarray:
        c, r = self._doc_index[doc_id]
        return self.doc_heads[c, r]

    def mix(self, concat: np.ndarray) -> np.ndarray:
        return self.mixing @ concat

    def unmix(self, full: np.ndarray) -> np.ndarray:
        return self.mixing.T @ full

    def iter_records(self) -> Iterator[tuple[ChunkRecord, MultiAspectEmbedding, np.ndarray]]:
        for c, cat in enumerate(self.categories):
            for r, doc_id in enumerate(self.doc_ids[c]):
                heads = MultiAspectEmbedding(self.doc_heads[c, r].copy())
                standard = self.mix(heads.concat())
                chunk = ChunkRecord(
                    id=doc_id,
                    text=f"Synthetic planted document {doc_id} in category {cat}.",
                    category=cat,
                )
                yield chunk, heads, standard

    @property
    def records(self) -> list[tuple[ChunkRecord, MultiAspectEmbedding, np.ndarray]]:
        return list(self.iter_records())


def generate_planted(spec: PlantedCorpusSpec, seed: int = 0) -> PlantedCorpus:
    """Build a planted corpus; byte-identical for identical inputs.

    Centers and identity offsets come from streams independent of the
    noise stream, so changing only `cluster_spread` keeps the same latent
    layout.
    """
    c_count, r_count = spec.num_categories, spec.docs_per_category
    h, d = spec.h, spec.d_head

    centers = _unit_rows(np.random.default_rng([seed, 1]), (c_count, h, d))
    separation = _min_center_separation(centers)
    if spec.cluster_spread >= separation:
        raise PlantedError(
            f"cluster_spread {spec.cluster_spread:.4f} must stay below the "
            f"inter-cluster separation {separation:.4f}"
        )

    directions = _unit_rows(np.random.default_rng([seed, 2]), (c_count, r_count, h, d))
    radii = np.full((c_count, 1, h), FAINT_IDENTITY_FRACTION * separation)
    for c in range(c_count):
        radii[c, 0, c % h] = SALIENT_IDENTITY_FRACTION * separation
    identity = directions * radii[:, :, :, None]

    noise = np.random.default_rng([seed, 3]).standard_normal((c_count, r_count, h, d))
    noise *= spec.cluster_spread / np.sqrt(d)

    doc_heads = centers[:, None, :, :] + identity + noise

    categories = [f"cat{c:02d}" for c in range(c_count)]
    doc_ids = [[f"{cat}-d{r:02d}" for r in range(r_count)] for cat in categories]
    mixing = _orthogonal_matrix(spec.d_full, spec.mixing_seed)
    return PlantedCorpus(spec, seed, categories, doc_ids, centers, doc_heads, mixing, separation)


def measure_separation(spec: PlantedCorpusSpec, seed: int = 0) -> float:
    """Separation the generator would realize for this seed.

    Use it to choose `cluster_spread` relative to the layout (the centers
    depend only on the seed and geometry, never on the spread).
    """
    probe = PlantedCorpusSpec(
        h=spec.h,
        d_head=spec.d_head,
        num_categories=spec.num_categories,
        docs_per_category=spec.docs_per_category,
        cluster_spread=0.0,
        mixing_seed=spec.mixing_seed,
    )
    centers = _unit_rows(np.random.default_rng([seed, 1]), (probe.num_categories, probe.h, probe.d_head))
    return _min_center_separation(centers)


def make_planted_queries(
    corpus: PlantedCorpus,
    plans: Sequence[QueryPlan],
    seed: int = 0,
    query_spread: float | None = None,
    id_prefix: str = "q",
) -> list[tuple[EvalQuery, QueryEmbedding]]:
    """Embed query plans against the corpus' latent structure.

    Space j of a plan's embedding targets the (j mod n)-th picked document
    at its realized corpus position, plus Gaussian query noise with
    expected norm `query_spread` (default: half the corpus spread; pass 0
    for exact placement). The standard vector is the same orthogonal mix a
    document would get.
    """
    if query_spread is None:
        query_spread = corpus.spec.cluster_spread / 2.0
    if query_spread < 0:
        raise PlantedError("query_spread must be >= 0")
    h, d = corpus.spec.h, corpus.spec.d_head
    rng = np.random.default_rng([seed, 4])
    out: list[tuple[EvalQuery, QueryEmbedding]] = []
    for qi, plan in enumerate(plans):
        heads = np.empty((h, d))
        for j in range(h):
            _, doc_id = plan.picks[j % plan.aspects]
            noise = rng.standard_normal(d) * (query_spread / np.sqrt(d))
            heads[j] = corpus.document_heads(doc_id)[j] + noise
        emb = MultiAspectEmbedding(heads)
        query = EvalQuery(
            id=f"{id_prefix}{qi:04d}",
            text=f"planted query {qi} over {plan.aspects} aspects",
            aspects=plan.aspects,
            ground_truth=tuple((doc_id, cat) for cat, doc_id in plan.picks),
        )
        out.append((query, QueryEmbedding(heads=emb, standard=corpus.mix(emb.concat()))))
    return out
