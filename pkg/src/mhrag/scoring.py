"""Per-head importance scores.

Each embedding space i gets a score s_i = a_i * b_i where

  a_i  mean L2 norm of the space's embeddings (how strongly the head fires)
  b_i  mean cosine distance over all ordered embedding pairs, self-pairs
       included (how spread out the space is)

Both components are max-scaled to [0, 1] before the product so the score is
dimensionless; an all-zero component vector is left untouched. Scaling by a
positive constant is monotone, so head rankings are scale-independent.

The pair mean may be subsampled (uniform, without replacement, seeded) to
cut precompute time on large corpora; exact mode is the default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .store import MultiSpaceStore


class ScoringError(DataError):
    pass


@dataclass(frozen=True)
class HeadScores:
    """Scaled per-head components and scores; s = a * b elementwise."""

    a: np.ndarray
    b: np.ndarray
    s: np.ndarray
    sample_size: int | None
    seed: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "s"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise ScoringError(f"{name} must be a 1-D vector")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ScoringError(f"{name} must be finite and non-negative")
            object.__setattr__(self, name, arr)
        if not (len(self.a) == len(self.b) == len(self.s)):
            raise ScoringError("a, b, s must share one length")

    @property
    def h(self) -> int:
        return len(self.s)


def head_norm_means(store: MultiSpaceStore) -> np.ndarray:
    """Raw a: per-space mean L2 norm, before scaling."""
    if len(store) == 0:
        raise ScoringError("cannot score an empty store")
    h = store.manifest.h
    return np.array([float(np.linalg.norm(store.space(i), axis=1).mean()) for i in range(h)])


def head_spread_means(
    store: MultiSpaceStore, sample_size: int | None = None, seed: int = 0
) -> np.ndarray:
    """Raw b: per-space mean cosine distance over ordered pairs.

    All n^2 ordered pairs count, including self-pairs (distance 0), so the
    exact value for n embeddings is 1 - ||sum of unit vectors||^2 / n^2.
    With `sample_size` below n^2, that many ordered pairs are sampled
    uniformly without replacement per space (seeded, deterministic);
    a sample budget of n^2 or more falls back to the exact computation.
    """
    n = len(store)
    if n == 0:
        raise ScoringError("cannot score an empty store")
    h = store.manifest.h
    if sample_size is not None and sample_size < 1:
        raise ScoringError(f"sample_size must be >= 1, got {sample_size}")
    total_pairs = n * n
    out = np.empty(h, dtype=np.float64)
    for i in range(h):
        mat = store.space(i)
        unit = mat / np.linalg.norm(mat, axis=1, keepdims=True)
        if sample_size is None or sample_size >= total_pairs:
            mean_sim = float(np.dot(unit.sum(axis=0), unit.sum(axis=0))) / total_pairs
            out[i] = max(1.0 - mean_sim, 0.0)
        else:
            rng = np.random.default_rng([seed, i])
            flat = rng.choice(total_pairs, size=sample_size, replace=False)
            rows, cols = np.divmod(flat, n)
            sims = np.einsum("ij,ij->i", unit[rows], unit[cols])
            out[i] = max(1.0 - float(sims.mean()), 0.0)
    return out


def max_scale(values: np.ndarray) -> np.ndarray:
    """Divide by the max entry; an all-zero vector is returned unchanged."""
    values = np.asarray(values, dtype=np.float64)
    top = values.max() if values.size else 0.0
    return values if top == 0.0 else values / top


def compute_scores(
    store: MultiSpaceStore, sample_size: int | None = None, seed: int = 0
) -> HeadScores:
    """Score every head of a sealed store; deterministic given the seed."""
    raw_a = head_norm_means(store)
    raw_b = head_spread_means(store, sample_size=sample_size, seed=seed)
    a = max_scale(raw_a)
    b = max_scale(raw_b)
    return HeadScores(a=a, b=b, s=a * b, sample_size=sample_size, seed=seed)


def write_scores(scores: HeadScores, path: str | Path) -> None:
    payload = {
        "a": [float(x) for x in scores.a],
        "b": [float(x) for x in scores.b],
        "s": [float(x) for x in scores.s],
        "sample_size": scores.sample_size,
        "seed": scores.seed,
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def read_scores(path: str | Path) -> HeadScores:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return HeadScores(
            a=np.asarray(payload["a"], dtype=np.float64),
            b=np.asarray(payload["b"], dtype=np.float64),
            s=np.asarray(payload["s"], dtype=np.float64),
            sample_size=payload.get("sample_size"),
            seed=int(payload.get("seed", 0)),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ScoringError(f"{path}: cannot read scores: {exc}") from exc
