"""On-disk interchange formats.

A corpus (or sealed store) on disk is a pair of files:

  manifest.json   one JSON object with the StoreManifest fields
  records.jsonl   one JSON object per chunk:
                  {"id", "text", "category", "source",
                   "heads": [[d_head floats] x h],
                   "standard": [d_full floats]}   (standard optional)

Numbers are written as shortest round-trip decimals (Python float repr),
so write -> read -> write is byte-identical. This format is the contract
between embedding extractors and the engine.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import DataError
from .store import (
    ChunkRecord,
    MultiAspectEmbedding,
    MultiSpaceStore,
    StoreManifest,
    ingest,
)

MANIFEST_NAME = "manifest.json"
RECORDS_NAME = "records.jsonl"
SCORES_NAME = "scores.json"

Record = tuple[ChunkRecord, MultiAspectEmbedding, "np.ndarray | None"]


class FormatError(DataError):
    """Malformed interchange file."""


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_manifest(manifest: StoreManifest, path: str | Path) -> None:
    payload = {
        "h": manifest.h,
        "d_head": manifest.d_head,
        "d_full": manifest.d_full,
        "distance": manifest.distance,
        "model_tag": manifest.model_tag,
        "layer_index": manifest.layer_index,
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> StoreManifest:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: cannot read manifest: {exc}") from exc
    try:
        return StoreManifest(
            h=int(payload["h"]),
            d_head=int(payload["d_head"]),
            d_full=int(payload["d_full"]),
            distance=str(payload.get("distance", "cosine")),
            model_tag=str(payload.get("model_tag", "")),
            layer_index=int(payload.get("layer_index", -1)),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: manifest missing field {exc}") from exc


def record_to_json(chunk: ChunkRecord, emb: MultiAspectEmbedding, standard: np.ndarray | None) -> str:
    obj: dict = {
        "id": chunk.id,
        "text": chunk.text,
        "category": chunk.category,
        "source": chunk.source,
        "heads": [[float(x) for x in row] for row in emb.heads],
    }
    if standard is not None:
        obj["standard"] = [float(x) for x in standard]
    return _dump_line(obj)


def write_records(path: str | Path, records: Iterable[Record]) -> int:
    """Write records as canonical JSON-Lines; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for chunk, emb, std in records:
            fh.write(record_to_json(chunk, emb, std) + "\n")
            count += 1
    return count


def parse_record(obj: dict) -> Record:
    chunk = ChunkRecord(
        id=str(obj["id"]),
        text=str(obj["text"]),
        category=str(obj.get("category", "")),
        source=obj.get("source"),
    )
    emb = MultiAspectEmbedding.from_rows(obj["heads"])
    std = np.asarray(obj["standard"], dtype=np.float64) if "standard" in obj else None
    return chunk, emb, std


def read_records(path: str | Path) -> Iterator[Record]:
    """Stream records from a JSONL file; errors name the offending line."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            try:
                yield parse_record(obj)
            except (KeyError, TypeError, ValueError, DataError) as exc:
                raise FormatError(f"{path}: line {lineno}: bad record: {exc}") from exc


def write_store(store: MultiSpaceStore, store_dir: str | Path) -> None:
    """Write manifest.json + records.jsonl into a directory."""
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(store.manifest, store_dir / MANIFEST_NAME)
    write_records(store_dir / RECORDS_NAME, store.iter_records())


def read_store(store_dir: str | Path) -> MultiSpaceStore:
    """Load and seal a store from a manifest + records directory."""
    store_dir = Path(store_dir)
    manifest = read_manifest(store_dir / MANIFEST_NAME)
    return ingest(manifest, read_records(store_dir / RECORDS_NAME))


def locate_manifest(records_path: str | Path) -> Path:
    """Find the manifest belonging to a records file.

    Tries `<name>.manifest.json` next to the records file, then a sibling
    `manifest.json`.
    """
    records_path = Path(records_path)
    named = records_path.parent / (records_path.stem + ".manifest.json")
    if named.exists():
        return named
    sibling = records_path.parent / MANIFEST_NAME
    if sibling.exists():
        return sibling
    raise FormatError(
        f"no manifest found for {records_path} (tried {named.name} and {MANIFEST_NAME})"
    )


def write_query_embeddings(
    path: str | Path,
    items: Iterable[tuple[str, MultiAspectEmbedding | None, np.ndarray | None]],
) -> int:
    """Write per-query embeddings: {"id", "heads"?, "standard"?} per line."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for qid, emb, std in items:
            obj: dict = {"id": qid}
            if emb is not None:
                obj["heads"] = [[float(x) for x in row] for row in emb.heads]
            if std is not None:
                obj["standard"] = [float(x) for x in std]
            fh.write(_dump_line(obj) + "\n")
            count += 1
    return count


def read_query_embeddings(
    path: str | Path,
) -> dict[str, tuple[MultiAspectEmbedding | None, np.ndarray | None]]:
    out: dict[str, tuple[MultiAspectEmbedding | None, np.ndarray | None]] = {}
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                qid = str(obj["id"])
                emb = MultiAspectEmbedding.from_rows(obj["heads"]) if "heads" in obj else None
                std = np.asarray(obj["standard"], dtype=np.float64) if "standard" in obj else None
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, DataError) as exc:
                raise FormatError(f"{path}: line {lineno}: bad query embedding: {exc}") from exc
            out[qid] = (emb, std)
    return out
