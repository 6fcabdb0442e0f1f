"""Write extraction output in the engine's corpus interchange format.

One records JSONL file plus a manifest JSON next to it
(`<name>.manifest.json`). Values are captured in model precision and
exported as the decimal text of their 32-bit rounding; files are written
atomically (temp file, then rename). Truncation warnings land in a
`<name>.meta.json` sidecar.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Sequence

import numpy as np

from .tap import ExtractionResult, TapConfig


def _f32(value: float) -> float:
    return float(np.float32(value))


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def manifest_path_for(records_path: str | Path) -> Path:
    records_path = Path(records_path)
    return records_path.parent / (records_path.stem + ".manifest.json")


def meta_path_for(records_path: str | Path) -> Path:
    records_path = Path(records_path)
    return records_path.parent / (records_path.stem + ".meta.json")


def export_corpus(
    records_path: str | Path,
    ids: Sequence[str],
    texts: Sequence[str],
    result: ExtractionResult,
    config: TapConfig,
    categories: Sequence[str] | None = None,
    sources: Sequence[str | None] | None = None,
) -> Path:
    """Write records + manifest (+ meta when anything was truncated)."""
    if not (len(ids) == len(texts) == len(result.pairs)):
        raise ValueError("ids, texts and extraction pairs must align")
    records_path = Path(records_path)
    records_path.parent.mkdir(parents=True, exist_ok=True)

    lines = []
    for i, (cid, text) in enumerate(zip(ids, texts)):
        heads, standard = result.pairs[i]
        obj = {
            "id": cid,
            "text": text,
            "category": categories[i] if categories else "",
            "source": sources[i] if sources else None,
            "heads": [[_f32(x) for x in row] for row in heads],
            "standard": [_f32(x) for x in standard],
        }
        lines.append(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
    _atomic_write(records_path, "\n".join(lines) + "\n")

    manifest = {
        "h": result.h,
        "d_head": result.d_head,
        "d_full": result.d_full,
        "distance": "cosine",
        "model_tag": config.model_id,
        "layer_index": result.layer_index,
    }
    _atomic_write(manifest_path_for(records_path), json.dumps(manifest, indent=2) + "\n")

    if result.truncated:
        meta = {
            "truncated_ids": [ids[i] for i in result.truncated],
            "max_length": config.max_length,
            "consistency_error": result.consistency_error,
        }
        _atomic_write(meta_path_for(records_path), json.dumps(meta, indent=2) + "\n")
    return records_path
