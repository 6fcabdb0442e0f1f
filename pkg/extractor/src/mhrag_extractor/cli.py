"""Extractor command line.

Reads texts as JSONL ({"id", "text", "category"?, "source"?} per line) and
writes the corpus interchange files the retrieval engine ingests.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .export import export_corpus
from .tap import ExtractionError, TapConfig, extract, extract_query, load_model


def _read_texts(path: Path):
    ids, texts, categories, sources = [], [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                ids.append(str(obj["id"]))
                texts.append(str(obj["text"]))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ExtractionError(f"{path}: line {lineno}: bad input record: {exc}") from exc
            categories.append(str(obj.get("category", "")))
            sources.append(obj.get("source"))
    if not ids:
        raise ExtractionError(f"{path}: no input texts")
    return ids, texts, categories, sources


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mhrag-extract", description=__doc__)
    parser.add_argument("--model", required=True, help="model identifier")
    parser.add_argument("--layer", type=int, default=-1, help="decoder block to tap (-1 = last)")
    parser.add_argument("--input", required=True, help="texts JSONL")
    parser.add_argument("--output", required=True, help="output corpus JSONL")
    parser.add_argument("--query-mode", action="store_true", help="apply the query prompt template")
    parser.add_argument(
        "--prompt-template",
        default="{text}",
        help="query wrapper containing {text} (used with --query-mode)",
    )
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--max-length", type=int, default=512)
    parser.add_argument("--device", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = TapConfig(
        model_id=args.model,
        layer_index=args.layer,
        batch_size=args.batch_size,
        max_length=args.max_length,
        device=args.device,
    )
    try:
        ids, texts, categories, sources = _read_texts(Path(args.input))
        bundle = load_model(config)
        if args.query_mode:
            result = extract_query(texts, config, args.prompt_template, bundle=bundle)
        else:
            result = extract(texts, config, bundle=bundle)
        export_corpus(args.output, ids, texts, result, config, categories, sources)
    except ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"{len(ids)} records, h={result.h}, d_head={result.d_head}, "
        f"d_full={result.d_full}, layer={result.layer_index}, "
        f"consistency={result.consistency_error:.2e}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
