"""Per-head attention embedding extractor for the mhrag engine."""

from .export import export_corpus, manifest_path_for, meta_path_for
from .tap import (
    ExtractionError,
    ExtractionResult,
    ModelBundle,
    TapConfig,
    extract,
    extract_query,
    load_model,
)

__version__ = "0.1.0"

__all__ = [
    "ExtractionError",
    "ExtractionResult",
    "ModelBundle",
    "TapConfig",
    "export_corpus",
    "extract",
    "extract_query",
    "load_model",
    "manifest_path_for",
    "meta_path_for",
]
