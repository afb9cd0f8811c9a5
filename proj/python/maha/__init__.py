"""Modality-aware hybrid retrieval engine.

Thin python surface over the C++ core: ingestion, snapshot build, the six
retrievers, and the evaluation metrics.
"""

from ._core import (
    Chunk,
    ChunkingPolicy,
    Corpus,
    EdgeType,
    EngineSnapshot,
    MahaError,
    Modality,
    RetrievalResult,
    RetrievedHit,
    RougeScore,
    Violation,
    base64_encode,
    build_snapshot_dir,
    canonicalize_table,
    chunk_spans,
    deterministic_embedding,
    extract_entities,
    ingest_directory,
    load_corpus,
    load_snapshot_dir,
    modality_coverage,
    rouge_l,
    save_corpus,
    tokenize,
    validate_corpus,
)

__all__ = [
    "Chunk",
    "ChunkingPolicy",
    "Corpus",
    "EdgeType",
    "EngineSnapshot",
    "MahaError",
    "Modality",
    "RetrievalResult",
    "RetrievedHit",
    "RougeScore",
    "Violation",
    "base64_encode",
    "build_snapshot_dir",
    "canonicalize_table",
    "chunk_spans",
    "deterministic_embedding",
    "extract_entities",
    "ingest_directory",
    "load_corpus",
    "load_snapshot_dir",
    "modality_coverage",
    "rouge_l",
    "save_corpus",
    "tokenize",
    "validate_corpus",
]

__version__ = "0.1.0"
