"""Corpus ingestion, language analysis, and the inverted index."""

from .analysis import (
    ANALYZER_VERSION,
    LANGUAGE_CODES,
    STOP_WORDS,
    SUPPORTED_LANGUAGES,
    analyze,
    analyzer_id,
    tokenize,
)
from .index import (
    InvertedIndex,
    build_index,
    document_tokens,
    index_from_json,
    index_to_json,
    match_phrase,
)
from .model import (
    CANONICAL_SECTIONS,
    Corpus,
    Document,
    Provenance,
    format_timestamp,
    load_documents,
    parse_timestamp,
    select_sections,
    serialize_corpus,
)

__all__ = [
    "ANALYZER_VERSION",
    "CANONICAL_SECTIONS",
    "Corpus",
    "Document",
    "InvertedIndex",
    "LANGUAGE_CODES",
    "Provenance",
    "STOP_WORDS",
    "SUPPORTED_LANGUAGES",
    "analyze",
    "analyzer_id",
    "build_index",
    "document_tokens",
    "format_timestamp",
    "index_from_json",
    "index_to_json",
    "load_documents",
    "match_phrase",
    "parse_timestamp",
    "select_sections",
    "serialize_corpus",
    "tokenize",
]
