"""Inverted index over analyzed corpus sections, with phrase queries.

Postings keep token positions (counts are their lengths) because multi-word
search terms require adjacency: "data mining" must match only a contiguous
analyzed-token sequence, never "data ... mining".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..errors import ConfigurationError, QueryError
from .analysis import analyze, analyzer_id, language_of_analyzer
from .model import CANONICAL_SECTIONS, Corpus, select_sections

INDEX_FORMAT_VERSION = 1

# (doc id, section) -> token positions of one term
PostingMap = Mapping[str, Mapping[tuple[str, str], tuple[int, ...]]]


@dataclass(frozen=True)
class InvertedIndex:
    analyzer: str
    sections: tuple[str, ...]
    doc_ids: tuple[str, ...]
    postings: PostingMap

    @property
    def language(self) -> str:
        return language_of_analyzer(self.analyzer)

    def occurrence_count(self, term: str, doc_id: str,
                         section: str | None = None) -> int:
        entries = self.postings.get(term, {})
        return sum(len(positions)
                   for (doc, sec), positions in entries.items()
                   if doc == doc_id and (section is None or sec == section))

    def term_frequencies(self) -> dict[str, int]:
        """Total occurrence count per term, over all indexed sections."""
        return {term: sum(len(p) for p in entries.values())
                for term, entries in sorted(self.postings.items())}


def build_index(corpus: Corpus, sections: Iterable[str]) -> InvertedIndex:
    """Index the analyzed tokens of the selected sections of every document."""
    if len(corpus) == 0:
        raise ConfigurationError("cannot index an empty corpus")
    wanted = set(sections)
    unknown = wanted - set(CANONICAL_SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown section name(s): {sorted(unknown)}")
    ordered_sections = tuple(s for s in CANONICAL_SECTIONS if s in wanted)

    postings: dict[str, dict[tuple[str, str], list[int]]] = {}
    for doc in corpus:
        for section in ordered_sections:
            tokens = analyze(doc.sections[section], corpus.language)
            for position, token in enumerate(tokens):
                postings.setdefault(token, {}) \
                        .setdefault((doc.id, section), []) \
                        .append(position)

    frozen = {term: {key: tuple(positions)
                     for key, positions in sorted(entries.items())}
              for term, entries in sorted(postings.items())}
    return InvertedIndex(analyzer=analyzer_id(corpus.language),
                         sections=ordered_sections,
                         doc_ids=tuple(doc.id for doc in corpus),
                         postings=frozen)


def match_phrase(index: InvertedIndex, phrase: str) -> set[str]:
    """Document ids containing the analyzed phrase as a contiguous sequence."""
    tokens = analyze(phrase, index.language)
    if not tokens:
        raise QueryError(f"phrase {phrase!r} is empty after analysis")

    first = index.postings.get(tokens[0])
    if first is None:
        return set()
    if len(tokens) == 1:
        return {doc for doc, _ in first}

    matches = set()
    rest = [index.postings.get(token, {}) for token in tokens[1:]]
    for (doc, section), positions in first.items():
        if doc in matches:
            continue
        follow = [set(entries.get((doc, section), ())) for entries in rest]
        if any(all(start + offset in candidates
                   for offset, candidates in enumerate(follow, start=1))
               for start in positions):
            matches.add(doc)
    return matches


def phrase_in_document(index: InvertedIndex, phrase: str, doc_id: str,
                       sections: Iterable[str]) -> bool:
    """True iff the analyzed phrase occurs contiguously in one of the given
    sections of the given document."""
    tokens = analyze(phrase, index.language)
    if not tokens:
        raise QueryError(f"phrase {phrase!r} is empty after analysis")
    wanted = set(sections)
    first = index.postings.get(tokens[0])
    if first is None:
        return False
    rest = [index.postings.get(token, {}) for token in tokens[1:]]
    for (doc, section), positions in first.items():
        if doc != doc_id or section not in wanted:
            continue
        if not rest:
            return True
        follow = [set(entries.get((doc, section), ())) for entries in rest]
        if any(all(start + offset in candidates
                   for offset, candidates in enumerate(follow, start=1))
               for start in positions):
            return True
    return False


def phrase_occurrences(index: InvertedIndex, phrase: str, doc_id: str,
                       sections: Iterable[str]) -> int:
    """Count of contiguous occurrences of the analyzed phrase in the given
    sections of the given document."""
    tokens = analyze(phrase, index.language)
    if not tokens:
        raise QueryError(f"phrase {phrase!r} is empty after analysis")
    wanted = set(sections)
    first = index.postings.get(tokens[0])
    if first is None:
        return 0
    rest = [index.postings.get(token, {}) for token in tokens[1:]]
    count = 0
    for (doc, section), positions in first.items():
        if doc != doc_id or section not in wanted:
            continue
        follow = [set(entries.get((doc, section), ())) for entries in rest]
        count += sum(
            1 for start in positions
            if all(start + offset in candidates
                   for offset, candidates in enumerate(follow, start=1)))
    return count


def index_to_json(index: InvertedIndex) -> bytes:
    payload = {
        "version": INDEX_FORMAT_VERSION,
        "analyzer": index.analyzer,
        "sections": list(index.sections),
        "doc_ids": list(index.doc_ids),
        "postings": {
            term: [[doc, section, list(positions)]
                   for (doc, section), positions in sorted(entries.items())]
            for term, entries in sorted(index.postings.items())
        },
    }
    return (json.dumps(payload, ensure_ascii=False, sort_keys=True,
                       separators=(",", ":")) + "\n").encode("utf-8")


def index_from_json(data: bytes) -> InvertedIndex:
    payload = json.loads(data)
    version = payload.get("version")
    if version != INDEX_FORMAT_VERSION:
        raise ConfigurationError(
            f"unsupported index format version: {version!r}")
    postings = {
        term: {(doc, section): tuple(positions)
               for doc, section, positions in entries}
        for term, entries in payload["postings"].items()
    }
    return InvertedIndex(analyzer=payload["analyzer"],
                         sections=tuple(payload["sections"]),
                         doc_ids=tuple(payload["doc_ids"]),
                         postings=postings)


def document_tokens(corpus: Corpus, doc_id: str,
                    sections: Iterable[str]) -> list[str]:
    """Analyzed tokens of the selected sections, in section order."""
    doc = corpus.get(doc_id)
    tokens = []
    for section in CANONICAL_SECTIONS:
        if section in set(sections):
            tokens.extend(analyze(doc.sections[section], corpus.language))
    return tokens
