"""Documents, corpora, and their XML wire format.

Corpus XML schema (UTF-8 only):

    <corpus language="en|nl|ru">
      <document id="..." timestamp="ISO8601" url="...">
        <title>...</title> <authors>...</authors> <abstract>...</abstract>
        <keywords>...</keywords> <body>...</body>
        <field name="...">value</field>*
      </document>*
    </corpus>

All five section children are optional; the `timestamp` attribute is optional
(undated documents are accepted for atemporal analysis and rejected by the
temporal operations). Any other child element is preserved as a structured
field, keyed by its tag, never indexed unless mapped explicitly.
"""

from __future__ import annotations

import io
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Union

from ..errors import ConfigurationError, IngestionError, XmlSyntaxError
from .analysis import CODES_BY_LANGUAGE, LANGUAGE_CODES, require_language

CANONICAL_SECTIONS = ("title", "authors", "abstract", "keywords", "body")

Source = Union[str, os.PathLike, bytes, IO[bytes]]


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO 8601 instant and normalize it to UTC."""
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True, eq=True)
class Document:
    """One timestamped report/article/activity with sections and fields."""

    id: str
    sections: dict[str, str]
    timestamp: datetime | None
    structured_fields: dict[str, str]
    source_url: str

    def __post_init__(self):
        if not self.id:
            raise IngestionError("document id must be non-empty")
        if not self.source_url:
            raise IngestionError(f"document {self.id!r} has an empty url")
        sections = {name: self.sections.get(name, "")
                    for name in CANONICAL_SECTIONS}
        unknown = set(self.sections) - set(CANONICAL_SECTIONS)
        if unknown:
            raise ConfigurationError(
                f"unknown section name(s): {sorted(unknown)}")
        object.__setattr__(self, "sections", sections)

    @property
    def title(self) -> str:
        return self.sections["title"]


@dataclass(frozen=True)
class Provenance:
    source: str
    ingested_at: datetime


@dataclass(frozen=True, eq=False)
class Corpus:
    """Immutable ordered document collection with one fixed language."""

    documents: tuple[Document, ...]
    language: str
    provenance: Provenance

    def __post_init__(self):
        require_language(self.language)
        by_id: dict[str, Document] = {}
        for doc in self.documents:
            if doc.id in by_id:
                raise IngestionError(f"duplicate document id: {doc.id}")
            by_id[doc.id] = doc
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __eq__(self, other) -> bool:
        # provenance is ingestion metadata, not corpus content
        return (isinstance(other, Corpus)
                and self.language == other.language
                and self.documents == other.documents)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def get(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise IngestionError(f"unknown document id: {doc_id}") from None

    @property
    def fully_timestamped(self) -> bool:
        return all(doc.timestamp is not None for doc in self.documents)


def _element_text(elem: ET.Element | None) -> str:
    if elem is None:
        return ""
    return "".join(elem.itertext()).strip()


def _read_source(source: Source) -> tuple[bytes, str]:
    if isinstance(source, bytes):
        return source, "<bytes>"
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        with open(path, "rb") as fh:
            return fh.read(), path
    data = source.read()
    if isinstance(data, str):
        data = data.encode("utf-8")
    return data, getattr(source, "name", "<stream>")


def load_documents(source: Source, language: str | None = None) -> Corpus:
    """Ingest a corpus XML file, byte stream, or path.

    The XML root's `language` attribute is authoritative; an explicit
    `language` argument must agree with it.
    """
    data, origin = _read_source(source)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XmlSyntaxError(f"malformed corpus XML: {exc.msg}",
                             line=line, column=column) from exc

    if root.tag != "corpus":
        raise IngestionError(f"expected <corpus> root, got <{root.tag}>")
    code = root.get("language", "en")
    if code not in LANGUAGE_CODES:
        raise IngestionError(f"unknown corpus language code: {code!r}")
    corpus_language = LANGUAGE_CODES[code]
    if language is not None and require_language(language) != corpus_language:
        raise ConfigurationError(
            f"requested language {language!r} but corpus is declared "
            f"{corpus_language!r}")

    now = datetime.now(timezone.utc)
    documents = []
    for elem in root:
        if elem.tag != "document":
            raise IngestionError(f"unexpected element <{elem.tag}> in corpus")
        doc_id = elem.get("id")
        if not doc_id:
            raise IngestionError("document without id attribute")
        raw_ts = elem.get("timestamp")
        timestamp = None
        if raw_ts is not None:
            try:
                timestamp = parse_timestamp(raw_ts)
            except ValueError:
                raise IngestionError(
                    f"unparseable timestamp {raw_ts!r} on document {doc_id}"
                ) from None
            if timestamp > now + timedelta(hours=24):
                raise IngestionError(
                    f"timestamp of document {doc_id} lies in the future: "
                    f"{raw_ts}")
        url = elem.get("url", "")
        sections = {}
        fields = {}
        for child in elem:
            if child.tag in CANONICAL_SECTIONS:
                sections[child.tag] = _element_text(child)
            elif child.tag == "field":
                name = child.get("name")
                if not name:
                    raise IngestionError(
                        f"<field> without name in document {doc_id}")
                fields[name] = _element_text(child)
            else:
                fields[child.tag] = _element_text(child)
        documents.append(Document(id=doc_id, sections=sections,
                                  timestamp=timestamp,
                                  structured_fields=fields, source_url=url))

    return Corpus(documents=tuple(documents), language=corpus_language,
                  provenance=Provenance(source=origin, ingested_at=now))


def serialize_corpus(corpus: Corpus) -> bytes:
    """Corpus back to its XML wire form; re-ingesting yields an equal Corpus."""
    root = ET.Element("corpus", language=CODES_BY_LANGUAGE[corpus.language])
    for doc in corpus.documents:
        attrs = {"id": doc.id, "url": doc.source_url}
        if doc.timestamp is not None:
            attrs["timestamp"] = format_timestamp(doc.timestamp)
        elem = ET.SubElement(root, "document", attrs)
        for name in CANONICAL_SECTIONS:
            text = doc.sections.get(name, "")
            if text:
                ET.SubElement(elem, name).text = text
        for name in sorted(doc.structured_fields):
            field_elem = ET.SubElement(elem, "field", name=name)
            field_elem.text = doc.structured_fields[name]
    tree = ET.ElementTree(root)
    ET.indent(tree)
    buffer = io.BytesIO()
    tree.write(buffer, encoding="utf-8", xml_declaration=True)
    return buffer.getvalue()


def select_sections(doc: Document, names: Iterable[str]) -> str:
    """Newline-joined concatenation of the requested sections.

    Sections appear in canonical order; absent (empty) sections contribute
    nothing.
    """
    wanted = set(names)
    unknown = wanted - set(CANONICAL_SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown section name(s): {sorted(unknown)}")
    parts = [doc.sections[name] for name in CANONICAL_SECTIONS
             if name in wanted and doc.sections[name]]
    return "\n".join(parts)
