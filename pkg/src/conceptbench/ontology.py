"""Layered attribute ontology: search terms, term clusters, attributes, rules.

Ontology XML schema (UTF-8):

    <ontology>
      <cluster name="..."> <term>phrase</term>+ </cluster>*
      <attribute kind="textmining" name="...">
        <clusterRef name="..."/> <sections>title abstract</sections>?
      </attribute>
      <attribute kind="temporal" name="...">
        <window from="ISO8601" to="ISO8601"/> |
        <periodic weekdays="mon,sat" hours="8-17"/>
      </attribute>
      <attribute kind="compound" name="...">
        one of <and> <or> <not> <ref name="..."/> (nested)
      </attribute>
      <objectCluster name="..." key="field:person|time:day" missing="skip|own-group|error"/>
      <segmentation name="...">
        <predicate> expression </predicate> | <interval from to/>+
      </segmentation>
    </ontology>
"""

from __future__ import annotations

import io
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Optional, Union

from .corpus.index import InvertedIndex, phrase_in_document
from .corpus.model import (
    CANONICAL_SECTIONS,
    Corpus,
    Document,
    format_timestamp,
    parse_timestamp,
)
from .errors import (
    EvaluationError,
    OntologyError,
    RuleError,
    XmlSyntaxError,
)

MAX_COMPOUND_DEPTH = 32

GRANULARITIES = ("hour", "day", "week", "month", "year")

_WEEKDAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


class MissingKeyWarning(UserWarning):
    """A document lacked an object-cluster key and was skipped."""


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchTerm:
    phrase: str
    notes: str = ""


@dataclass(frozen=True)
class TermCluster:
    name: str
    terms: tuple[SearchTerm, ...]


@dataclass(frozen=True)
class TemporalWindow:
    """Half-open UTC interval [start, end); a None bound is unbounded."""

    start: Optional[datetime]
    end: Optional[datetime]

    def contains(self, ts: datetime) -> bool:
        if self.start is not None and ts < self.start:
            return False
        if self.end is not None and ts >= self.end:
            return False
        return True

    def overlaps(self, other: "TemporalWindow") -> bool:
        lo = max(filter(None, (self.start, other.start)), default=None)
        hi = min(filter(None, (self.end, other.end)), default=None)
        if lo is None or hi is None:
            return True
        return lo < hi

    def label(self) -> str:
        lo = format_timestamp(self.start) if self.start else "*"
        hi = format_timestamp(self.end) if self.end else "*"
        return f"{lo}..{hi}"


@dataclass(frozen=True)
class PeriodicPredicate:
    """Weekday-set and/or hour-of-day range; the hour range is half-open
    and may wrap past midnight (e.g. 22-6)."""

    weekdays: Optional[frozenset[int]] = None  # 0 = Monday
    hours: Optional[tuple[int, int]] = None

    def matches(self, ts: datetime) -> bool:
        if self.weekdays is not None and ts.weekday() not in self.weekdays:
            return False
        if self.hours is not None:
            lo, hi = self.hours
            if lo <= hi:
                if not (lo <= ts.hour < hi):
                    return False
            elif not (ts.hour >= lo or ts.hour < hi):
                return False
        return True


class Expr:
    """Node of a compound attribute's boolean expression tree."""


@dataclass(frozen=True)
class And(Expr):
    operands: tuple[Expr, ...]


@dataclass(frozen=True)
class Or(Expr):
    operands: tuple[Expr, ...]


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class Ref(Expr):
    name: str
    target: "Attribute" = field(compare=False, repr=False, default=None)


@dataclass(frozen=True)
class TextMiningAttribute:
    name: str
    cluster: TermCluster
    sections: frozenset[str]


@dataclass(frozen=True)
class TemporalAttribute:
    name: str
    window: Optional[TemporalWindow] = None
    periodic: Optional[PeriodicPredicate] = None


@dataclass(frozen=True)
class CompoundAttribute:
    name: str
    expr: Expr


Attribute = Union[TextMiningAttribute, TemporalAttribute, CompoundAttribute]


@dataclass(frozen=True)
class ObjectClusterRule:
    """Groups documents into composite objects by a key expression.

    key forms: "field:<structured field name>" or "time:<granularity>".
    """

    name: str
    key: str
    missing: str = "skip"  # skip | own-group | error

    def __post_init__(self):
        kind, _, arg = self.key.partition(":")
        if kind not in ("field", "time") or not arg:
            raise RuleError(f"rule {self.name!r}: bad key {self.key!r} "
                            "(expected field:<name> or time:<granularity>)")
        if kind == "time" and arg not in GRANULARITIES:
            raise RuleError(f"rule {self.name!r}: unknown granularity {arg!r}")
        if self.missing not in ("skip", "own-group", "error"):
            raise RuleError(
                f"rule {self.name!r}: bad missing-key policy {self.missing!r}")


@dataclass(frozen=True)
class SegmentationRule:
    name: str
    predicate: Optional[Expr] = None
    intervals: Optional[tuple[TemporalWindow, ...]] = None

    def __post_init__(self):
        if (self.predicate is None) == (self.intervals is None):
            raise RuleError(f"segmentation {self.name!r} needs exactly one of "
                            "a predicate or an interval list")


@dataclass(frozen=True)
class CompositeObject:
    """Merged analysis object: one group of documents under a shared key."""

    id: str
    key: str
    member_ids: tuple[str, ...]
    sections: dict[str, str]
    timestamp: Optional[datetime]
    member_urls: tuple[str, ...]


@dataclass(frozen=True)
class Ontology:
    clusters: dict[str, TermCluster]
    attributes: dict[str, Attribute]
    object_cluster_rules: dict[str, ObjectClusterRule]
    segmentation_rules: dict[str, SegmentationRule]

    def attribute(self, name: str) -> Attribute:
        try:
            return self.attributes[name]
        except KeyError:
            raise OntologyError(f"unknown attribute: {name}") from None


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _parse_expr(elem: ET.Element, depth: int = 0) -> Expr:
    if depth > MAX_COMPOUND_DEPTH:
        raise OntologyError(
            f"compound expression exceeds depth {MAX_COMPOUND_DEPTH}")
    tag = elem.tag
    if tag in ("and", "or"):
        operands = tuple(_parse_expr(child, depth + 1) for child in elem)
        if not operands:
            raise OntologyError(f"<{tag}> needs at least one operand")
        return And(operands) if tag == "and" else Or(operands)
    if tag == "not":
        children = list(elem)
        if len(children) != 1:
            raise OntologyError("<not> needs exactly one operand")
        return Not(_parse_expr(children[0], depth + 1))
    if tag == "ref":
        name = elem.get("name")
        if not name:
            raise OntologyError("<ref> without name attribute")
        return Ref(name)
    raise OntologyError(f"unknown expression element <{tag}>")


def _expr_refs(expr: Expr) -> list[str]:
    if isinstance(expr, Ref):
        return [expr.name]
    if isinstance(expr, (And, Or)):
        return [name for op in expr.operands for name in _expr_refs(op)]
    if isinstance(expr, Not):
        return _expr_refs(expr.operand)
    return []


def _resolve_expr(expr: Expr, attributes: dict[str, Attribute]) -> Expr:
    if isinstance(expr, Ref):
        return Ref(expr.name, attributes[expr.name])
    if isinstance(expr, And):
        return And(tuple(_resolve_expr(op, attributes) for op in expr.operands))
    if isinstance(expr, Or):
        return Or(tuple(_resolve_expr(op, attributes) for op in expr.operands))
    if isinstance(expr, Not):
        return Not(_resolve_expr(expr.operand, attributes))
    return expr


def _parse_sections(elem: ET.Element | None) -> frozenset[str]:
    if elem is None:
        return frozenset(CANONICAL_SECTIONS)
    names = frozenset((elem.text or "").replace(",", " ").split())
    unknown = names - set(CANONICAL_SECTIONS)
    if unknown:
        raise OntologyError(f"unknown section name(s): {sorted(unknown)}")
    return names or frozenset(CANONICAL_SECTIONS)


def _parse_window(elem: ET.Element) -> TemporalWindow:
    raw_from, raw_to = elem.get("from"), elem.get("to")
    if raw_from is None and raw_to is None:
        raise OntologyError("<window>/<interval> needs a from or to bound")
    try:
        start = parse_timestamp(raw_from) if raw_from else None
        end = parse_timestamp(raw_to) if raw_to else None
    except ValueError as exc:
        raise OntologyError(f"bad timestamp in window: {exc}") from None
    if start and end and end <= start:
        raise OntologyError(f"empty window: {raw_from}..{raw_to}")
    return TemporalWindow(start, end)


def _parse_periodic(elem: ET.Element) -> PeriodicPredicate:
    weekdays = None
    if elem.get("weekdays"):
        names = [n.strip().lower() for n in elem.get("weekdays").split(",")]
        unknown = [n for n in names if n not in _WEEKDAYS]
        if unknown:
            raise OntologyError(f"unknown weekday(s): {unknown}")
        weekdays = frozenset(_WEEKDAYS.index(n) for n in names)
    hours = None
    if elem.get("hours"):
        try:
            lo, hi = (int(part) for part in elem.get("hours").split("-"))
        except ValueError:
            raise OntologyError(
                f"bad hours range: {elem.get('hours')!r}") from None
        if not (0 <= lo <= 23 and 0 <= hi <= 24):
            raise OntologyError(f"hours out of range: {elem.get('hours')!r}")
        hours = (lo, hi)
    if weekdays is None and hours is None:
        raise OntologyError("<periodic> needs weekdays and/or hours")
    return PeriodicPredicate(weekdays=weekdays, hours=hours)


def parse_ontology(source: Union[bytes, str]) -> Ontology:
    """Parse and fully resolve an ontology; rejects dangling references,
    duplicate names, and reference cycles."""
    data = source.encode("utf-8") if isinstance(source, str) else source
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XmlSyntaxError(f"malformed ontology XML: {exc.msg}",
                             line=line, column=column) from exc
    if root.tag != "ontology":
        raise OntologyError(f"expected <ontology> root, got <{root.tag}>")

    clusters: dict[str, TermCluster] = {}
    raw_attrs: dict[str, tuple[str, ET.Element]] = {}
    object_rules: dict[str, ObjectClusterRule] = {}
    segmentations: dict[str, SegmentationRule] = {}

    def check_name(name: str | None, kind: str, table: dict) -> str:
        if not name:
            raise OntologyError(f"<{kind}> without name attribute")
        if name in table:
            raise OntologyError(f"duplicate {kind} name: {name}")
        return name

    for elem in root:
        if elem.tag == "cluster":
            name = check_name(elem.get("name"), "cluster", clusters)
            terms = []
            for term_elem in elem.findall("term"):
                phrase = (term_elem.text or "").strip()
                if not phrase:
                    raise OntologyError(f"empty <term> in cluster {name!r}")
                terms.append(SearchTerm(phrase=phrase,
                                        notes=term_elem.get("notes", "")))
            if not terms:
                raise OntologyError(f"cluster {name!r} has no terms")
            clusters[name] = TermCluster(name=name, terms=tuple(terms))
        elif elem.tag == "attribute":
            name = check_name(elem.get("name"), "attribute", raw_attrs)
            kind = elem.get("kind")
            if kind not in ("textmining", "temporal", "compound"):
                raise OntologyError(
                    f"attribute {name!r}: unknown kind {kind!r}")
            raw_attrs[name] = (kind, elem)
        elif elem.tag == "objectCluster":
            name = check_name(elem.get("name"), "objectCluster", object_rules)
            object_rules[name] = ObjectClusterRule(
                name=name, key=elem.get("key", ""),
                missing=elem.get("missing", "skip"))
        elif elem.tag == "segmentation":
            name = check_name(elem.get("name"), "segmentation", segmentations)
            predicate_elem = elem.find("predicate")
            intervals = tuple(_parse_window(iv)
                              for iv in elem.findall("interval"))
            predicate = None
            if predicate_elem is not None:
                children = list(predicate_elem)
                if len(children) != 1:
                    raise OntologyError(
                        f"segmentation {name!r}: <predicate> needs exactly "
                        "one expression")
                predicate = _parse_expr(children[0])
            segmentations[name] = SegmentationRule(
                name=name, predicate=predicate, intervals=intervals or None)
        else:
            raise OntologyError(f"unknown ontology element <{elem.tag}>")

    # first pass: build non-compound attributes and raw compound expressions
    attributes: dict[str, Attribute] = {}
    pending: dict[str, Expr] = {}
    for name, (kind, elem) in raw_attrs.items():
        if kind == "textmining":
            cluster_ref = elem.find("clusterRef")
            if cluster_ref is None or not cluster_ref.get("name"):
                raise OntologyError(
                    f"textmining attribute {name!r} needs a <clusterRef>")
            cluster_name = cluster_ref.get("name")
            if cluster_name not in clusters:
                raise OntologyError(
                    f"attribute {name!r} references unknown cluster "
                    f"{cluster_name!r}")
            attributes[name] = TextMiningAttribute(
                name=name, cluster=clusters[cluster_name],
                sections=_parse_sections(elem.find("sections")))
        elif kind == "temporal":
            window_elem = elem.find("window")
            periodic_elem = elem.find("periodic")
            if (window_elem is None) == (periodic_elem is None):
                raise OntologyError(
                    f"temporal attribute {name!r} needs exactly one of "
                    "<window> or <periodic>")
            attributes[name] = TemporalAttribute(
                name=name,
                window=_parse_window(window_elem)
                if window_elem is not None else None,
                periodic=_parse_periodic(periodic_elem)
                if periodic_elem is not None else None)
        else:
            children = list(elem)
            if len(children) != 1:
                raise OntologyError(
                    f"compound attribute {name!r} needs exactly one root "
                    "expression")
            pending[name] = _parse_expr(children[0])

    # dangling references and cycles over the compound dependency graph
    for name, expr in pending.items():
        for ref in _expr_refs(expr):
            if ref not in raw_attrs:
                raise OntologyError(
                    f"attribute {name!r} references unknown attribute {ref!r}")

    resolved: set[str] = set()
    visiting: list[str] = []

    def resolve(name: str) -> None:
        if name in resolved or name in attributes:
            return
        if name in visiting:
            cycle = visiting[visiting.index(name):] + [name]
            raise OntologyError(
                "compound attribute cycle: " + " -> ".join(cycle))
        visiting.append(name)
        for ref in _expr_refs(pending[name]):
            if ref in pending:
                resolve(ref)
        visiting.pop()
        attributes[name] = CompoundAttribute(
            name=name, expr=_resolve_expr(pending[name], attributes))
        resolved.add(name)

    for name in pending:
        resolve(name)

    # validate and resolve segmentation rules against the attribute table
    for name, rule in list(segmentations.items()):
        if rule.predicate is not None:
            for ref in _expr_refs(rule.predicate):
                if ref not in attributes:
                    raise OntologyError(
                        f"segmentation {name!r} references unknown "
                        f"attribute {ref!r}")
            segmentations[name] = SegmentationRule(
                name=name, predicate=_resolve_expr(rule.predicate, attributes),
                intervals=None)
        else:
            _check_intervals(rule)

    return Ontology(clusters=clusters, attributes=attributes,
                    object_cluster_rules=object_rules,
                    segmentation_rules=segmentations)


def _check_intervals(rule: SegmentationRule) -> None:
    intervals = sorted(rule.intervals,
                       key=lambda w: (w.start is not None, w.start))
    for left, right in zip(intervals, intervals[1:]):
        if left.overlaps(right):
            raise RuleError(
                f"segmentation {rule.name!r}: overlapping intervals "
                f"{left.label()} and {right.label()}")


def serialize_ontology(ontology: Ontology) -> bytes:
    """Ontology back to its XML wire form (round-trips through parse)."""
    root = ET.Element("ontology")
    for cluster in ontology.clusters.values():
        elem = ET.SubElement(root, "cluster", name=cluster.name)
        for term in cluster.terms:
            term_elem = ET.SubElement(elem, "term")
            if term.notes:
                term_elem.set("notes", term.notes)
            term_elem.text = term.phrase

    def write_expr(parent: ET.Element, expr: Expr) -> None:
        if isinstance(expr, Ref):
            ET.SubElement(parent, "ref", name=expr.name)
        elif isinstance(expr, Not):
            write_expr(ET.SubElement(parent, "not"), expr.operand)
        elif isinstance(expr, (And, Or)):
            node = ET.SubElement(parent,
                                 "and" if isinstance(expr, And) else "or")
            for op in expr.operands:
                write_expr(node, op)

    for attr in ontology.attributes.values():
        if isinstance(attr, TextMiningAttribute):
            elem = ET.SubElement(root, "attribute", kind="textmining",
                                 name=attr.name)
            ET.SubElement(elem, "clusterRef", name=attr.cluster.name)
            sections = ET.SubElement(elem, "sections")
            sections.text = " ".join(s for s in CANONICAL_SECTIONS
                                     if s in attr.sections)
        elif isinstance(attr, TemporalAttribute):
            elem = ET.SubElement(root, "attribute", kind="temporal",
                                 name=attr.name)
            if attr.window is not None:
                window = ET.SubElement(elem, "window")
                if attr.window.start:
                    window.set("from", format_timestamp(attr.window.start))
                if attr.window.end:
                    window.set("to", format_timestamp(attr.window.end))
            if attr.periodic is not None:
                periodic = ET.SubElement(elem, "periodic")
                if attr.periodic.weekdays is not None:
                    periodic.set("weekdays", ",".join(
                        _WEEKDAYS[d] for d in sorted(attr.periodic.weekdays)))
                if attr.periodic.hours is not None:
                    periodic.set(
                        "hours", f"{attr.periodic.hours[0]}-"
                                 f"{attr.periodic.hours[1]}")
        else:
            elem = ET.SubElement(root, "attribute", kind="compound",
                                 name=attr.name)
            write_expr(elem, attr.expr)

    for rule in ontology.object_cluster_rules.values():
        ET.SubElement(root, "objectCluster", name=rule.name, key=rule.key,
                      missing=rule.missing)
    for rule in ontology.segmentation_rules.values():
        elem = ET.SubElement(root, "segmentation", name=rule.name)
        if rule.predicate is not None:
            write_expr(ET.SubElement(elem, "predicate"), rule.predicate)
        for window in rule.intervals or ():
            iv = ET.SubElement(elem, "interval")
            if window.start:
                iv.set("from", format_timestamp(window.start))
            if window.end:
                iv.set("to", format_timestamp(window.end))

    tree = ET.ElementTree(root)
    ET.indent(tree)
    buffer = io.BytesIO()
    tree.write(buffer, encoding="utf-8", xml_declaration=True)
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate_attribute(attr: Attribute, doc: Document,
                       index: InvertedIndex) -> bool:
    """Evaluate one attribute on one document.

    Text-mining attributes test the attribute's sections intersected with the
    sections actually indexed; temporal attributes require a timestamp and
    raise EvaluationError on undated documents.
    """
    if isinstance(attr, TextMiningAttribute):
        sections = attr.sections & set(index.sections)
        return any(phrase_in_document(index, term.phrase, doc.id, sections)
                   for term in attr.cluster.terms)
    if isinstance(attr, TemporalAttribute):
        if doc.timestamp is None:
            raise EvaluationError(
                f"temporal attribute {attr.name!r} on undated document "
                f"{doc.id!r}")
        ok = True
        if attr.window is not None:
            ok = ok and attr.window.contains(doc.timestamp)
        if attr.periodic is not None:
            ok = ok and attr.periodic.matches(doc.timestamp)
        return ok
    if isinstance(attr, CompoundAttribute):
        return _evaluate_expr(attr.expr, doc, index)
    raise EvaluationError(f"unknown attribute type: {type(attr).__name__}")


def _evaluate_expr(expr: Expr, doc: Document, index: InvertedIndex) -> bool:
    if isinstance(expr, Ref):
        if expr.target is None:
            raise EvaluationError(f"unresolved attribute reference "
                                  f"{expr.name!r}")
        return evaluate_attribute(expr.target, doc, index)
    if isinstance(expr, And):
        return all(_evaluate_expr(op, doc, index) for op in expr.operands)
    if isinstance(expr, Or):
        return any(_evaluate_expr(op, doc, index) for op in expr.operands)
    if isinstance(expr, Not):
        return not _evaluate_expr(expr.operand, doc, index)
    raise EvaluationError(f"unknown expression node: {type(expr).__name__}")


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

def apply_segmentation(corpus: Corpus, rule: SegmentationRule,
                       index: InvertedIndex) -> list[tuple[str, Corpus]]:
    """Partition a corpus into labelled segments.

    Predicate rules yield the two segments ("match", "non-match"); interval
    rules yield one segment per interval, in ascending order, plus a final
    "outside" segment. Every document lands in exactly one segment.
    """
    from .corpus.model import Corpus as CorpusType  # local alias for clarity

    def sub_corpus(docs: list[Document]) -> Corpus:
        return CorpusType(documents=tuple(docs), language=corpus.language,
                          provenance=corpus.provenance)

    if rule.predicate is not None:
        matched, unmatched = [], []
        for doc in corpus:
            try:
                hit = _evaluate_expr(rule.predicate, doc, index)
            except EvaluationError as exc:
                raise EvaluationError(
                    f"segmentation {rule.name!r} not evaluable: {exc}"
                ) from exc
            (matched if hit else unmatched).append(doc)
        return [("match", sub_corpus(matched)),
                ("non-match", sub_corpus(unmatched))]

    _check_intervals(rule)
    intervals = sorted(rule.intervals,
                       key=lambda w: (w.start is not None, w.start))
    buckets: list[list[Document]] = [[] for _ in intervals]
    outside: list[Document] = []
    for doc in corpus:
        if doc.timestamp is None:
            raise EvaluationError(
                f"segmentation {rule.name!r} needs timestamps; document "
                f"{doc.id!r} is undated")
        for i, window in enumerate(intervals):
            if window.contains(doc.timestamp):
                buckets[i].append(doc)
                break
        else:
            outside.append(doc)
    segments = [(window.label(), sub_corpus(bucket))
                for window, bucket in zip(intervals, buckets)]
    segments.append(("outside", sub_corpus(outside)))
    return segments


# ---------------------------------------------------------------------------
# Object clustering
# ---------------------------------------------------------------------------

def truncate_timestamp(ts: datetime, granularity: str) -> datetime:
    if granularity == "hour":
        return ts.replace(minute=0, second=0, microsecond=0)
    if granularity == "day":
        return ts.replace(hour=0, minute=0, second=0, microsecond=0)
    if granularity == "week":
        day = ts.replace(hour=0, minute=0, second=0, microsecond=0)
        return day - timedelta(days=day.weekday())
    if granularity == "month":
        return ts.replace(day=1, hour=0, minute=0, second=0, microsecond=0)
    if granularity == "year":
        return ts.replace(month=1, day=1, hour=0, minute=0, second=0,
                          microsecond=0)
    raise RuleError(f"unknown granularity: {granularity!r}")


_KEY_FORMATS = {"hour": "%Y-%m-%dT%H", "day": "%Y-%m-%d", "week": "%G-W%V",
                "month": "%Y-%m", "year": "%Y"}


def resolve_key(rule: ObjectClusterRule, doc: Document) -> Optional[str]:
    """Grouping key of a document under a rule, or None when missing."""
    kind, _, arg = rule.key.partition(":")
    if kind == "field":
        value = doc.structured_fields.get(arg, "")
        return value or None
    if doc.timestamp is None:
        return None
    return truncate_timestamp(doc.timestamp, arg).strftime(_KEY_FORMATS[arg])


def apply_object_cluster(corpus: Corpus,
                         rule: ObjectClusterRule) -> list[CompositeObject]:
    """One composite per distinct key, in first-seen document order.

    Composite section text is the member texts concatenated per section, so
    composites can be indexed like plain documents.
    """
    groups: dict[str, list[Document]] = {}
    order: list[str] = []
    for doc in corpus:
        key = resolve_key(rule, doc)
        if key is None:
            if rule.missing == "error":
                raise RuleError(
                    f"rule {rule.name!r}: document {doc.id!r} has no key "
                    f"{rule.key!r}")
            if rule.missing == "skip":
                warnings.warn(
                    f"rule {rule.name!r}: skipping document {doc.id!r} "
                    f"without key {rule.key!r}", MissingKeyWarning,
                    stacklevel=2)
                continue
            key = f"doc:{doc.id}"
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(doc)

    composites = []
    for key in order:
        members = groups[key]
        sections = {
            name: "\n".join(doc.sections[name] for doc in members
                            if doc.sections[name])
            for name in CANONICAL_SECTIONS
        }
        timestamps = [doc.timestamp for doc in members]
        timestamp = (min(timestamps)
                     if all(ts is not None for ts in timestamps) else None)
        composites.append(CompositeObject(
            id=f"{rule.name}:{key}", key=key,
            member_ids=tuple(doc.id for doc in members),
            sections=sections, timestamp=timestamp,
            member_urls=tuple(doc.source_url for doc in members)))
    return composites


def composites_as_corpus(composites: list[CompositeObject],
                         language: str, provenance) -> Corpus:
    """View composites as a derived corpus so they can be indexed and
    evaluated exactly like documents."""
    docs = tuple(
        Document(id=comp.id, sections=dict(comp.sections),
                 timestamp=comp.timestamp,
                 structured_fields={"members": ",".join(comp.member_ids)},
                 source_url=comp.member_urls[0] if comp.member_urls else "composite:" + comp.id)
        for comp in composites)
    return Corpus(documents=docs, language=language, provenance=provenance)
