"""The cross table: a formal context (objects x attributes incidence).

Incidence is stored as packed bit rows (one Python int per object, bit m set
iff the object has attribute m) plus the transposed columns, so derivation
operators are word-parallel bitwise ANDs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus.index import InvertedIndex
from .corpus.model import Corpus
from .errors import ConfigurationError, EvaluationError, UnknownNameError
from .ontology import Attribute, evaluate_attribute

CONTEXT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ContextObject:
    """Row header: object id plus the label and URL shown on lattice nodes."""

    id: str
    label: str
    url: str


@dataclass(frozen=True, eq=False)
class FormalContext:
    objects: tuple[ContextObject, ...]
    attributes: tuple[str, ...]
    rows: tuple[int, ...]  # per object: bitmask over attribute indices

    cols: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.rows) != len(self.objects):
            raise ConfigurationError("incidence row count != object count")
        ids = [obj.id for obj in self.objects]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate object ids in context")
        if len(set(self.attributes)) != len(self.attributes):
            raise ConfigurationError("duplicate attribute names in context")
        width = 1 << len(self.attributes)
        if any(row >= width or row < 0 for row in self.rows):
            raise ConfigurationError("incidence row wider than attribute list")
        cols = []
        for m in range(len(self.attributes)):
            col = 0
            for g, row in enumerate(self.rows):
                if row >> m & 1:
                    col |= 1 << g
            cols.append(col)
        object.__setattr__(self, "cols", tuple(cols))
        object.__setattr__(self, "_object_index",
                           {obj.id: i for i, obj in enumerate(self.objects)})
        object.__setattr__(self, "_attribute_index",
                           {name: i for i, name in enumerate(self.attributes)})

    def __eq__(self, other) -> bool:
        return (isinstance(other, FormalContext)
                and self.objects == other.objects
                and self.attributes == other.attributes
                and self.rows == other.rows)

    def object_index(self, object_id: str) -> int:
        try:
            return self._object_index[object_id]
        except KeyError:
            raise UnknownNameError(f"unknown object: {object_id}") from None

    def attribute_index(self, name: str) -> int:
        try:
            return self._attribute_index[name]
        except KeyError:
            raise UnknownNameError(f"unknown attribute: {name}") from None

    def incidence(self, object_id: str, attribute: str) -> bool:
        return bool(self.rows[self.object_index(object_id)]
                    >> self.attribute_index(attribute) & 1)

    # -- bitmask-level derivations (used by the concept enumerator) --------

    @property
    def full_objects_mask(self) -> int:
        return (1 << len(self.objects)) - 1

    @property
    def full_attributes_mask(self) -> int:
        return (1 << len(self.attributes)) - 1

    def extent_mask(self, attribute_mask: int) -> int:
        extent = self.full_objects_mask
        m = attribute_mask
        while m:
            low = m & -m
            extent &= self.cols[low.bit_length() - 1]
            m ^= low
        return extent

    def intent_mask(self, object_mask: int) -> int:
        intent = self.full_attributes_mask
        g = object_mask
        while g:
            low = g & -g
            intent &= self.rows[low.bit_length() - 1]
            g ^= low
        return intent

    def object_ids(self, object_mask: int) -> frozenset[str]:
        return frozenset(self.objects[i].id
                         for i in _bit_indices(object_mask))

    def attribute_names(self, attribute_mask: int) -> frozenset[str]:
        return frozenset(self.attributes[i]
                         for i in _bit_indices(attribute_mask))


def _bit_indices(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def build_context(corpus: Corpus, attrs: Sequence[Attribute],
                  index: InvertedIndex,
                  urls: Mapping[str, str] | None = None,
                  labels: Mapping[str, str] | None = None) -> FormalContext:
    """Evaluate every attribute on every document of the corpus.

    Ordering of both axes follows the inputs, so identical inputs give
    identical bit matrices. `urls`/`labels` override the per-object URL and
    display label (defaults: the document's source URL and its id).
    """
    names = [attr.name for attr in attrs]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate attribute names: {names}")
    objects = []
    rows = []
    for doc in corpus:
        row = 0
        for m, attr in enumerate(attrs):
            try:
                if evaluate_attribute(attr, doc, index):
                    row |= 1 << m
            except EvaluationError as exc:
                raise EvaluationError(
                    f"attribute {attr.name!r} on object {doc.id!r}: {exc}"
                ) from exc
        rows.append(row)
        url = urls.get(doc.id, doc.source_url) if urls else doc.source_url
        label = labels.get(doc.id, doc.id) if labels else doc.id
        objects.append(ContextObject(id=doc.id, label=label, url=url))
    return FormalContext(objects=tuple(objects), attributes=tuple(names),
                         rows=tuple(rows))


def derive_extent(ctx: FormalContext, attributes: Iterable[str]) -> frozenset[str]:
    """B' = objects having every attribute in B (all objects for B = {})."""
    mask = 0
    for name in attributes:
        mask |= 1 << ctx.attribute_index(name)
    return ctx.object_ids(ctx.extent_mask(mask))


def derive_intent(ctx: FormalContext, objects: Iterable[str]) -> frozenset[str]:
    """A' = attributes shared by every object in A (all attrs for A = {})."""
    mask = 0
    for object_id in objects:
        mask |= 1 << ctx.object_index(object_id)
    return ctx.attribute_names(ctx.intent_mask(mask))


@dataclass(frozen=True)
class AttributeClustering:
    """Named groups that must partition the context's attribute set."""

    groups: dict[str, tuple[str, ...]]


def cluster_attributes(ctx: FormalContext, clustering: AttributeClustering,
                       mode: str = "any") -> FormalContext:
    """Collapse attribute columns group-wise to shrink the lattice.

    mode "any" ORs the member columns (object has the group if it has any
    member attribute); mode "all" ANDs them.
    """
    if mode not in ("any", "all"):
        raise ConfigurationError(f"unknown clustering mode: {mode!r}")
    seen: list[str] = []
    for members in clustering.groups.values():
        seen.extend(members)
    if sorted(seen) != sorted(ctx.attributes) or len(seen) != len(set(seen)):
        raise ConfigurationError(
            "clustering does not partition the attribute set")

    group_names = tuple(clustering.groups)
    rows = []
    member_masks = []
    for members in clustering.groups.values():
        mask = 0
        for name in members:
            mask |= 1 << ctx.attribute_index(name)
        member_masks.append(mask)
    for row in ctx.rows:
        new_row = 0
        for k, mask in enumerate(member_masks):
            hit = (row & mask) != 0 if mode == "any" else (row & mask) == mask
            if hit:
                new_row |= 1 << k
        rows.append(new_row)
    return FormalContext(objects=ctx.objects, attributes=group_names,
                         rows=tuple(rows))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _row_string(row: int, width: int) -> str:
    return "".join("X" if row >> m & 1 else "." for m in range(width))


def context_to_burmeister(ctx: FormalContext) -> bytes:
    """Plain-text cross table; loses labels and URLs."""
    lines = ["B", ""]
    lines.append(str(len(ctx.objects)))
    lines.append(str(len(ctx.attributes)))
    lines.extend(obj.id for obj in ctx.objects)
    lines.extend(ctx.attributes)
    lines.extend(_row_string(row, len(ctx.attributes)) for row in ctx.rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def context_from_burmeister(data: bytes) -> FormalContext:
    lines = data.decode("utf-8").splitlines()
    if not lines or lines[0].strip() != "B":
        raise ConfigurationError("not a Burmeister context (missing B header)")
    body = [line for line in lines[1:]]
    # skip the conventional blank line(s) after the header
    i = 0
    while i < len(body) and not body[i].strip():
        i += 1
    try:
        n_objects = int(body[i])
        n_attributes = int(body[i + 1])
    except (IndexError, ValueError):
        raise ConfigurationError("bad Burmeister header counts") from None
    names_start = i + 2
    object_ids = body[names_start:names_start + n_objects]
    attr_start = names_start + n_objects
    attributes = body[attr_start:attr_start + n_attributes]
    grid = body[attr_start + n_attributes:
                attr_start + n_attributes + n_objects]
    if len(object_ids) != n_objects or len(attributes) != n_attributes \
            or len(grid) != n_objects:
        raise ConfigurationError("truncated Burmeister context")
    rows = []
    for line in grid:
        if len(line) < n_attributes:
            raise ConfigurationError(f"short incidence row: {line!r}")
        row = 0
        for m, ch in enumerate(line[:n_attributes]):
            if ch in ("X", "x"):
                row |= 1 << m
            elif ch != ".":
                raise ConfigurationError(f"bad incidence character {ch!r}")
        rows.append(row)
    objects = tuple(ContextObject(id=oid, label=oid, url="")
                    for oid in object_ids)
    return FormalContext(objects=objects, attributes=tuple(attributes),
                         rows=tuple(rows))


def context_to_json(ctx: FormalContext) -> bytes:
    payload = {
        "version": CONTEXT_FORMAT_VERSION,
        "objects": [{"id": obj.id, "label": obj.label, "url": obj.url}
                    for obj in ctx.objects],
        "attributes": list(ctx.attributes),
        "rows": [_row_string(row, len(ctx.attributes)) for row in ctx.rows],
    }
    return (json.dumps(payload, ensure_ascii=False, sort_keys=True,
                       separators=(",", ":")) + "\n").encode("utf-8")


def context_from_json(data: bytes) -> FormalContext:
    payload = json.loads(data)
    if payload.get("version") != CONTEXT_FORMAT_VERSION:
        raise ConfigurationError(
            f"unsupported context format version: {payload.get('version')!r}")
    objects = tuple(ContextObject(id=obj["id"], label=obj["label"],
                                  url=obj["url"])
                    for obj in payload["objects"])
    attributes = tuple(payload["attributes"])
    rows = []
    for line in payload["rows"]:
        row = 0
        for m, ch in enumerate(line):
            if ch == "X":
                row |= 1 << m
        rows.append(row)
    return FormalContext(objects=objects, attributes=attributes,
                         rows=tuple(rows))
