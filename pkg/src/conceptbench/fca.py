"""Formal concept enumeration and lattice construction.

Concepts are enumerated with Close-by-One over bitset rows (each closure is a
handful of word-parallel ANDs) and listed in a fixed canonical order: extents
in descending lectic order with object 0 most significant, so the top concept
comes first and repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .context import FormalContext
from .errors import ConfigurationError, ResourceLimitError

DEFAULT_MAX_CONCEPTS = 10 ** 6

LATTICE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class FormalConcept:
    """Closure pair: extent' = intent and intent' = extent."""

    extent: frozenset[str]
    intent: frozenset[str]
    extent_mask: int = field(compare=False, repr=False, default=0)
    intent_mask: int = field(compare=False, repr=False, default=0)


@dataclass(frozen=True, eq=False)
class ConceptLattice:
    context: FormalContext
    concepts: tuple[FormalConcept, ...]
    covering: tuple[tuple[int, int], ...]  # (lower, upper) concept indices
    own_objects: tuple[tuple[str, ...], ...]
    own_attributes: tuple[tuple[str, ...], ...]
    label_urls: dict[str, str]
    layers: tuple[int, ...]  # longest cover path from the top concept
    top: int
    bottom: int

    def upper_covers(self, index: int) -> list[int]:
        return [upper for lower, upper in self.covering if lower == index]

    def lower_covers(self, index: int) -> list[int]:
        return [lower for lower, upper in self.covering if upper == index]


def _lectic_key(extent_mask: int, n_objects: int) -> tuple[int, ...]:
    # object 0 is the most significant position
    return tuple((extent_mask >> g) & 1 for g in range(n_objects))


def compute_concepts(ctx: FormalContext,
                     max_concepts: int = DEFAULT_MAX_CONCEPTS) -> list[FormalConcept]:
    """All formal concepts of the context, canonically ordered.

    Close-by-One with the usual canonicity test; enumeration exceeding
    `max_concepts` aborts with ResourceLimitError and discards partials.
    """
    n = len(ctx.objects)
    rows = ctx.rows

    found: list[tuple[int, int]] = []
    intent0 = ctx.full_attributes_mask
    extent0 = ctx.extent_mask(intent0)
    # DFS over (extent, intent, next object index to try)
    stack: list[tuple[int, int, int]] = [(extent0, intent0, 0)]
    while stack:
        extent, intent, start = stack.pop()
        found.append((extent, intent))
        if len(found) > max_concepts:
            raise ResourceLimitError(
                f"context has more than {max_concepts} concepts")
        for j in range(start, n):
            if extent >> j & 1:
                continue
            candidate_intent = intent & rows[j]
            candidate_extent = ctx.extent_mask(candidate_intent)
            below = (1 << j) - 1
            if (candidate_extent & below) == (extent & below):
                stack.append((candidate_extent, candidate_intent, j + 1))

    found.sort(key=lambda pair: _lectic_key(pair[0], n), reverse=True)
    return [FormalConcept(extent=ctx.object_ids(extent),
                          intent=ctx.attribute_names(intent),
                          extent_mask=extent, intent_mask=intent)
            for extent, intent in found]


def build_lattice(ctx: FormalContext,
                  concepts: list[FormalConcept]) -> ConceptLattice:
    """Covering relation (transitive reduction of extent inclusion) plus
    reduced labels and per-label URLs."""
    masks = [c.extent_mask for c in concepts]
    by_extent = {mask: i for i, mask in enumerate(masks)}
    if len(by_extent) != len(concepts):
        raise ValueError("internal error: duplicate concepts in list")
    for concept in concepts:
        if ctx.extent_mask(concept.intent_mask) != concept.extent_mask or \
                ctx.intent_mask(concept.extent_mask) != concept.intent_mask:
            raise ValueError(
                "internal error: concept list is not closed "
                f"(offending extent: {sorted(concept.extent)})")

    order = sorted(range(len(concepts)),
                   key=lambda i: bin(masks[i]).count("1"))
    covering: list[tuple[int, int]] = []
    uppers: list[list[int]] = [[] for _ in concepts]
    for i in order:
        covers: list[int] = []
        for j in order:
            if masks[i] == masks[j] or (masks[i] & masks[j]) != masks[i]:
                continue
            # j is a strict superconcept; keep only the minimal ones
            if any((masks[c] & masks[j]) == masks[c] for c in covers):
                continue
            covers.append(j)
        for j in covers:
            covering.append((i, j))
            uppers[i].append(j)

    # reduced labels
    own_objects: list[list[str]] = [[] for _ in concepts]
    own_attributes: list[list[str]] = [[] for _ in concepts]
    for g, obj in enumerate(ctx.objects):
        closure = ctx.extent_mask(ctx.rows[g])
        own_objects[by_extent[closure]].append(obj.id)
    for m, name in enumerate(ctx.attributes):
        extent = ctx.cols[m]
        own_attributes[by_extent[extent]].append(name)

    label_urls = {obj.id: obj.url for obj in ctx.objects}

    top = max(range(len(concepts)), key=lambda i: bin(masks[i]).count("1"))
    bottom = min(range(len(concepts)), key=lambda i: bin(masks[i]).count("1"))

    # layer = longest cover path from the top, walking down the order
    layers = [0] * len(concepts)
    for i in sorted(range(len(concepts)),
                    key=lambda i: -bin(masks[i]).count("1")):
        for j in uppers[i]:
            layers[i] = max(layers[i], layers[j] + 1)

    return ConceptLattice(
        context=ctx, concepts=tuple(concepts),
        covering=tuple(sorted(covering)),
        own_objects=tuple(tuple(sorted(own)) for own in own_objects),
        own_attributes=tuple(tuple(sorted(own)) for own in own_attributes),
        label_urls=label_urls, layers=tuple(layers), top=top, bottom=bottom)


def lattice_to_dict(lattice: ConceptLattice) -> dict:
    ctx = lattice.context
    order = {obj.id: i for i, obj in enumerate(ctx.objects)}
    attr_order = {name: i for i, name in enumerate(ctx.attributes)}
    nodes = []
    for i, concept in enumerate(lattice.concepts):
        extent = sorted(concept.extent, key=order.__getitem__)
        intent = sorted(concept.intent, key=attr_order.__getitem__)
        nodes.append({
            "index": i,
            "extent": extent,
            "intent": intent,
            "extent_size": len(extent),
            "intent_size": len(intent),
            "own_objects": list(lattice.own_objects[i]),
            "own_attributes": list(lattice.own_attributes[i]),
            "urls": {obj_id: lattice.label_urls.get(obj_id, "")
                     for obj_id in lattice.own_objects[i]},
            "layer": lattice.layers[i],
        })
    return {
        "version": LATTICE_FORMAT_VERSION,
        "kind": "lattice",
        "nodes": nodes,
        "edges": [list(edge) for edge in lattice.covering],
        "layer_count": max(lattice.layers) + 1 if lattice.layers else 0,
        "top": lattice.top,
        "bottom": lattice.bottom,
    }


def export_lattice(lattice: ConceptLattice, format: str = "json") -> bytes:
    """Deterministic lattice export for the UI (json) or offline rendering
    (dot)."""
    if format == "json":
        return (json.dumps(lattice_to_dict(lattice), ensure_ascii=False,
                           sort_keys=True, separators=(",", ":")) + "\n"
                ).encode("utf-8")
    if format == "dot":
        lines = ["digraph lattice {", "  rankdir=TB;",
                 '  node [shape=circle];']
        for i, concept in enumerate(lattice.concepts):
            own_o = ",".join(lattice.own_objects[i])
            own_a = ",".join(lattice.own_attributes[i])
            label_parts = [part for part in (own_a, own_o) if part]
            label = "\\n".join(label_parts) if label_parts else ""
            lines.append(f'  c{i} [label="{label}"];')
        for lower, upper in lattice.covering:
            lines.append(f"  c{upper} -> c{lower};")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ConfigurationError(f"unknown lattice export format: {format!r}")


def object_concept_map(lattice: ConceptLattice) -> dict[str, int]:
    """Object id -> index of its object concept (the minimal concept whose
    extent contains the object)."""
    ctx = lattice.context
    by_extent = {c.extent_mask: i for i, c in enumerate(lattice.concepts)}
    mapping = {}
    for g, obj in enumerate(ctx.objects):
        closure = ctx.extent_mask(ctx.rows[g])
        try:
            mapping[obj.id] = by_extent[closure]
        except KeyError:
            raise ValueError(
                f"internal error: no object concept for {obj.id!r}") from None
    return mapping


__all__ = [
    "DEFAULT_MAX_CONCEPTS",
    "ConceptLattice",
    "FormalConcept",
    "build_lattice",
    "compute_concepts",
    "export_lattice",
    "lattice_to_dict",
    "object_concept_map",
]
