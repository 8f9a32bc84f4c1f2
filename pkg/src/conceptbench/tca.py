"""Temporal concept analysis: conceptual time systems and life tracks.

Each tracked entity gets a time system (its timestamped observations in
order); life tracks then replay those observations as transitions between
object concepts of a lattice built over the same context.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from datetime import datetime

from .context import FormalContext
from .corpus.model import Corpus, format_timestamp
from .errors import ConfigurationError, EvaluationError, UnknownNameError
from .fca import ConceptLattice, lattice_to_dict, object_concept_map
from .ontology import (
    GRANULARITIES,
    ObjectClusterRule,
    RuleError,
    resolve_key,
    truncate_timestamp,
)

TRACKS_FORMAT_VERSION = 1


class GranuleTieWarning(UserWarning):
    """Two granules of one entity collide at the chosen granularity."""


@dataclass(frozen=True)
class TimeGranule:
    object_id: str
    timestamp: datetime


@dataclass(frozen=True)
class ConceptualTimeSystem:
    """Ordered time granules of one entity; the time relation R is the
    strict successor relation of the sorted granule list."""

    entity_id: str
    granules: tuple[TimeGranule, ...]
    granularity: str

    @property
    def relation(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, i + 1) for i in range(len(self.granules) - 1))


@dataclass(frozen=True)
class Transition:
    from_concept: int
    to_concept: int
    from_granule: TimeGranule
    to_granule: TimeGranule


@dataclass(frozen=True)
class LifeTrack:
    entity_id: str
    concepts: tuple[int, ...]  # object concept per granule
    transitions: tuple[Transition, ...]


def build_time_system(corpus: Corpus, entity_key: ObjectClusterRule,
                      granularity: str) -> list[ConceptualTimeSystem]:
    """One time system per entity, granules ascending.

    Granules tying after truncation to the granularity are kept (ordered by
    document id) and reported with a GranuleTieWarning.
    """
    if granularity not in GRANULARITIES:
        raise RuleError(f"unknown granularity: {granularity!r}")
    groups: dict[str, list] = {}
    order: list[str] = []
    for doc in corpus:
        if doc.timestamp is None:
            raise EvaluationError(
                f"document {doc.id!r} is undated; temporal analysis needs "
                "timestamps")
        key = resolve_key(entity_key, doc)
        if key is None:
            if entity_key.missing == "error":
                raise RuleError(
                    f"rule {entity_key.name!r}: document {doc.id!r} has no "
                    f"key {entity_key.key!r}")
            if entity_key.missing == "skip":
                continue
            key = f"doc:{doc.id}"
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(doc)

    systems = []
    for key in order:
        docs = sorted(groups[key],
                      key=lambda d: (truncate_timestamp(d.timestamp,
                                                        granularity), d.id))
        truncated = [truncate_timestamp(d.timestamp, granularity)
                     for d in docs]
        for left, right, a, b in zip(truncated, truncated[1:],
                                     docs, docs[1:]):
            if left == right:
                warnings.warn(
                    f"entity {key!r}: granules {a.id!r} and {b.id!r} tie at "
                    f"granularity {granularity!r}; ordered by document id",
                    GranuleTieWarning, stacklevel=2)
        systems.append(ConceptualTimeSystem(
            entity_id=key,
            granules=tuple(TimeGranule(d.id, d.timestamp) for d in docs),
            granularity=granularity))
    return systems


def compute_life_tracks(systems: list[ConceptualTimeSystem],
                        lattice: ConceptLattice,
                        ctx: FormalContext) -> list[LifeTrack]:
    """Map each granule to its object concept and chain the transitions."""
    concept_of = object_concept_map(lattice)
    tracks = []
    for system in systems:
        concepts = []
        for granule in system.granules:
            if granule.object_id not in concept_of:
                raise UnknownNameError(
                    f"granule object {granule.object_id!r} of entity "
                    f"{system.entity_id!r} is not an object of the context")
            concepts.append(concept_of[granule.object_id])
        transitions = tuple(
            Transition(from_concept=concepts[i], to_concept=concepts[i + 1],
                       from_granule=system.granules[i],
                       to_granule=system.granules[i + 1])
            for i in range(len(concepts) - 1))
        tracks.append(LifeTrack(entity_id=system.entity_id,
                                concepts=tuple(concepts),
                                transitions=transitions))
    return tracks


def tracks_to_dict(lattice: ConceptLattice,
                   tracks: list[LifeTrack]) -> dict:
    payload = lattice_to_dict(lattice)
    n_concepts = len(lattice.concepts)
    track_list = []
    for track in tracks:
        if any(c >= n_concepts or c < 0 for c in track.concepts):
            raise ValueError(
                f"internal error: track {track.entity_id!r} references an "
                "unknown concept index")
        track_list.append({
            "entity": track.entity_id,
            "concepts": list(track.concepts),
            "steps": [{
                "from_concept": t.from_concept,
                "to_concept": t.to_concept,
                "from_time": format_timestamp(t.from_granule.timestamp),
                "to_time": format_timestamp(t.to_granule.timestamp),
                "from_object": t.from_granule.object_id,
                "to_object": t.to_granule.object_id,
            } for t in track.transitions],
        })
    payload["kind"] = "tracks"
    payload["trackList"] = track_list
    payload["tracks_version"] = TRACKS_FORMAT_VERSION
    return payload


def export_tracks(lattice: ConceptLattice, tracks: list[LifeTrack],
                  format: str = "json") -> bytes:
    """Lattice JSON augmented with per-entity transition sequences."""
    if format != "json":
        raise ConfigurationError(f"unknown track export format: {format!r}")
    return (json.dumps(tracks_to_dict(lattice, tracks), ensure_ascii=False,
                       sort_keys=True, separators=(",", ":")) + "\n"
            ).encode("utf-8")
