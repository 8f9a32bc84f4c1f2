"""Emergent self-organizing maps: training, U-matrix terrain, projection.

Grids at emergent scale have thousands of units (the default analyst preset
is 50x82 = 4100); small grids are fine for tests. Training is the online
rule: every sample pulls its best-matching unit and a gaussian neighborhood
toward it, with learning rate and radius decaying linearly over all steps.
The whole path is seeded and single-threaded, so results are bit-exact
reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .context import FormalContext
from .corpus.index import phrase_occurrences
from .errors import ConfigurationError
from .ontology import TextMiningAttribute, evaluate_attribute

MAP_FORMAT_VERSION = 1

#: paper-scale preset: enough units for emergent structure
EMERGENT_ROWS, EMERGENT_COLS = 50, 82
#: desk-scale preset for quick runs
DEFAULT_ROWS, DEFAULT_COLS = 20, 30


@dataclass(frozen=True)
class FeatureVector:
    object_id: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class TrainingSchedule:
    epochs: int
    rate_start: float = 0.5
    rate_end: float = 0.05
    radius_start: float | None = None  # default: max(rows, cols) / 2
    radius_end: float = 1.0

    def validate(self, rows: int, cols: int) -> "TrainingSchedule":
        if self.epochs < 0:
            raise ConfigurationError("epochs must be >= 0")
        if not (self.rate_start >= self.rate_end > 0):
            raise ConfigurationError(
                "learning rate must satisfy start >= end > 0")
        radius_start = self.radius_start
        if radius_start is None:
            radius_start = max(rows, cols) / 2
        if radius_start > max(rows, cols):
            raise ConfigurationError("radius start exceeds grid size")
        if not (radius_start >= self.radius_end > 0):
            raise ConfigurationError("radius must satisfy start >= end > 0")
        return replace(self, radius_start=radius_start)


@dataclass(frozen=True, eq=False)
class EsomGrid:
    rows: int
    cols: int
    topology: str  # "toroid" | "planar"
    weights: np.ndarray  # (rows, cols, dim)
    trained: bool
    rng_seed: int

    @property
    def dim(self) -> int:
        return self.weights.shape[2]

    @property
    def units(self) -> int:
        return self.rows * self.cols


def init_grid(rows: int, cols: int, topology: str, dim: int, seed: int,
              bounds: Sequence[tuple[float, float]] | None = None) -> EsomGrid:
    """Fresh grid with weights sampled uniformly per dimension.

    `bounds` gives per-dimension (low, high) data bounds; without them the
    unit interval is used.
    """
    if rows <= 0 or cols <= 0 or dim <= 0:
        raise ConfigurationError(
            f"grid dims must be positive, got {rows}x{cols} dim {dim}")
    if topology not in ("toroid", "planar"):
        raise ConfigurationError(f"unknown topology: {topology!r}")
    rng = np.random.default_rng(seed)
    weights = rng.random((rows, cols, dim))
    if bounds is not None:
        if len(bounds) != dim:
            raise ConfigurationError("bounds length must equal dim")
        lows = np.asarray([b[0] for b in bounds], dtype=float)
        highs = np.asarray([b[1] for b in bounds], dtype=float)
        weights = lows + weights * (highs - lows)
    return EsomGrid(rows=rows, cols=cols, topology=topology, weights=weights,
                    trained=False, rng_seed=seed)


def _as_matrix(grid: EsomGrid, vectors) -> np.ndarray:
    if len(vectors) and isinstance(vectors[0], FeatureVector):
        data = np.asarray([v.values for v in vectors], dtype=float)
    else:
        data = np.asarray(vectors, dtype=float)
    if data.ndim != 2 or data.shape[1] != grid.dim:
        raise ConfigurationError(
            f"vector dimension {data.shape[-1] if data.ndim else '?'} does "
            f"not match grid dimension {grid.dim}")
    if np.isnan(data).any():
        raise ConfigurationError("NaN in training vectors")
    return data


def _grid_distance_sq(grid: EsomGrid, row: int, col: int) -> np.ndarray:
    dr = np.abs(np.arange(grid.rows) - row)
    dc = np.abs(np.arange(grid.cols) - col)
    if grid.topology == "toroid":
        dr = np.minimum(dr, grid.rows - dr)
        dc = np.minimum(dc, grid.cols - dc)
    return (dr[:, None] ** 2 + dc[None, :] ** 2).astype(float)


def train(grid: EsomGrid, vectors, schedule: TrainingSchedule) -> EsomGrid:
    """Train a copy of the grid; the input grid is unchanged."""
    schedule = schedule.validate(grid.rows, grid.cols)
    data = _as_matrix(grid, vectors)
    if len(data) == 0:
        raise ConfigurationError("training needs at least one vector")
    weights = grid.weights.astype(float).copy()
    if schedule.epochs == 0:
        return replace(grid, weights=weights)

    rng = np.random.default_rng(grid.rng_seed)
    total = schedule.epochs * len(data)
    step = 0
    for _ in range(schedule.epochs):
        for i in rng.permutation(len(data)):
            t = step / (total - 1) if total > 1 else 0.0
            rate = schedule.rate_start + \
                (schedule.rate_end - schedule.rate_start) * t
            radius = schedule.radius_start + \
                (schedule.radius_end - schedule.radius_start) * t
            sample = data[i]
            d2 = ((weights - sample) ** 2).sum(axis=2)
            bmu_row, bmu_col = np.unravel_index(np.argmin(d2), d2.shape)
            influence = np.exp(-_grid_distance_sq(grid, bmu_row, bmu_col)
                               / (2.0 * radius * radius))
            weights += rate * influence[:, :, None] * (sample - weights)
            step += 1
    return replace(grid, weights=weights, trained=True)


def best_matching_unit(grid: EsomGrid, vector) -> tuple[int, int]:
    """Unit with minimal Euclidean distance; ties go to the smallest
    (row, col) in row-major order."""
    v = np.asarray(vector, dtype=float)
    if v.shape != (grid.dim,):
        raise ConfigurationError(
            f"vector dimension {v.shape} does not match grid dim {grid.dim}")
    d2 = ((grid.weights - v) ** 2).sum(axis=2)
    row, col = np.unravel_index(np.argmin(d2), d2.shape)
    return int(row), int(col)


def compute_umatrix(grid: EsomGrid) -> np.ndarray:
    """Mean Euclidean distance of every unit to its 4-neighborhood.

    Toroidal grids wrap (4 neighbors everywhere); planar edge units average
    over their existing neighbors only.
    """
    weights = grid.weights
    if grid.topology == "toroid":
        total = np.zeros((grid.rows, grid.cols))
        for shift, axis in ((1, 0), (-1, 0), (1, 1), (-1, 1)):
            neighbor = np.roll(weights, shift, axis=axis)
            total += np.linalg.norm(weights - neighbor, axis=2)
        return total / 4.0

    total = np.zeros((grid.rows, grid.cols))
    counts = np.zeros((grid.rows, grid.cols))
    down = np.linalg.norm(weights[1:, :] - weights[:-1, :], axis=2)
    total[1:, :] += down
    total[:-1, :] += down
    counts[1:, :] += 1
    counts[:-1, :] += 1
    right = np.linalg.norm(weights[:, 1:] - weights[:, :-1], axis=2)
    total[:, 1:] += right
    total[:, :-1] += right
    counts[:, 1:] += 1
    counts[:, :-1] += 1
    return total / np.maximum(counts, 1)


def quantization_error(grid: EsomGrid, vectors) -> float:
    """Mean distance of the vectors to their best-matching units."""
    data = _as_matrix(grid, vectors)
    flat = grid.weights.reshape(-1, grid.dim)
    dists = np.sqrt(((data[:, None, :] - flat[None, :, :]) ** 2).sum(axis=2))
    return float(dists.min(axis=1).mean())


def project(grid: EsomGrid, vectors, labels_with_urls=None) -> list[tuple]:
    """(object id, row, col, url) per vector, for map rendering."""
    if len(vectors) and isinstance(vectors[0], FeatureVector):
        ids = [v.object_id for v in vectors]
    else:
        ids = [str(i) for i in range(len(vectors))]
    data = _as_matrix(grid, vectors)
    labels_with_urls = labels_with_urls or {}
    placements = []
    for object_id, vector in zip(ids, data):
        row, col = best_matching_unit(grid, vector)
        placements.append((object_id, row, col,
                           labels_with_urls.get(object_id, "")))
    return placements


def vectors_from_context(ctx: FormalContext) -> list[FeatureVector]:
    """Context rows as 0/1 feature vectors (the default ESOM input)."""
    dim = len(ctx.attributes)
    return [FeatureVector(object_id=obj.id,
                          values=tuple(float(row >> m & 1)
                                       for m in range(dim)))
            for obj, row in zip(ctx.objects, ctx.rows)]


def tf_vectors(corpus, attrs, index) -> list[FeatureVector]:
    """Term-frequency variant: text-mining attribute entries count phrase
    occurrences instead of presence; other attribute kinds stay 0/1."""
    vectors = []
    for doc in corpus:
        values = []
        for attr in attrs:
            if isinstance(attr, TextMiningAttribute):
                sections = attr.sections & set(index.sections)
                values.append(float(sum(
                    phrase_occurrences(index, term.phrase, doc.id, sections)
                    for term in attr.cluster.terms)))
            else:
                values.append(float(evaluate_attribute(attr, doc, index)))
        vectors.append(FeatureVector(object_id=doc.id, values=tuple(values)))
    return vectors


def map_to_dict(grid: EsomGrid, vectors, labels_with_urls=None,
                schedule: TrainingSchedule | None = None) -> dict:
    umatrix = compute_umatrix(grid)
    return {
        "version": MAP_FORMAT_VERSION,
        "kind": "esom",
        "rows": grid.rows,
        "cols": grid.cols,
        "topology": grid.topology,
        "seed": grid.rng_seed,
        "trained": grid.trained,
        "umatrix": [[round(float(x), 12) for x in row] for row in umatrix],
        "projections": [
            {"id": object_id, "row": row, "col": col, "url": url}
            for object_id, row, col, url in project(grid, vectors,
                                                    labels_with_urls)
        ],
        "schedule": None if schedule is None else {
            "epochs": schedule.epochs,
            "rate_start": schedule.rate_start,
            "rate_end": schedule.rate_end,
            "radius_start": schedule.radius_start,
            "radius_end": schedule.radius_end,
        },
    }


def export_map(grid: EsomGrid, vectors, labels_with_urls=None,
               schedule: TrainingSchedule | None = None) -> bytes:
    return (json.dumps(map_to_dict(grid, vectors, labels_with_urls, schedule),
                       ensure_ascii=False, sort_keys=True,
                       separators=(",", ":")) + "\n").encode("utf-8")


def grid_to_checkpoint(grid: EsomGrid,
                       schedule: TrainingSchedule | None = None) -> bytes:
    """Versioned weight checkpoint including the seed and schedule."""
    payload = {
        "version": MAP_FORMAT_VERSION,
        "kind": "esom-checkpoint",
        "rows": grid.rows,
        "cols": grid.cols,
        "topology": grid.topology,
        "seed": grid.rng_seed,
        "trained": grid.trained,
        "weights": grid.weights.reshape(-1).tolist(),
        "dim": grid.dim,
        "schedule": None if schedule is None else {
            "epochs": schedule.epochs,
            "rate_start": schedule.rate_start,
            "rate_end": schedule.rate_end,
            "radius_start": schedule.radius_start,
            "radius_end": schedule.radius_end,
        },
    }
    return (json.dumps(payload, ensure_ascii=False, sort_keys=True,
                       separators=(",", ":")) + "\n").encode("utf-8")


def grid_from_checkpoint(data: bytes) -> EsomGrid:
    payload = json.loads(data)
    if payload.get("version") != MAP_FORMAT_VERSION or \
            payload.get("kind") != "esom-checkpoint":
        raise ConfigurationError("not a recognized grid checkpoint")
    weights = np.asarray(payload["weights"], dtype=float).reshape(
        payload["rows"], payload["cols"], payload["dim"])
    return EsomGrid(rows=payload["rows"], cols=payload["cols"],
                    topology=payload["topology"], weights=weights,
                    trained=payload["trained"], rng_seed=payload["seed"])
