"""Discrete hidden Markov models over event sequences.

Covers the full workflow for process data: turning per-entity document
streams into symbol sequences, likelihood (log-space forward), decoding
(Viterbi), EM training (Baum-Welch), one-symbol-per-state process discovery,
and probability-labelled graph export.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from datetime import datetime
from typing import Mapping, Optional, Sequence

import numpy as np

from .corpus.index import InvertedIndex
from .corpus.model import Corpus
from .errors import ConfigurationError, EvaluationError, RuleError
from .ontology import Attribute, ObjectClusterRule, evaluate_attribute, resolve_key

MODEL_FORMAT_VERSION = 1

_STOCHASTIC_TOL = 1e-9

LOG_ZERO = float("-inf")


class UnmappedEventWarning(UserWarning):
    """A document had no symbol under the map and was skipped."""


def _check_stochastic(matrix: np.ndarray, what: str) -> None:
    if (matrix < 0).any():
        raise ConfigurationError(f"{what} has negative entries")
    sums = matrix.sum(axis=-1)
    if not np.allclose(sums, 1.0, atol=_STOCHASTIC_TOL, rtol=0):
        raise ConfigurationError(
            f"{what} rows must sum to 1 within {_STOCHASTIC_TOL}: {sums}")


@dataclass(frozen=True, eq=False)
class HmmModel:
    """Quintuplet of a discrete HMM: transition and emission matrices, the
    initial state distribution, and the two sizes they imply."""

    transition: np.ndarray  # (N, N)
    emission: np.ndarray    # (N, M)
    initial: np.ndarray     # (N,)
    symbol_names: tuple[str, ...] = ()
    seed: Optional[int] = None
    uniform_states: tuple[int, ...] = ()  # states with a convention A row

    def __post_init__(self):
        transition = np.asarray(self.transition, dtype=float)
        emission = np.asarray(self.emission, dtype=float)
        initial = np.asarray(self.initial, dtype=float)
        n = len(initial)
        if transition.shape != (n, n):
            raise ConfigurationError(
                f"transition matrix shape {transition.shape} != ({n}, {n})")
        if emission.ndim != 2 or emission.shape[0] != n:
            raise ConfigurationError(
                f"emission matrix shape {emission.shape} incompatible with "
                f"{n} states")
        _check_stochastic(transition, "transition matrix")
        _check_stochastic(emission, "emission matrix")
        _check_stochastic(initial, "initial distribution")
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "emission", emission)
        object.__setattr__(self, "initial", initial)
        names = self.symbol_names or tuple(
            str(k) for k in range(emission.shape[1]))
        if len(names) != emission.shape[1]:
            raise ConfigurationError("symbol_names length != symbol count")
        object.__setattr__(self, "symbol_names", tuple(names))

    @property
    def n_states(self) -> int:
        return len(self.initial)

    @property
    def n_symbols(self) -> int:
        return self.emission.shape[1]


@dataclass(frozen=True)
class EventSequence:
    entity_id: str
    symbols: tuple[int, ...]
    timestamps: tuple[datetime, ...] = ()

    def __post_init__(self):
        if self.timestamps and len(self.timestamps) != len(self.symbols):
            raise ConfigurationError(
                "timestamps must parallel symbols when given")
        if any(b < a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ConfigurationError(
                f"timestamps of {self.entity_id!r} are not non-decreasing")


@dataclass(frozen=True)
class SymbolMap:
    """Maps documents to observation symbols.

    Either reads an activity code from a structured field (optionally merged
    through `groups`, e.g. hundreds of raw codes onto a dozen semantic
    groups), or names the first matching attribute of `attributes`.
    """

    symbols: tuple[str, ...]
    source_field: Optional[str] = None
    groups: Optional[Mapping[str, str]] = None
    attributes: Optional[tuple[Attribute, ...]] = None
    unmapped: str = "error"  # error | skip

    def __post_init__(self):
        if (self.source_field is None) == (self.attributes is None):
            raise ConfigurationError(
                "symbol map needs exactly one of source_field or attributes")
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigurationError("duplicate symbol names")
        if self.unmapped not in ("error", "skip"):
            raise ConfigurationError(
                f"bad unmapped policy: {self.unmapped!r}")

    def symbol_of(self, doc, index: Optional[InvertedIndex]) -> Optional[int]:
        if self.source_field is not None:
            raw = doc.structured_fields.get(self.source_field)
            if raw is None:
                return None
            name = self.groups.get(raw, raw) if self.groups else raw
            return self.symbols.index(name) if name in self.symbols else None
        if index is None:
            raise ConfigurationError(
                "attribute-based symbol map needs an index")
        for attr in self.attributes:
            if evaluate_attribute(attr, doc, index):
                name = (self.groups.get(attr.name, attr.name)
                        if self.groups else attr.name)
                if name in self.symbols:
                    return self.symbols.index(name)
        return None


def sequences_from_corpus(corpus: Corpus, entity_key: ObjectClusterRule,
                          symbol_map: SymbolMap,
                          index: Optional[InvertedIndex] = None
                          ) -> list[EventSequence]:
    """Per entity, documents sorted by timestamp and mapped to symbols."""
    groups: dict[str, list] = {}
    order: list[str] = []
    for doc in corpus:
        if doc.timestamp is None:
            raise EvaluationError(
                f"document {doc.id!r} is undated; event sequences need "
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

    sequences = []
    for key in order:
        docs = sorted(groups[key], key=lambda d: (d.timestamp, d.id))
        symbols: list[int] = []
        timestamps: list[datetime] = []
        for doc in docs:
            symbol = symbol_map.symbol_of(doc, index)
            if symbol is None:
                if symbol_map.unmapped == "error":
                    raise RuleError(
                        f"document {doc.id!r} has no symbol under the map")
                warnings.warn(
                    f"skipping unmapped document {doc.id!r}",
                    UnmappedEventWarning, stacklevel=2)
                continue
            symbols.append(symbol)
            timestamps.append(doc.timestamp)
        sequences.append(EventSequence(entity_id=key,
                                       symbols=tuple(symbols),
                                       timestamps=tuple(timestamps)))
    return sequences


# ---------------------------------------------------------------------------
# Likelihood and decoding (log space)
# ---------------------------------------------------------------------------

def _symbols_of(seq) -> tuple[int, ...]:
    if isinstance(seq, EventSequence):
        return seq.symbols
    return tuple(int(s) for s in seq)


def _check_symbols(model: HmmModel, symbols: tuple[int, ...]) -> None:
    if any(s < 0 or s >= model.n_symbols for s in symbols):
        raise ConfigurationError(
            f"symbol out of range [0, {model.n_symbols}): {symbols}")


def _logsumexp(values: np.ndarray, axis=None) -> np.ndarray:
    peak = np.max(values, axis=axis, keepdims=True)
    safe_peak = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(divide="ignore"):
        summed = np.log(np.sum(np.exp(values - safe_peak), axis=axis,
                               keepdims=True)) + safe_peak
    summed = np.where(np.isfinite(peak), summed, peak)
    return summed if axis is None else np.squeeze(summed, axis=axis)


def _log(matrix: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(matrix)


def _log_forward(model: HmmModel, symbols: tuple[int, ...]) -> np.ndarray:
    log_a = _log(model.transition)
    log_b = _log(model.emission)
    alpha = np.empty((len(symbols), model.n_states))
    alpha[0] = _log(model.initial) + log_b[:, symbols[0]]
    for t in range(1, len(symbols)):
        alpha[t] = _logsumexp(alpha[t - 1][:, None] + log_a, axis=0) \
            + log_b[:, symbols[t]]
    return alpha


def forward_likelihood(model: HmmModel, seq) -> float:
    """log P(sequence | model); the empty sequence has probability 1."""
    symbols = _symbols_of(seq)
    if not symbols:
        return 0.0
    _check_symbols(model, symbols)
    alpha = _log_forward(model, symbols)
    return float(_logsumexp(alpha[-1]))


def viterbi(model: HmmModel, seq) -> tuple[list[int], float]:
    """A maximum-probability state path; ties go to the lowest state index."""
    symbols = _symbols_of(seq)
    if not symbols:
        return [], 0.0
    _check_symbols(model, symbols)
    log_a = _log(model.transition)
    log_b = _log(model.emission)
    n = model.n_states
    delta = _log(model.initial) + log_b[:, symbols[0]]
    back: list[np.ndarray] = []
    for t in range(1, len(symbols)):
        scores = delta[:, None] + log_a  # [from, to]
        best_from = np.argmax(scores, axis=0)  # first max = lowest index
        delta = scores[best_from, np.arange(n)] + log_b[:, symbols[t]]
        back.append(best_from)
    last = int(np.argmax(delta))
    path = [last]
    for pointers in reversed(back):
        path.append(int(pointers[path[-1]]))
    path.reverse()
    return path, float(delta[last])


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def _initial_model(n_states: int, n_symbols: int, init: str,
                   seed: Optional[int]) -> HmmModel:
    rng = np.random.default_rng(seed)
    if init == "seeded-random":
        transition = rng.random((n_states, n_states)) + 0.1
        emission = rng.random((n_states, n_symbols)) + 0.1
        initial = rng.random(n_states) + 0.1
    elif init == "uniform-perturbed":
        transition = np.ones((n_states, n_states)) \
            + 0.01 * rng.random((n_states, n_states))
        emission = np.ones((n_states, n_symbols)) \
            + 0.01 * rng.random((n_states, n_symbols))
        initial = np.ones(n_states) + 0.01 * rng.random(n_states)
    else:
        raise ConfigurationError(f"unknown init scheme: {init!r}")
    transition /= transition.sum(axis=1, keepdims=True)
    emission /= emission.sum(axis=1, keepdims=True)
    initial /= initial.sum()
    return HmmModel(transition=transition, emission=emission,
                    initial=initial, seed=seed)


def baum_welch(sequences: Sequence, n_states: int, n_symbols: int,
               init: str = "seeded-random", seed: Optional[int] = 0,
               tol: float = 1e-6, max_iter: int = 200,
               initial_model: Optional[HmmModel] = None
               ) -> tuple[HmmModel, list[float]]:
    """EM over all sequences; returns the model and its log-likelihood trace.

    Stops when total log-likelihood improves by less than `tol` or after
    `max_iter` iterations. The trace is non-decreasing up to 1e-9 slack.
    `initial_model` overrides the seeded init (warm restart).
    """
    if n_states < 1 or n_symbols < 1:
        raise ConfigurationError("n_states and n_symbols must be >= 1")
    symbol_lists = [_symbols_of(seq) for seq in sequences]
    symbol_lists = [s for s in symbol_lists if s]
    if not symbol_lists:
        raise ConfigurationError("Baum-Welch needs a non-empty sequence")
    for symbols in symbol_lists:
        if any(s < 0 or s >= n_symbols for s in symbols):
            raise ConfigurationError(
                f"symbol out of range [0, {n_symbols}): {symbols}")

    # batch sequences of equal length so each E-step is a handful of numpy
    # passes instead of a Python loop per sequence
    by_length: dict[int, list[tuple[int, ...]]] = {}
    for symbols in symbol_lists:
        by_length.setdefault(len(symbols), []).append(symbols)
    batches = [np.asarray(group, dtype=int)
               for _, group in sorted(by_length.items())]

    model = initial_model or _initial_model(n_states, n_symbols, init, seed)
    if model.n_states != n_states or model.n_symbols != n_symbols:
        raise ConfigurationError("initial model sizes do not match request")
    trace: list[float] = []
    for _ in range(max_iter):
        log_a = _log(model.transition)
        log_b = _log(model.emission)
        log_t = _log(model.initial)

        initial_acc = np.zeros(n_states)
        trans_acc = np.zeros((n_states, n_states))
        trans_den = np.zeros(n_states)
        emis_acc = np.zeros((n_states, n_symbols))
        total_ll = 0.0
        contributing = 0

        for batch in batches:  # (S, L) symbol matrix per length group
            length = batch.shape[1]
            alpha = np.empty((length, batch.shape[0], n_states))
            alpha[0] = log_t[None, :] + log_b[:, batch[:, 0]].T
            for t in range(1, length):
                alpha[t] = _logsumexp(
                    alpha[t - 1][:, :, None] + log_a[None, :, :], axis=1) \
                    + log_b[:, batch[:, t]].T
            beta = np.zeros_like(alpha)
            for t in range(length - 2, -1, -1):
                beta[t] = _logsumexp(
                    log_a[None, :, :]
                    + (log_b[:, batch[:, t + 1]].T
                       + beta[t + 1])[:, None, :], axis=2)
            seq_ll = _logsumexp(alpha[-1], axis=1)  # (S,)
            total_ll += float(seq_ll.sum())
            finite = np.isfinite(seq_ll)
            if not finite.any():
                continue
            contributing += int(finite.sum())
            batch = batch[finite]
            alpha = alpha[:, finite]
            beta = beta[:, finite]
            seq_ll = seq_ll[finite]

            gamma = np.exp(alpha + beta - seq_ll[None, :, None])
            initial_acc += gamma[0].sum(axis=0)
            for t in range(length):
                np.add.at(emis_acc.T, batch[:, t], gamma[t])
            for t in range(length - 1):
                xi = np.exp(alpha[t][:, :, None] + log_a[None, :, :]
                            + (log_b[:, batch[:, t + 1]].T
                               + beta[t + 1])[:, None, :]
                            - seq_ll[:, None, None])
                trans_acc += xi.sum(axis=0)
                trans_den += gamma[t].sum(axis=0)

        trace.append(total_ll)
        if contributing == 0:
            break  # nothing to re-estimate from
        if len(trace) >= 2 and trace[-1] - trace[-2] < tol:
            break

        emis_den = emis_acc.sum(axis=1)
        transition = np.where(trans_den[:, None] > 0,
                              trans_acc / np.maximum(trans_den[:, None],
                                                     1e-300),
                              model.transition)
        emission = np.where(emis_den[:, None] > 0,
                            emis_acc / np.maximum(emis_den[:, None], 1e-300),
                            model.emission)
        initial = initial_acc / contributing
        # guard tiny drift so rows stay exactly stochastic
        transition /= transition.sum(axis=1, keepdims=True)
        emission /= emission.sum(axis=1, keepdims=True)
        initial /= initial.sum()
        model = HmmModel(transition=transition, emission=emission,
                        initial=initial, symbol_names=model.symbol_names,
                        seed=seed)
    return model, trace


def fit_process_model(sequences: Sequence, n_symbols: int,
                      smoothing: float = 0.0,
                      symbol_names: Optional[Sequence[str]] = None
                      ) -> HmmModel:
    """Process discovery: one observation symbol per state.

    N = M, emissions are the identity, transitions and the initial
    distribution come from closed-form counting. Symbols never seen in a
    non-final position get a uniform transition row and are flagged in
    `uniform_states`.
    """
    symbol_lists = [_symbols_of(seq) for seq in sequences]
    symbol_lists = [s for s in symbol_lists if s]
    if not symbol_lists:
        raise ConfigurationError("process discovery needs a non-empty "
                                 "sequence")
    for symbols in symbol_lists:
        if any(s < 0 or s >= n_symbols for s in symbols):
            raise ConfigurationError(
                f"symbol out of range [0, {n_symbols}): {symbols}")

    counts = np.zeros((n_symbols, n_symbols))
    starts = np.zeros(n_symbols)
    for symbols in symbol_lists:
        starts[symbols[0]] += 1
        for a, b in zip(symbols, symbols[1:]):
            counts[a, b] += 1

    counts += smoothing
    starts += smoothing
    uniform_states = []
    transition = np.empty_like(counts)
    for i in range(n_symbols):
        row_sum = counts[i].sum()
        if row_sum > 0:
            transition[i] = counts[i] / row_sum
        else:
            transition[i] = np.full(n_symbols, 1.0 / n_symbols)
            uniform_states.append(i)
    initial = starts / starts.sum()
    names = tuple(symbol_names) if symbol_names else tuple(
        str(k) for k in range(n_symbols))
    return HmmModel(transition=transition, emission=np.eye(n_symbols),
                    initial=initial, symbol_names=names,
                    uniform_states=tuple(uniform_states))


def sample_sequences(model: HmmModel, count: int, length: int,
                     seed: Optional[int] = 0) -> list[EventSequence]:
    """Generate observation sequences from the model (seeded)."""
    rng = np.random.default_rng(seed)
    sequences = []
    for k in range(count):
        state = rng.choice(model.n_states, p=model.initial)
        symbols = []
        for _ in range(length):
            symbols.append(int(rng.choice(model.n_symbols,
                                          p=model.emission[state])))
            state = rng.choice(model.n_states, p=model.transition[state])
        sequences.append(EventSequence(entity_id=f"sample-{k}",
                                       symbols=tuple(symbols)))
    return sequences


# ---------------------------------------------------------------------------
# State alignment (EM identifies states only up to relabeling)
# ---------------------------------------------------------------------------

def best_state_alignment(fitted: HmmModel,
                         reference: HmmModel) -> tuple[int, ...]:
    """Permutation p minimizing the parameter distance of p(fitted) to the
    reference; exhaustive search, meant for small N."""
    n = fitted.n_states
    if n != reference.n_states or n > 8:
        raise ConfigurationError("alignment needs equal, small state counts")
    best_perm, best_cost = None, float("inf")
    for perm in itertools.permutations(range(n)):
        p = list(perm)
        cost = (np.abs(fitted.transition[np.ix_(p, p)]
                       - reference.transition).sum()
                + np.abs(fitted.emission[p] - reference.emission).sum()
                + np.abs(fitted.initial[p] - reference.initial).sum())
        if cost < best_cost:
            best_perm, best_cost = perm, cost
    return best_perm


def permute_states(model: HmmModel, perm: Sequence[int]) -> HmmModel:
    """Relabel states so that new state i is old state perm[i]."""
    p = list(perm)
    return HmmModel(transition=model.transition[np.ix_(p, p)],
                    emission=model.emission[p],
                    initial=model.initial[p],
                    symbol_names=model.symbol_names, seed=model.seed)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def graph_to_dict(model: HmmModel, threshold: float) -> dict:
    if not (0.0 <= threshold <= 1.0):
        raise ConfigurationError(
            f"threshold must lie in [0, 1], got {threshold}")
    nodes = []
    for i in range(model.n_states):
        ranked = sorted(enumerate(model.emission[i]),
                        key=lambda kv: (-kv[1], kv[0]))
        top = [{"symbol": model.symbol_names[k], "p": round(float(p), 12)}
               for k, p in ranked[:3] if p > 0]
        nodes.append({"state": i, "emissions": top,
                      "uniform_row": i in model.uniform_states})
    edges = [{"from": i, "to": j,
              "p": round(float(model.transition[i, j]), 12)}
             for i in range(model.n_states)
             for j in range(model.n_states)
             if model.transition[i, j] >= threshold]
    return {"version": MODEL_FORMAT_VERSION, "kind": "hmm",
            "nodes": nodes, "edges": edges, "threshold": threshold}


def export_hmm_graph(model: HmmModel, threshold: float = 0.0,
                     format: str = "json") -> bytes:
    """Probability-labelled state graph: nodes carry top emissions, edges
    carry transition probabilities at or above the threshold."""
    payload = graph_to_dict(model, threshold)
    if format == "json":
        return (json.dumps(payload, ensure_ascii=False, sort_keys=True,
                           separators=(",", ":")) + "\n").encode("utf-8")
    if format == "dot":
        lines = ["digraph hmm {", "  rankdir=LR;"]
        for node in payload["nodes"]:
            label = "\\n".join(
                f"{em['symbol']}: {em['p']:.3f}" for em in node["emissions"])
            lines.append(f'  s{node["state"]} [label="{label}"];')
        for edge in payload["edges"]:
            lines.append(
                f'  s{edge["from"]} -> s{edge["to"]} '
                f'[label="{edge["p"]:.3f}"];')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ConfigurationError(f"unknown graph export format: {format!r}")


def model_to_json(model: HmmModel, trace: Optional[list[float]] = None
                  ) -> bytes:
    payload = {
        "version": MODEL_FORMAT_VERSION,
        "kind": "hmm-model",
        "n_states": model.n_states,
        "n_symbols": model.n_symbols,
        "transition": [[float(x) for x in row] for row in model.transition],
        "emission": [[float(x) for x in row] for row in model.emission],
        "initial": [float(x) for x in model.initial],
        "symbol_names": list(model.symbol_names),
        "seed": model.seed,
        "uniform_states": list(model.uniform_states),
        "trace": trace,
    }
    return (json.dumps(payload, ensure_ascii=False, sort_keys=True,
                       separators=(",", ":")) + "\n").encode("utf-8")


def model_from_json(data: bytes) -> HmmModel:
    payload = json.loads(data)
    if payload.get("version") != MODEL_FORMAT_VERSION or \
            payload.get("kind") != "hmm-model":
        raise ConfigurationError("not a recognized model checkpoint")
    return HmmModel(transition=np.asarray(payload["transition"]),
                    emission=np.asarray(payload["emission"]),
                    initial=np.asarray(payload["initial"]),
                    symbol_names=tuple(payload["symbol_names"]),
                    seed=payload.get("seed"),
                    uniform_states=tuple(payload.get("uniform_states", ())))
