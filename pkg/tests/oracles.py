"""Independent oracles used by the tests.

These deliberately avoid the package's bitset derivations and log-space
recursions: closures are computed with plain set logic over explicit
incidence pairs, and HMM probabilities by enumerating every state path.
"""

from __future__ import annotations

import itertools
import math


def brute_force_concepts(n_objects: int, n_attributes: int,
                         incidence: set[tuple[int, int]]
                         ) -> set[tuple[frozenset, frozenset]]:
    """All (extent, intent) closure pairs via exhaustive subset enumeration."""
    concepts = set()
    for r in range(n_objects + 1):
        for subset in itertools.combinations(range(n_objects), r):
            intent = frozenset(
                m for m in range(n_attributes)
                if all((g, m) in incidence for g in subset))
            extent = frozenset(
                g for g in range(n_objects)
                if all((g, m) in incidence for m in intent))
            concepts.add((extent, intent))
    return concepts


def brute_force_order(extents: list[frozenset]) -> set[tuple[int, int]]:
    """Covering relation by filtering the full strict order."""
    strict = {(i, j) for i in range(len(extents)) for j in range(len(extents))
              if extents[i] < extents[j]}
    return {(i, j) for (i, j) in strict
            if not any((i, k) in strict and (k, j) in strict
                       for k in range(len(extents)))}


def path_probability(initial, transition, emission, path, symbols) -> float:
    p = initial[path[0]] * emission[path[0]][symbols[0]]
    for t in range(1, len(symbols)):
        p *= transition[path[t - 1]][path[t]] * emission[path[t]][symbols[t]]
    return p


def brute_force_log_likelihood(initial, transition, emission,
                               symbols) -> float:
    """log P(symbols) as an explicit sum over all state paths."""
    if not symbols:
        return 0.0
    n = len(initial)
    total = 0.0
    for path in itertools.product(range(n), repeat=len(symbols)):
        total += path_probability(initial, transition, emission, path,
                                  symbols)
    return math.log(total) if total > 0 else float("-inf")


def brute_force_best_path(initial, transition, emission,
                          symbols) -> tuple[float, tuple[int, ...]]:
    """Max-probability path by enumeration; ties keep the lexicographically
    smallest path (matching the decoder's lowest-state tie rule)."""
    n = len(initial)
    best_p, best_path = float("-inf"), ()
    for path in itertools.product(range(n), repeat=len(symbols)):
        p = path_probability(initial, transition, emission, path, symbols)
        lp = math.log(p) if p > 0 else float("-inf")
        if lp > best_p:
            best_p, best_path = lp, path
    return best_p, best_path
