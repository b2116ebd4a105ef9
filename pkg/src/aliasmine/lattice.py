"""Fuzzy pattern lattice over a normalized confusion matrix.

Each avatar maps to its matrix row, read as a fuzzy membership vector over
all avatars.  The meet of two patterns is the componentwise minimum, and the
induced order is componentwise dominance.  Two derivation operators connect
avatar sets and patterns:

* ``extent_to_intent``: columnwise minimum over the rows of an avatar set;
* ``intent_to_extent``: all avatars whose row dominates a pattern.

A pair closed under both directions is a *pattern concept*; the complete
family of concepts is what the alias miner scores and expands into candidate
pairs.  ``enumerate_concepts`` computes the family with an incremental
lattice construction (compiled core when available, pure-Python fallback
otherwise); ``brute_force_concepts`` is the independent reference that closes
every subset explicitly.

Comparisons use exact stored-value float equality: every degree comes from a
single normalization pass, so closures are self-consistent, and epsilon
comparisons would break the lattice algebra (transitivity).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .classify import NormalizedConfusionMatrix

_FORCED = os.environ.get("ALIASMINE_LATTICE", "").strip().lower()
if _FORCED not in ("", "compiled", "python"):
    raise ImportError(
        f"ALIASMINE_LATTICE must be 'compiled' or 'python', got {_FORCED!r}"
    )
if _FORCED == "python":
    from . import _lattice_py as _core

    _BACKEND = "python"
else:
    try:
        from . import _lattice_cy as _core  # type: ignore[attr-defined]

        _BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        from . import _lattice_py as _core

        _BACKEND = "python"


def lattice_backend() -> str:
    """Which enumeration core is active: ``"compiled"`` or ``"python"``."""
    return _BACKEND


@dataclass(frozen=True)
class FuzzyPattern:
    """A membership degree per avatar, indexed by ``label_space``."""

    degrees: tuple[float, ...]
    label_space: tuple[str, ...]

    def __post_init__(self):
        degrees = tuple(float(d) for d in self.degrees)
        label_space = tuple(self.label_space)
        if len(degrees) != len(label_space):
            raise ValueError(
                f"{len(degrees)} degrees for {len(label_space)} labels"
            )
        if any(not 0.0 <= d <= 1.0 for d in degrees):
            raise ValueError("degrees must lie in [0, 1]")
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "label_space", label_space)

    def __len__(self) -> int:
        return len(self.degrees)


@dataclass(frozen=True)
class PatternConcept:
    """A closed (avatar set, pattern) pair."""

    extent: frozenset[str]
    intent: FuzzyPattern

    def __post_init__(self):
        object.__setattr__(self, "extent", frozenset(self.extent))


def _check_aligned(p: FuzzyPattern, q: FuzzyPattern) -> None:
    if p.label_space != q.label_space:
        raise ValueError("patterns are indexed by different label spaces")


def meet(p: FuzzyPattern, q: FuzzyPattern) -> FuzzyPattern:
    """Componentwise minimum (fuzzy intersection)."""
    _check_aligned(p, q)
    return FuzzyPattern(
        tuple(a if a <= b else b for a, b in zip(p.degrees, q.degrees)),
        p.label_space,
    )


def leq(p: FuzzyPattern, q: FuzzyPattern) -> bool:
    """Dominance order: true iff p is componentwise <= q."""
    _check_aligned(p, q)
    return all(a <= b for a, b in zip(p.degrees, q.degrees))


def pattern_score(p: FuzzyPattern) -> float:
    """Sum of membership degrees; lies in [0, n]."""
    return float(sum(p.degrees))


def row_pattern(m: NormalizedConfusionMatrix, label: str) -> FuzzyPattern:
    """The fuzzy pattern of one avatar: its matrix row."""
    return FuzzyPattern(tuple(m.rows[m.index(label)].tolist()), m.labels)


def extent_to_intent(
    avatars: Iterable[str], m: NormalizedConfusionMatrix
) -> FuzzyPattern:
    """Columnwise minimum over the rows of a non-empty avatar set."""
    idxs = sorted(m.index(a) for a in set(avatars))
    if not idxs:
        raise ValueError("avatar set must be non-empty")
    return FuzzyPattern(tuple(m.rows[idxs].min(axis=0).tolist()), m.labels)


def intent_to_extent(
    d: FuzzyPattern, m: NormalizedConfusionMatrix
) -> frozenset[str]:
    """All avatars whose row dominates ``d`` componentwise."""
    if d.label_space != m.labels:
        raise ValueError("pattern is not indexed by this matrix's labels")
    mask = np.all(m.rows >= np.array(d.degrees), axis=1)
    return frozenset(lab for lab, hit in zip(m.labels, mask) if hit)


def _canonical(concepts: Iterable[PatternConcept]) -> list[PatternConcept]:
    return sorted(concepts, key=lambda c: (len(c.extent), tuple(sorted(c.extent))))


def enumerate_concepts(
    m: NormalizedConfusionMatrix, min_score: float = 0.0
) -> list[PatternConcept]:
    """All pattern concepts whose intent score reaches ``min_score``.

    With ``min_score=0`` this is the complete concept family, including the
    pair (empty set, all-ones pattern) whenever no row is all ones.  Output
    is in canonical order: extent size, then lexicographic extent.
    """
    if min_score < 0:
        raise ValueError(f"min_score must be >= 0, got {min_score}")
    raw = _core.enumerate_closed([tuple(r) for r in m.rows.tolist()])
    concepts = []
    for extent_idx, intent in raw:
        if sum(intent) < min_score:
            continue
        concepts.append(
            PatternConcept(
                extent=frozenset(m.labels[i] for i in extent_idx),
                intent=FuzzyPattern(intent, m.labels),
            )
        )
    return _canonical(concepts)


BRUTE_FORCE_MAX = 20


def brute_force_concepts(m: NormalizedConfusionMatrix) -> list[PatternConcept]:
    """Reference enumeration: close every non-empty subset, deduplicate.

    Exponential in the number of avatars, hence guarded at
    ``BRUTE_FORCE_MAX``; this is the test oracle for ``enumerate_concepts``
    and is kept independent of the incremental cores.
    """
    n = m.n
    if n > BRUTE_FORCE_MAX:
        raise ValueError(
            f"brute force enumeration is limited to {BRUTE_FORCE_MAX} avatars, "
            f"got {n}"
        )
    rows = m.rows
    found: dict[frozenset[int], tuple[float, ...]] = {}
    for r in range(1, n + 1):
        for subset in combinations(range(n), r):
            intent = rows[list(subset)].min(axis=0)
            extent = frozenset(np.flatnonzero(np.all(rows >= intent, axis=1)).tolist())
            if extent not in found:
                found[extent] = tuple(intent.tolist())
    ones = np.ones(n)
    if not np.any(np.all(rows >= ones, axis=1)):
        found[frozenset()] = tuple(ones.tolist())
    return _canonical(
        PatternConcept(
            extent=frozenset(m.labels[i] for i in extent_idx),
            intent=FuzzyPattern(intent, m.labels),
        )
        for extent_idx, intent in found.items()
    )


def concepts_to_json(concepts: Sequence[PatternConcept]) -> list[dict]:
    """Plain-data form of a concept list, in canonical order."""
    return [
        {
            "extent": sorted(c.extent),
            "intent": list(c.intent.degrees),
            "score": pattern_score(c.intent),
        }
        for c in _canonical(concepts)
    ]


def write_concepts_json(path, concepts: Sequence[PatternConcept]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(concepts_to_json(concepts), fh, indent=2)
        fh.write("\n")
