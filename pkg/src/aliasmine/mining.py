"""Candidate alias pairs: concept scoring, expansion, filtering, ranking.

A concept whose intent carries a lot of mass marks a group of avatars the
classifier systematically mixes up.  Every unordered pair inside such a
group becomes a candidate, scored by the best concept that generated it.
The score alone cannot tell one-directional confusion (one avatar absorbing
another's traces) from the mutual confusion an alias pair produces, so each
candidate is additionally checked with the *cluster score*: the cosine
between ``(M_ii, M_ij)`` and ``(M_jj, M_ji)``.  Mutual, balanced confusion
gives a cosine near 1, one-directional confusion gives 0, and a pair whose
traces all land on some third avatar gives 0 by the zero-vector convention.
Pairs below the ``lambda_`` threshold are dropped; survivors are re-ranked
by score, then cluster score.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .classify import NormalizedConfusionMatrix
from .lattice import FuzzyPattern, PatternConcept, enumerate_concepts, pattern_score

#: Above this many avatars an explicit positive ``min_score`` is required,
#: since the unpruned concept family can explode.
MAX_UNPRUNED_LABELS = 200


@dataclass(frozen=True)
class MiningConfig:
    """Knobs for the mining stage.

    ``lambda_`` is the minimum cluster score a pair must reach, ``min_score``
    prunes concepts below that intent score, ``top_k`` caps the report.
    """

    lambda_: float = 0.9
    min_score: float = 0.0
    top_k: int = 100

    def __post_init__(self):
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lambda_}")
        if self.min_score < 0:
            raise ValueError(f"min_score must be >= 0, got {self.min_score}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")


@dataclass(frozen=True)
class CandidatePair:
    """An unordered alias hypothesis; ``a < b`` canonically."""

    a: str
    b: str
    score: float
    cluster_score: float = 0.0
    provenance: frozenset[frozenset[str]] = frozenset()

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"a pair needs two distinct avatars, got {self.a!r}")
        if self.a > self.b:
            raise ValueError(f"pair ({self.a!r}, {self.b!r}) is not in canonical order")
        if not 0.0 <= self.cluster_score <= 1.0:
            raise ValueError("cluster_score must lie in [0, 1]")


def score(d: FuzzyPattern) -> float:
    """Intent score: the summed membership degrees."""
    return pattern_score(d)


def concepts_to_pairs(concepts: Iterable[PatternConcept]) -> list[CandidatePair]:
    """Expand every extent of size >= 2 into its unordered pairs.

    Each pair appears once, scored by the maximum over its generating
    concepts, sorted by score descending then label order.
    """
    best: dict[tuple[str, str], float] = {}
    origins: dict[tuple[str, str], set[frozenset[str]]] = {}
    for concept in concepts:
        if len(concept.extent) < 2:
            continue
        s = pattern_score(concept.intent)
        members = sorted(concept.extent)
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                key = (a, b)
                if key not in best or s > best[key]:
                    best[key] = s
                origins.setdefault(key, set()).add(concept.extent)
    pairs = [
        CandidatePair(a=a, b=b, score=s, provenance=frozenset(origins[(a, b)]))
        for (a, b), s in best.items()
    ]
    pairs.sort(key=lambda p: (-p.score, p.a, p.b))
    return pairs


def cluster_score(a: str, b: str, m: NormalizedConfusionMatrix) -> float:
    """Cosine of ``(M_aa, M_ab)`` and ``(M_bb, M_ba)``; 0 for a zero vector."""
    if a == b:
        raise ValueError(f"cluster score needs two distinct avatars, got {a!r}")
    i, j = m.index(a), m.index(b)
    u = (float(m.rows[i, i]), float(m.rows[i, j]))
    v = (float(m.rows[j, j]), float(m.rows[j, i]))
    nu = math.sqrt(u[0] * u[0] + u[1] * u[1])
    nv = math.sqrt(v[0] * v[0] + v[1] * v[1])
    if nu == 0.0 or nv == 0.0:
        return 0.0
    cos = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    return min(cos, 1.0)  # guard the rounding overshoot; entries are >= 0


def mine(
    m: NormalizedConfusionMatrix, config: MiningConfig = MiningConfig()
) -> list[CandidatePair]:
    """Full mining pass: concepts -> pairs -> cluster filter -> ranked list.

    Survivors are ordered by (score desc, cluster score desc, labels) and
    truncated to ``config.top_k``.  An empty result is valid.
    """
    if m.n > MAX_UNPRUNED_LABELS and config.min_score <= 0:
        raise ValueError(
            f"{m.n} avatars exceed {MAX_UNPRUNED_LABELS}; set a positive "
            f"min_score to bound the concept family"
        )
    concepts = enumerate_concepts(m, config.min_score)
    scored = [
        replace(p, cluster_score=cluster_score(p.a, p.b, m))
        for p in concepts_to_pairs(concepts)
    ]
    kept = [p for p in scored if p.cluster_score >= config.lambda_]
    kept.sort(key=lambda p: (-p.score, -p.cluster_score, p.a, p.b))
    return kept[: config.top_k]


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

_PAIRS_HEADER = ["rank", "a", "b", "score", "cluster_score"]


def write_pairs_csv(path, pairs: Sequence[CandidatePair]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_PAIRS_HEADER)
        for rank, p in enumerate(pairs, start=1):
            writer.writerow([rank, p.a, p.b, repr(p.score), repr(p.cluster_score)])


def pairs_to_json(pairs: Sequence[CandidatePair]) -> list[dict]:
    return [
        {
            "rank": rank,
            "a": p.a,
            "b": p.b,
            "score": p.score,
            "cluster_score": p.cluster_score,
        }
        for rank, p in enumerate(pairs, start=1)
    ]


def write_pairs_json(path, pairs: Sequence[CandidatePair]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(pairs_to_json(pairs), fh, indent=2)
        fh.write("\n")


def read_pairs_csv(path) -> list[CandidatePair]:
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != _PAIRS_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(_PAIRS_HEADER)!r}, got {header!r}"
            )
        for row in reader:
            if not row:
                continue
            _, a, b, s, cs = row
            pairs.append(
                CandidatePair(a=a, b=b, score=float(s), cluster_score=float(cs))
            )
    return pairs
