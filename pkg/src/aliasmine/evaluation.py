"""Ground-truth labeling of ranked pairs and the retrieval metric suite.

Ground truth is tiered, strongest first: *surrogate* siblings planted by the
dataset split, *same account* (equal non-empty account id), and *same name*
(equal non-empty display name on different accounts, a weak signal since
names are not unique).  The tier chooses which evidence counts as positive:

* ``SUG``             -- surrogates only;
* ``SUG_URLS``        -- adds same-account pairs;
* ``SUG_URLS_NAMES``  -- adds same-name pairs.

Metrics follow the usual retrieval conventions: positives never retrieved
contribute zero to average precision and rank below every retrieved item for
the AUC, where ties (identical score and cluster score) earn half credit.
The reported "map" is the average precision of the single ranking.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .dataset import AvatarIdentity
from .mining import CandidatePair

TIERS = ("SUG", "SUG_URLS", "SUG_URLS_NAMES")

SURROGATE = "surrogate"
SAME_ACCOUNT = "same_account"
SAME_NAME = "same_name"
NEGATIVE = "negative"

_POSITIVE_EVIDENCE = {
    "SUG": frozenset({SURROGATE}),
    "SUG_URLS": frozenset({SURROGATE, SAME_ACCOUNT}),
    "SUG_URLS_NAMES": frozenset({SURROGATE, SAME_ACCOUNT, SAME_NAME}),
}


@dataclass(frozen=True)
class GroundTruth:
    surrogate_pairs: frozenset[frozenset[str]]
    identity_index: Mapping[str, AvatarIdentity]
    tier: str

    def __post_init__(self):
        if self.tier not in TIERS:
            raise ValueError(f"tier must be one of {TIERS}, got {self.tier!r}")
        pairs = frozenset(frozenset(p) for p in self.surrogate_pairs)
        if any(len(p) != 2 for p in pairs):
            raise ValueError("surrogate pairs must contain two distinct labels")
        object.__setattr__(self, "surrogate_pairs", pairs)

    def positive_evidence(self) -> frozenset[str]:
        return _POSITIVE_EVIDENCE[self.tier]


def _evidence(a: str, b: str, gt: GroundTruth) -> str:
    for label in (a, b):
        if label not in gt.identity_index:
            raise KeyError(f"unknown avatar label {label!r}")
    if frozenset((a, b)) in gt.surrogate_pairs:
        return SURROGATE
    ia, ib = gt.identity_index[a], gt.identity_index[b]
    if ia.account_id and ib.account_id and ia.account_id == ib.account_id:
        return SAME_ACCOUNT
    if ia.name and ib.name and ia.name == ib.name:
        return SAME_NAME
    return NEGATIVE


def label_pair(pair: CandidatePair, gt: GroundTruth) -> str:
    """Strongest evidence for the pair: surrogate > same_account > same_name."""
    return _evidence(pair.a, pair.b, gt)


def is_positive(evidence: str, tier: str) -> bool:
    return evidence in _POSITIVE_EVIDENCE[tier]


def total_positive_pairs(gt: GroundTruth, labels: Sequence[str]) -> int:
    """Ground-truth-positive pairs over the given avatar universe."""
    universe = sorted(set(labels))
    positive = gt.positive_evidence()
    count = 0
    for i, a in enumerate(universe):
        for b in universe[i + 1 :]:
            if _evidence(a, b, gt) in positive:
                count += 1
    return count


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def precision_recall_f1(
    flags: Sequence[bool], cutoff: int, total_positives: int
) -> tuple[float, float, float]:
    """Precision, recall and F1 over the first ``cutoff`` entries.

    Precision divides by the effective cutoff (the list may be shorter);
    recall divides by ``total_positives``.  Degenerate denominators give 0.
    """
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    if total_positives < 0:
        raise ValueError("total_positives must be >= 0")
    depth = min(cutoff, len(flags))
    tp = sum(bool(f) for f in flags[:depth])
    precision = tp / depth if depth else 0.0
    recall = tp / total_positives if total_positives else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def p_at_k(flags: Sequence[bool], k: int = 10) -> float:
    """Fraction of positives among the first ``min(k, len)`` entries."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    depth = min(k, len(flags))
    if depth == 0:
        return 0.0
    return sum(bool(f) for f in flags[:depth]) / depth


def average_precision(flags: Sequence[bool], total_positives: int) -> float:
    """Mean of precision-at-hit over all positives; misses contribute 0."""
    if total_positives < 1:
        raise ValueError("average precision is undefined without positives")
    hits = 0
    acc = 0.0
    for rank, flag in enumerate(flags, start=1):
        if flag:
            hits += 1
            acc += hits / rank
    return acc / total_positives


def roc_auc(
    ranking: Sequence[bool] | Sequence[tuple[bool, tuple]],
    total_positives: int,
    total_negatives: int,
) -> float:
    """Probability a random positive outranks a random negative.

    Entries are either bare flags (every rank distinct) or ``(flag, key)``
    tuples where equal keys mean a tie worth half credit.  Positives and
    negatives missing from the ranking sit below every retrieved entry, tied
    with each other.
    """
    if total_positives < 1 or total_negatives < 1:
        raise ValueError("AUC needs at least one positive and one negative")
    entries = []
    for pos, item in enumerate(ranking):
        if isinstance(item, tuple):
            flag, key = item
        else:
            flag, key = item, (-pos,)  # position itself: strictly decreasing
        entries.append((bool(flag), tuple(key)))
    got_pos = sum(1 for f, _ in entries if f)
    got_neg = len(entries) - got_pos
    if got_pos > total_positives or got_neg > total_negatives:
        raise ValueError("ranking contains more items than the stated totals")
    missing_pos = total_positives - got_pos
    missing_neg = total_negatives - got_neg

    # integer accumulator: 2 per win, 1 per tie
    credit = 0
    for f_a, key_a in entries:
        if not f_a:
            continue
        for f_b, key_b in entries:
            if f_b:
                continue
            if key_a > key_b:
                credit += 2
            elif key_a == key_b:
                credit += 1
    credit += 2 * got_pos * missing_neg  # retrieved positive > missing negative
    credit += missing_pos * missing_neg  # both missing: tied
    return credit / (2 * total_positives * total_negatives)


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledPair:
    rank: int
    pair: CandidatePair
    evidence: str
    positive: bool


@dataclass(frozen=True)
class MetricsReport:
    tier: str
    precision: float
    recall: float
    f1: float
    p_at_10: float
    map: float
    auc: float
    positives_in_ranking: int
    total_positives: int

    def __post_init__(self):
        for name in ("precision", "recall", "f1", "p_at_10", "map", "auc"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")

    def as_dict(self) -> dict:
        return {
            "tier": self.tier,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "p_at_10": self.p_at_10,
            "map": self.map,
            "auc": self.auc,
            "positives_in_ranking": self.positives_in_ranking,
            "total_positives": self.total_positives,
        }


def evaluate_ranking(
    pairs: Sequence[CandidatePair],
    gt: GroundTruth,
    universe_labels: Sequence[str],
    cutoff: int | None = None,
) -> tuple[MetricsReport, list[LabeledPair]]:
    """Label a ranked pair list against ground truth and compute all metrics.

    ``universe_labels`` is the avatar set the miner saw; it fixes the
    denominators (total positive pairs, and the pair universe for AUC
    negatives), so every ranked pair must lie inside it.
    """
    universe = set(universe_labels)
    labeled = []
    for rank, pair in enumerate(pairs, start=1):
        for label in (pair.a, pair.b):
            if label not in universe:
                raise ValueError(
                    f"ranked pair ({pair.a!r}, {pair.b!r}) is outside the "
                    f"avatar universe; denominators would be inconsistent"
                )
        ev = label_pair(pair, gt)
        labeled.append(
            LabeledPair(
                rank=rank, pair=pair, evidence=ev, positive=is_positive(ev, gt.tier)
            )
        )
    flags = [lp.positive for lp in labeled]
    total_pos = total_positive_pairs(gt, universe_labels)
    if total_pos == 0:
        raise ValueError(
            f"tier {gt.tier} has no ground-truth positive pairs over this "
            f"avatar set; nothing to evaluate"
        )
    n = len(set(universe_labels))
    total_neg = n * (n - 1) // 2 - total_pos
    depth = cutoff if cutoff is not None else max(len(flags), 1)
    precision, recall, f1 = precision_recall_f1(flags, depth, total_pos)
    keyed = [
        (lp.positive, (lp.pair.score, lp.pair.cluster_score)) for lp in labeled
    ]
    report = MetricsReport(
        tier=gt.tier,
        precision=precision,
        recall=recall,
        f1=f1,
        p_at_10=p_at_k(flags, 10),
        map=average_precision(flags, total_pos),
        auc=roc_auc(keyed, total_pos, total_neg),
        positives_in_ranking=sum(flags),
        total_positives=total_pos,
    )
    return report, labeled


def write_report_json(path, report: MetricsReport, labeled: Sequence[LabeledPair]) -> None:
    payload = report.as_dict()
    payload["pairs"] = [
        {
            "rank": lp.rank,
            "a": lp.pair.a,
            "b": lp.pair.b,
            "score": lp.pair.score,
            "cluster_score": lp.pair.cluster_score,
            "evidence": lp.evidence,
        }
        for lp in labeled
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_labeled_csv(path, labeled: Sequence[LabeledPair]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "a", "b", "score", "cluster_score", "evidence"])
        for lp in labeled:
            writer.writerow(
                [
                    lp.rank,
                    lp.pair.a,
                    lp.pair.b,
                    repr(lp.pair.score),
                    repr(lp.pair.cluster_score),
                    lp.evidence,
                ]
            )
