"""Trace ingestion, feature extraction, dataset filters, and surrogate injection.

A *trace* is the behavioural record of one game played under one avatar
(virtual identity).  Traces arrive either as raw timestamped events plus a
per-trace metadata table, or as a pre-computed feature table.  Three file
formats are supported, all UTF-8 CSV:

* events:    ``trace_id,timestamp,action_type,key`` -- one row per in-game
  action; ``key`` is the hotkey digit 0-9 and is empty for actions that are
  not hotkey operations.
* metadata:  ``trace_id,avatar_label,account_id,server,name,faction,outcome,
  duration_s`` -- one row per trace; identity columns may be empty.
* features:  ``trace_id,avatar_label`` followed by the 33 feature columns in
  the order of :data:`FEATURE_NAMES`.

The feature space is 30 hotkey usage counts (``{assign,remove,select}`` x
digits 0-9, counted inside the first ``tau`` seconds of the game), the
player's faction (integer-coded), the game outcome (winner=1 / loser=0) and
the average actions per minute over the truncated window.

Two dataset surgeries are provided: ``filter_min_traces`` keeps only avatars
with at least ``theta`` traces, and ``inject_surrogates`` splits the most
active avatars into two synthetic siblings each, producing ground-truth alias
pairs that a miner should rediscover.
"""

from __future__ import annotations

import csv
import logging
import math
import random
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

HOTKEY_ACTIONS = ("assign", "remove", "select")
ACTION_TYPES = HOTKEY_ACTIONS + ("other",)

#: Canonical feature column order shared by every dataset artifact.
FEATURE_NAMES: tuple[str, ...] = tuple(
    f"{action}_{key}" for action in HOTKEY_ACTIONS for key in range(10)
) + ("faction", "outcome", "apm")

N_FEATURES = len(FEATURE_NAMES)
_HOTKEY_SLOT = {
    (action, key): i * 10 + key
    for i, action in enumerate(HOTKEY_ACTIONS)
    for key in range(10)
}

#: Default integer coding for faction strings; integer literals pass through.
DEFAULT_FACTION_CODES: Mapping[str, int] = {
    "terran": 0,
    "protoss": 1,
    "zerg": 2,
    "random": 3,
}


@dataclass(frozen=True)
class AvatarIdentity:
    """One virtual identity; ``label`` is the classifier class label."""

    label: str
    account_id: str | None = None
    server: str | None = None
    name: str | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("avatar label must be a non-empty string")


@dataclass(frozen=True)
class TraceEvent:
    """A single timestamped in-game action."""

    trace_id: str
    timestamp: float
    action_type: str
    key: int | None = None

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError(
                f"trace {self.trace_id!r}: negative timestamp {self.timestamp}"
            )
        if self.action_type not in ACTION_TYPES:
            raise ValueError(
                f"trace {self.trace_id!r}: unknown action type {self.action_type!r}"
            )
        if self.action_type in HOTKEY_ACTIONS:
            if self.key is None or not 0 <= self.key <= 9:
                raise ValueError(
                    f"trace {self.trace_id!r}: hotkey action {self.action_type!r} "
                    f"requires a key in 0..9, got {self.key!r}"
                )
        elif self.key is not None:
            raise ValueError(
                f"trace {self.trace_id!r}: action {self.action_type!r} must not "
                f"carry a key"
            )


@dataclass(frozen=True)
class TraceMeta:
    """Per-trace metadata: who played it and how the game ended."""

    trace_id: str
    avatar: AvatarIdentity
    faction: int
    outcome: int
    duration_s: float

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise ValueError(f"trace {self.trace_id!r}: outcome must be 0 or 1")
        if self.duration_s < 0:
            raise ValueError(f"trace {self.trace_id!r}: negative duration")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """One trace reduced to the fixed 33-dimensional feature space."""

    trace_id: str
    avatar: AvatarIdentity
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (N_FEATURES,):
            raise ValueError(
                f"trace {self.trace_id!r}: expected {N_FEATURES} features, "
                f"got shape {arr.shape}"
            )
        for i in range(30):
            v = float(arr[i])
            if not (v >= 0 and v.is_integer()):
                raise ValueError(
                    f"trace {self.trace_id!r}: hotkey count {FEATURE_NAMES[i]} "
                    f"must be a non-negative integer, got {v}"
                )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def features(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


@dataclass(frozen=True)
class DatasetSpec:
    """Dataset filters: truncation horizon and minimum trace count."""

    tau: float
    theta: int

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.theta < 1:
            raise ValueError(f"theta must be >= 1, got {self.theta}")


@dataclass(frozen=True)
class SurrogateSpec:
    """Controls surrogate injection.

    ``gamma`` is the fraction of the most active eligible avatars to split,
    ``beta`` the share of traces handed to the first sibling, and ``seed``
    drives the shuffle that precedes the split.
    """

    gamma: float
    beta: float
    seed: int

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.5 <= self.beta < 1:
            raise ValueError(f"beta must be in [0.5, 1), got {self.beta}")


def extract_features(
    events: Iterable[TraceEvent],
    tau: float,
    meta: Iterable[TraceMeta] | Mapping[str, TraceMeta],
) -> list[FeatureVector]:
    """Reduce raw events to feature vectors, truncated at ``tau`` seconds.

    Every trace named in ``meta`` yields one vector (a trace without events
    gets all-zero counts).  Hotkey counts and the action total only include
    events with ``timestamp <= tau``; APM is ``60 * total / min(tau,
    duration)``.

    Raises ``ValueError`` for an event whose trace_id has no metadata row.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    if isinstance(meta, Mapping):
        meta_index = dict(meta)
    else:
        meta_index = {m.trace_id: m for m in meta}

    counts: dict[str, np.ndarray] = {
        tid: np.zeros(30, dtype=np.float64) for tid in meta_index
    }
    totals: dict[str, int] = defaultdict(int)
    for ev in events:
        if ev.trace_id not in meta_index:
            raise ValueError(f"event references unknown trace_id {ev.trace_id!r}")
        if ev.timestamp > tau:
            continue
        totals[ev.trace_id] += 1
        if ev.action_type in HOTKEY_ACTIONS:
            counts[ev.trace_id][_HOTKEY_SLOT[(ev.action_type, ev.key)]] += 1

    out = []
    for tid, m in meta_index.items():
        window = min(tau, m.duration_s)
        apm = 60.0 * totals[tid] / window if window > 0 else 0.0
        values = np.concatenate(
            [counts[tid], [float(m.faction), float(m.outcome), apm]]
        )
        out.append(FeatureVector(trace_id=tid, avatar=m.avatar, values=values))
    return out


def trace_counts(dataset: Sequence[FeatureVector]) -> dict[str, int]:
    """Number of traces per avatar label, in first-appearance order."""
    counts: dict[str, int] = {}
    for fv in dataset:
        counts[fv.avatar.label] = counts.get(fv.avatar.label, 0) + 1
    return counts


def filter_min_traces(
    dataset: Sequence[FeatureVector], theta: int
) -> list[FeatureVector]:
    """Keep only traces of avatars that have at least ``theta`` traces."""
    if theta < 1:
        raise ValueError(f"theta must be >= 1, got {theta}")
    counts = trace_counts(dataset)
    kept = [fv for fv in dataset if counts[fv.avatar.label] >= theta]
    if dataset and not kept:
        raise ValueError(
            f"theta={theta} removes every avatar "
            f"(max trace count is {max(counts.values())})"
        )
    return kept


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def inject_surrogates(
    dataset: Sequence[FeatureVector], spec: SurrogateSpec, theta: int
) -> tuple[list[FeatureVector], list[tuple[str, str]]]:
    """Split the most active avatars into sibling pairs of fresh labels.

    Eligible avatars are those with at least ``theta`` traces; the
    ``ceil(gamma * m)`` with the highest trace counts (ties broken by label)
    are each replaced by ``<label>#1`` / ``<label>#2``.  Each avatar's traces
    are shuffled with a seed-derived RNG and the first ``round(beta * n)``
    go to the first sibling.  Returns the rewritten dataset (original order
    preserved) and the sibling label pairs, which are the evaluation ground
    truth.

    An avatar whose split would leave the second sibling empty is skipped
    with a warning.  A fresh label colliding with an existing one is an
    ingestion error.
    """
    counts = trace_counts(dataset)
    eligible = [lab for lab, c in counts.items() if c >= theta]
    if not eligible:
        log.warning("no avatar reaches theta=%d traces; nothing to split", theta)
        return list(dataset), []
    n_split = math.ceil(spec.gamma * len(eligible))
    chosen = sorted(eligible, key=lambda lab: (-counts[lab], lab))[:n_split]

    existing = set(counts)
    for lab in chosen:
        for suffix in ("#1", "#2"):
            if lab + suffix in existing:
                raise ValueError(
                    f"surrogate label {lab + suffix!r} collides with an "
                    f"existing avatar label"
                )

    rng = random.Random(spec.seed)
    relabel: dict[str, str] = {}  # trace_id -> new label
    identities: dict[str, AvatarIdentity] = {}
    pairs: list[tuple[str, str]] = []
    for lab in chosen:
        trace_ids = [fv.trace_id for fv in dataset if fv.avatar.label == lab]
        n_first = _round_half_up(spec.beta * len(trace_ids))
        if n_first >= len(trace_ids):
            log.warning(
                "skipping avatar %r: beta=%s leaves the second surrogate "
                "empty (%d traces)",
                lab,
                spec.beta,
                len(trace_ids),
            )
            continue
        rng.shuffle(trace_ids)
        first, second = lab + "#1", lab + "#2"
        for tid in trace_ids[:n_first]:
            relabel[tid] = first
        for tid in trace_ids[n_first:]:
            relabel[tid] = second
        pairs.append((first, second))

    out = []
    for fv in dataset:
        new_label = relabel.get(fv.trace_id)
        if new_label is None:
            out.append(fv)
            continue
        ident = identities.get(new_label)
        if ident is None:
            ident = replace(fv.avatar, label=new_label)
            identities[new_label] = ident
        out.append(FeatureVector(fv.trace_id, ident, fv.values))
    return out, pairs


# ---------------------------------------------------------------------------
# CSV / JSON interchange
# ---------------------------------------------------------------------------

_EVENT_HEADER = ["trace_id", "timestamp", "action_type", "key"]
_META_HEADER = [
    "trace_id",
    "avatar_label",
    "account_id",
    "server",
    "name",
    "faction",
    "outcome",
    "duration_s",
]


def _check_header(got: list[str] | None, want: list[str], path) -> None:
    if got is None or [h.strip() for h in got] != want:
        raise ValueError(f"{path}: expected header {','.join(want)!r}, got {got!r}")


def read_events_csv(path) -> list[TraceEvent]:
    """Read an event table; events are sorted by timestamp within a trace."""
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), _EVENT_HEADER, path)
        for row in reader:
            if not row:
                continue
            tid, ts, action, key = row
            events.append(
                TraceEvent(
                    trace_id=tid,
                    timestamp=float(ts),
                    action_type=action,
                    key=int(key) if key != "" else None,
                )
            )
    events.sort(key=lambda ev: ev.timestamp)
    by_trace: dict[str, list[TraceEvent]] = defaultdict(list)
    for ev in events:
        by_trace[ev.trace_id].append(ev)
    return [ev for tid in by_trace for ev in by_trace[tid]]


def write_events_csv(path, events: Iterable[TraceEvent]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_EVENT_HEADER)
        for ev in events:
            writer.writerow(
                [
                    ev.trace_id,
                    repr(ev.timestamp),
                    ev.action_type,
                    "" if ev.key is None else ev.key,
                ]
            )


def _encode_faction(raw: str, codes: Mapping[str, int], path, tid: str) -> int:
    text = raw.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return codes[text.lower()]
    except KeyError:
        raise ValueError(
            f"{path}: trace {tid!r} has unknown faction {raw!r}; "
            f"known codes: {sorted(codes)}"
        ) from None


def _encode_outcome(raw: str, path, tid: str) -> int:
    text = raw.strip().lower()
    if text in ("0", "loser"):
        return 0
    if text in ("1", "winner"):
        return 1
    raise ValueError(f"{path}: trace {tid!r} has invalid outcome {raw!r}")


def read_meta_csv(
    path, faction_codes: Mapping[str, int] | None = None
) -> dict[str, TraceMeta]:
    """Read per-trace metadata keyed by trace_id.

    Identity columns must agree across all rows of the same avatar label.
    """
    codes = DEFAULT_FACTION_CODES if faction_codes is None else faction_codes
    metas: dict[str, TraceMeta] = {}
    identities: dict[str, AvatarIdentity] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), _META_HEADER, path)
        for row in reader:
            if not row:
                continue
            tid, label, account, server, name, faction, outcome, duration = row
            if tid in metas:
                raise ValueError(f"{path}: duplicate trace_id {tid!r}")
            ident = AvatarIdentity(
                label=label,
                account_id=account or None,
                server=server or None,
                name=name or None,
            )
            seen = identities.setdefault(label, ident)
            if seen != ident:
                raise ValueError(
                    f"{path}: avatar {label!r} has conflicting identity rows"
                )
            metas[tid] = TraceMeta(
                trace_id=tid,
                avatar=seen,
                faction=_encode_faction(faction, codes, path, tid),
                outcome=_encode_outcome(outcome, path, tid),
                duration_s=float(duration),
            )
    return metas


def write_meta_csv(path, metas: Iterable[TraceMeta]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_META_HEADER)
        for m in metas:
            a = m.avatar
            writer.writerow(
                [
                    m.trace_id,
                    a.label,
                    a.account_id or "",
                    a.server or "",
                    a.name or "",
                    m.faction,
                    m.outcome,
                    repr(m.duration_s),
                ]
            )


_FEATURES_HEADER = ["trace_id", "avatar_label"] + list(FEATURE_NAMES)


def read_features_csv(path) -> list[FeatureVector]:
    """Read a pre-computed feature table (identities carry labels only)."""
    out = []
    identities: dict[str, AvatarIdentity] = {}
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), _FEATURES_HEADER, path)
        for row in reader:
            if not row:
                continue
            tid, label = row[0], row[1]
            if tid in seen:
                raise ValueError(f"{path}: duplicate trace_id {tid!r}")
            seen.add(tid)
            values = np.array([float(v) for v in row[2:]], dtype=np.float64)
            ident = identities.setdefault(label, AvatarIdentity(label=label))
            out.append(FeatureVector(trace_id=tid, avatar=ident, values=values))
    return out


def write_features_csv(path, dataset: Iterable[FeatureVector]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_FEATURES_HEADER)
        for fv in dataset:
            v = fv.values
            row = [fv.trace_id, fv.avatar.label]
            row += [str(int(x)) for x in v[:30]]
            row += [str(int(v[30])), str(int(v[31])), repr(float(v[32]))]
            writer.writerow(row)
