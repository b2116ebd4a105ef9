"""Synthetic behavioural datasets with known structure.

Used by the bundled end-to-end demo, the acceptance suite, and the lattice
benchmark.  ``behavior_dataset`` fabricates avatars with distinct hotkey
habit profiles.  Traces are generated in two-game *sessions* (think a
best-of series): both games of a session share one Gaussian draw around the
avatar's profile and differ only by a small per-game jitter.  That mirrors
how replay collections are actually produced, and it matters for surrogate
experiments: when an avatar is split in two, every session whose games land
on opposite sides produces one nearest-neighbour confusion in *each*
direction, so the confusion block between true siblings stays symmetric
instead of drifting on per-trace coin flips.

``alias_confusion_matrix`` fabricates a normalized confusion matrix directly
(diagonal-dominant with planted alias blocks) for workloads that skip the
classifier, e.g. the lattice benchmark.
"""

from __future__ import annotations

import math

import numpy as np

from .classify import ConfusionMatrix, NormalizedConfusionMatrix, normalize
from .dataset import AvatarIdentity, TraceEvent, TraceMeta

_HOTKEY_DIMS = 30
_ACTIONS = ("assign", "remove", "select")

#: Non-hotkey actions per trace; constant so APM carries no extra noise.
_OTHER_ACTIONS = 25


def behavior_dataset(
    n_avatars: int = 50,
    traces_per_avatar: int = 30,
    seed: int = 7,
    profile_low: int = 2,
    profile_high: int = 16,
    session_std: float = 1.5,
    game_std: float = 0.2,
    min_separation_factor: float = 4.0,
    horizon_s: float = 80.0,
    duration_s: float = 600.0,
) -> tuple[list[TraceEvent], list[TraceMeta]]:
    """Events and metadata for avatars with well-separated habit profiles.

    Per-trace hotkey counts are rounded Gaussians: a session mean drawn as
    ``N(profile, session_std)`` shared by two consecutive games, plus
    ``N(0, game_std)`` per game.  Raises if the smallest pairwise profile
    distance falls below ``min_separation_factor`` times the per-dimension
    trace standard deviation, which practically needs adversarial
    parameters.  All events fall inside ``horizon_s`` seconds.
    """
    if traces_per_avatar % 2:
        raise ValueError("traces_per_avatar must be even (two games per session)")
    rng = np.random.default_rng(seed)
    profiles = rng.integers(
        profile_low, profile_high + 1, size=(n_avatars, _HOTKEY_DIMS)
    ).astype(float)
    intra_std = math.hypot(session_std, game_std)
    min_dist = min(
        float(np.linalg.norm(profiles[i] - profiles[j]))
        for i in range(n_avatars)
        for j in range(i + 1, n_avatars)
    )
    if min_dist < min_separation_factor * intra_std:
        raise ValueError(
            f"profile separation {min_dist:.2f} below "
            f"{min_separation_factor} x intra-avatar std {intra_std:.2f}; "
            f"widen the profile range or change the seed"
        )

    events: list[TraceEvent] = []
    metas: list[TraceMeta] = []
    for i in range(n_avatars):
        identity = AvatarIdentity(
            label=f"player{i:03d}",
            account_id=f"acct{i:04d}",
            server="eu",
            name=f"Name{i:03d}",
        )
        game = 0
        for _session in range(traces_per_avatar // 2):
            session_mean = rng.normal(profiles[i], session_std)
            for _g in range(2):
                trace_id = f"g{i:03d}_{game:03d}"
                counts = np.rint(
                    rng.normal(session_mean, game_std, size=_HOTKEY_DIMS)
                ).astype(int)
                counts = np.maximum(counts, 0)
                total = int(counts.sum()) + _OTHER_ACTIONS
                ticks = iter(_spread(total, horizon_s))
                for slot, c in enumerate(counts):
                    action = _ACTIONS[slot // 10]
                    key = slot % 10
                    for _ in range(c):
                        events.append(TraceEvent(trace_id, next(ticks), action, key))
                for _ in range(_OTHER_ACTIONS):
                    events.append(TraceEvent(trace_id, next(ticks), "other"))
                metas.append(
                    TraceMeta(
                        trace_id=trace_id,
                        avatar=identity,
                        faction=i % 4,
                        outcome=game % 2,
                        duration_s=duration_s,
                    )
                )
                game += 1
    return events, metas


def _spread(count: int, horizon: float) -> list[float]:
    return [horizon * (k + 1) / (count + 1) for k in range(count)]


def alias_confusion_matrix(
    n_avatars: int,
    n_alias_pairs: int,
    seed: int = 0,
    traces_per_avatar: int = 30,
    noise_level: float = 0.1,
) -> NormalizedConfusionMatrix:
    """A normalized confusion matrix with planted symmetric alias blocks.

    The first ``2 * n_alias_pairs`` avatars form consecutive alias pairs that
    split their row mass roughly evenly across the block; everyone else is
    mostly diagonal with a little scattered noise.  Counts are integer, so
    the result is a faithful stand-in for a cross-validation product.
    """
    if 2 * n_alias_pairs > n_avatars:
        raise ValueError("more alias pairs than avatars can host")
    rng = np.random.default_rng(seed)
    counts = np.zeros((n_avatars, n_avatars), dtype=np.int64)
    stray = max(1, int(traces_per_avatar * noise_level))
    for i in range(n_avatars):
        partner = -1
        if i < 2 * n_alias_pairs:
            partner = i + 1 if i % 2 == 0 else i - 1
        own = traces_per_avatar
        if partner >= 0:
            half = traces_per_avatar // 2
            jitter = int(rng.integers(-2, 3))
            counts[i, partner] = half + jitter
            own -= counts[i, partner]
        hits = rng.integers(0, n_avatars, size=stray)
        for j in hits:
            if j != i and j != partner:
                counts[i, j] += 1
                own -= 1
        counts[i, i] = own
    labels = tuple(f"a{i:03d}" for i in range(n_avatars))
    return normalize(ConfusionMatrix(labels, counts))
