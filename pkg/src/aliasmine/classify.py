"""Deterministic classifiers, stratified cross-validation, confusion matrices.

The downstream miner consumes a row-normalized confusion matrix, so the one
hard requirement on this stage is determinism: identical data and seed must
yield an identical matrix.  Both built-in classifiers (k-nearest-neighbours
and Gaussian naive Bayes) therefore pin every tie-breaking rule explicitly:

* kNN: Euclidean distance, distance ties resolved by training order, vote
  ties by smallest mean distance among the tied labels, then label order.
* naive Bayes: per-class Gaussian likelihoods with a variance floor, priors
  from class frequencies, log-posterior argmax, ties by label order.

Matrices produced by other toolkits can be imported through the JSON format
(``{"labels": [...], "counts": [[...]]}``) instead of running a built-in
classifier.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import FeatureVector

CLASSIFIER_KINDS = ("knn", "naive_bayes", "external")


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "knn"
    k: int = 1
    variance_floor: float = 1e-9
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ValueError(
                f"unknown classifier kind {self.kind!r}; expected one of "
                f"{CLASSIFIER_KINDS}"
            )
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.variance_floor <= 0:
            raise ValueError("variance_floor must be > 0")
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Square count matrix: ``counts[i][j]`` = traces of label i predicted j."""

    labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        arr = np.asarray(self.counts)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"confusion counts must be square, got {arr.shape}")
        if arr.shape[0] != len(labels):
            raise ValueError(
                f"{len(labels)} labels but counts of shape {arr.shape}"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        if np.any(arr != np.floor(arr)) or np.any(arr < 0):
            raise ValueError("counts must be non-negative integers")
        arr = arr.astype(np.int64)
        arr.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "counts", arr)

    @property
    def n(self) -> int:
        return len(self.labels)

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)


@dataclass(frozen=True, eq=False)
class NormalizedConfusionMatrix:
    """Row-stochastic view of a confusion matrix; rows sum to 1."""

    labels: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        arr = np.asarray(self.rows, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"matrix must be square, got {arr.shape}")
        if arr.shape[0] != len(labels):
            raise ValueError(f"{len(labels)} labels but rows of shape {arr.shape}")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be unique")
        if np.any(arr < 0) or np.any(arr > 1):
            raise ValueError("normalized entries must lie in [0, 1]")
        bad = np.flatnonzero(np.abs(arr.sum(axis=1) - 1.0) > 1e-9)
        if bad.size:
            raise ValueError(
                f"rows must sum to 1 within 1e-9; first offender: "
                f"{labels[bad[0]]!r}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "rows", arr)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown avatar label {label!r}") from None

    def entry(self, a: str, b: str) -> float:
        return float(self.rows[self.index(a), self.index(b)])


def normalize(cm: ConfusionMatrix) -> NormalizedConfusionMatrix:
    """Divide each row by its sum; a zero row (avatar never seen) is an error."""
    sums = cm.row_sums()
    zero = np.flatnonzero(sums == 0)
    if zero.size:
        raise ValueError(
            f"avatar {cm.labels[zero[0]]!r} has no traces; filter the dataset "
            f"before normalizing"
        )
    return NormalizedConfusionMatrix(cm.labels, cm.counts / sums[:, None])


# ---------------------------------------------------------------------------
# classifiers
# ---------------------------------------------------------------------------


def _sq_distances(train_x: np.ndarray, query: np.ndarray) -> np.ndarray:
    diff = train_x - query
    return np.einsum("ij,ij->i", diff, diff)


def _knn_vote(
    train_x: np.ndarray,
    label_idx: np.ndarray,
    n_labels: int,
    query: np.ndarray,
    k: int,
) -> int:
    d2 = _sq_distances(train_x, query)
    nearest = np.argsort(d2, kind="stable")[:k]  # distance ties: training order
    votes = np.bincount(label_idx[nearest], minlength=n_labels)
    best = votes.max()
    tied = np.flatnonzero(votes == best)
    if tied.size == 1:
        return int(tied[0])
    dists = np.sqrt(d2[nearest])
    means = np.array([dists[label_idx[nearest] == t].mean() for t in tied])
    tied = tied[means == means.min()]
    return int(tied[0])  # remaining ties: label order


def knn_predict(
    train_x: Sequence[Sequence[float]],
    train_labels: Sequence[str],
    query: Sequence[float],
    k: int,
) -> str:
    """Majority label among the k nearest training vectors."""
    x = np.asarray(train_x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty training set")
    if len(train_labels) != x.shape[0]:
        raise ValueError("one label per training vector required")
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k must be in 1..{x.shape[0]}, got {k}")
    labels = sorted(set(train_labels))
    index = {lab: i for i, lab in enumerate(labels)}
    label_idx = np.array([index[lab] for lab in train_labels])
    q = np.asarray(query, dtype=np.float64)
    return labels[_knn_vote(x, label_idx, len(labels), q, k)]


class _GaussianNB:
    """Per-class Gaussian likelihood model with a variance floor."""

    def __init__(
        self,
        train_x: np.ndarray,
        label_idx: np.ndarray,
        n_labels: int,
        variance_floor: float,
    ):
        n, d = train_x.shape
        self.means = np.empty((n_labels, d))
        self.variances = np.empty((n_labels, d))
        self.log_priors = np.empty(n_labels)
        for c in range(n_labels):
            members = train_x[label_idx == c]
            if members.shape[0] == 0:
                raise ValueError(f"class index {c} has no training vectors")
            self.means[c] = members.mean(axis=0)
            self.variances[c] = np.maximum(members.var(axis=0), variance_floor)
            self.log_priors[c] = math.log(members.shape[0] / n)
        self._log_norm = 0.5 * np.log(2.0 * np.pi * self.variances).sum(axis=1)

    def predict(self, query: np.ndarray) -> int:
        gaps = (query - self.means) ** 2 / self.variances
        log_post = self.log_priors - self._log_norm - 0.5 * gaps.sum(axis=1)
        return int(np.argmax(log_post))  # argmax keeps first max: label order


def naive_bayes_fit_predict(
    train_x: Sequence[Sequence[float]],
    train_labels: Sequence[str],
    query: Sequence[float],
    variance_floor: float = 1e-9,
) -> str:
    """Fit Gaussian naive Bayes on the training vectors and classify one query."""
    x = np.asarray(train_x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty training set")
    if variance_floor <= 0:
        raise ValueError("variance_floor must be > 0")
    labels = sorted(set(train_labels))
    index = {lab: i for i, lab in enumerate(labels)}
    label_idx = np.array([index[lab] for lab in train_labels])
    model = _GaussianNB(x, label_idx, len(labels), variance_floor)
    return labels[model.predict(np.asarray(query, dtype=np.float64))]


# ---------------------------------------------------------------------------
# cross-validation
# ---------------------------------------------------------------------------


def stratified_folds(
    labels: Sequence[str], folds: int, seed: int
) -> np.ndarray:
    """Assign each position a fold id: per-class seeded shuffle, round-robin.

    Raises ``ValueError`` naming the first avatar with fewer traces than
    folds, since stratification is infeasible there.
    """
    by_label: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(i)
    rng = random.Random(seed)
    assignment = np.empty(len(labels), dtype=np.int64)
    for lab in sorted(by_label):
        idxs = by_label[lab]
        if len(idxs) < folds:
            raise ValueError(
                f"avatar {lab!r} has only {len(idxs)} traces, fewer than "
                f"{folds} folds"
            )
        rng.shuffle(idxs)
        for pos, i in enumerate(idxs):
            assignment[i] = pos % folds
    return assignment


def cross_validate(
    dataset: Sequence[FeatureVector], config: ClassifierConfig
) -> ConfusionMatrix:
    """Predict every trace once under stratified k-fold CV; aggregate counts.

    Rows/columns follow sorted label order.  The result is a deterministic
    function of (dataset, config).
    """
    if config.kind == "external":
        raise ValueError(
            "kind='external' means the confusion matrix is imported, not "
            "computed; load it from JSON instead"
        )
    if not dataset:
        raise ValueError("empty dataset")
    x = np.array([fv.values for fv in dataset], dtype=np.float64)
    if not np.all(np.isfinite(x)):
        bad = int(np.argwhere(~np.isfinite(x))[0][0])
        raise ValueError(
            f"non-finite feature value in trace {dataset[bad].trace_id!r}"
        )
    trace_labels = [fv.avatar.label for fv in dataset]
    labels = sorted(set(trace_labels))
    index = {lab: i for i, lab in enumerate(labels)}
    label_idx = np.array([index[lab] for lab in trace_labels])

    fold_of = stratified_folds(trace_labels, config.folds, config.seed)
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for fold in range(config.folds):
        test = np.flatnonzero(fold_of == fold)
        train = np.flatnonzero(fold_of != fold)
        train_x, train_y = x[train], label_idx[train]
        if config.kind == "knn":
            if config.k > train.size:
                raise ValueError(
                    f"k={config.k} exceeds training size {train.size} in "
                    f"fold {fold}"
                )
            for i in test:
                pred = _knn_vote(train_x, train_y, len(labels), x[i], config.k)
                counts[label_idx[i], pred] += 1
        else:
            model = _GaussianNB(
                train_x, train_y, len(labels), config.variance_floor
            )
            for i in test:
                counts[label_idx[i], model.predict(x[i])] += 1
    return ConfusionMatrix(tuple(labels), counts)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def write_confusion_json(path, cm: ConfusionMatrix) -> None:
    payload = {"labels": list(cm.labels), "counts": cm.counts.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_confusion_json(path) -> ConfusionMatrix:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        labels, counts = payload["labels"], payload["counts"]
    except (TypeError, KeyError):
        raise ValueError(
            f"{path}: expected JSON object with 'labels' and 'counts'"
        ) from None
    return ConfusionMatrix(tuple(labels), np.array(counts))


def write_normalized_json(path, m: NormalizedConfusionMatrix) -> None:
    # 15 significant digits round-trip float64 exactly enough for downstream
    # consumers while keeping the file diff-stable.
    rows = [[float(f"{v:.15g}") for v in row] for row in m.rows]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"labels": list(m.labels), "rows": rows}, fh, indent=2)
        fh.write("\n")


def read_normalized_json(path) -> NormalizedConfusionMatrix:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        labels, rows = payload["labels"], payload["rows"]
    except (TypeError, KeyError):
        raise ValueError(
            f"{path}: expected JSON object with 'labels' and 'rows'"
        ) from None
    return NormalizedConfusionMatrix(tuple(labels), np.array(rows))
