"""\
Lloyd k-means over the complete records.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.spatial.distance import cdist

from .._settings import settings
from .._warnings import ConvergenceWarning
from ..logging import get_logger
from .errors import PipelineError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .dataset import Dataset

logger = get_logger(__name__)


@dataclass(frozen=True)
class FixedInit:
    """Start from the given mean vectors, one row per cluster."""

    means: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64, ndmin=2)
        means.flags.writeable = False
        object.__setattr__(self, "means", means)

    def __str__(self) -> str:
        return "fixed"


@dataclass(frozen=True)
class ClassSeededInit:
    """Start from per-class centroids of the labeled records, classes in lexicographic order."""

    def __str__(self) -> str:
        return "class_seeded"


@dataclass(frozen=True)
class FarthestFirstInit:
    """\
    Start at `start_id` (lowest record id if `None`) and repeatedly add the
    record whose distance to its nearest chosen seed is largest.
    """

    start_id: int | None = None

    def __str__(self) -> str:
        return "farthest_first" if self.start_id is None else f"farthest_first:{self.start_id}"


InitStrategy = FixedInit | ClassSeededInit | FarthestFirstInit


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """\
    Result of :func:`kmeans`.

    `labels` holds the 1-based cluster of every record in `record_ids`
    (ascending). `wcss_history` has one entry per mean update.
    """

    k: int
    means: np.ndarray
    record_ids: np.ndarray
    labels: np.ndarray
    n_iter: int
    converged: bool
    wcss_history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        for name in ("means", "record_ids", "labels"):
            a = np.array(getattr(self, name))
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @cached_property
    def assignment(self) -> dict[int, int]:
        """Record id → cluster index in `1..k`."""
        return dict(zip(self.record_ids.tolist(), self.labels.tolist()))

    @cached_property
    def members(self) -> tuple[tuple[int, ...], ...]:
        """Ascending member ids of every cluster."""
        return tuple(
            tuple(self.record_ids[self.labels == c].tolist())
            for c in range(1, self.k + 1)
        )

    @property
    def wcss(self) -> float:
        return self.wcss_history[-1] if self.wcss_history else float("nan")

    def cluster_of(self, record_id: int) -> int:
        try:
            return self.assignment[record_id]
        except KeyError:
            msg = f"Record {record_id} is not assigned in this model."
            raise KeyError(msg) from None

    def __repr__(self) -> str:
        return (
            f"ClusterModel(k={self.k}, members={list(map(list, self.members))}, "
            f"n_iter={self.n_iter}, converged={self.converged})"
        )


def _complete_matrix(group: Dataset) -> tuple[np.ndarray, np.ndarray]:
    group = group.sort_by_id()
    if group.n_obs == 0:
        msg = "No complete records to cluster."
        raise PipelineError(msg)
    if group.missing_mask.any():
        msg = "Only complete records can be clustered."
        raise PipelineError(msg)
    return np.asarray(group.X, dtype=np.float64), group.record_ids


def infer_k(group: Dataset) -> int:
    """\
    Number of distinct class labels among the labeled records of `group`.

    Unlabeled records are ignored.
    """
    labels = {label for label in group.labels if label is not None}
    if not labels:
        msg = "Cannot infer k: no complete record has a class label."
        raise PipelineError(msg)
    return len(labels)


def _farthest_first(X: np.ndarray, ids: np.ndarray, k: int, start_id: int | None) -> np.ndarray:
    if start_id is None:
        start = 0
    else:
        (hits,) = np.nonzero(ids == start_id)
        if len(hits) == 0:
            msg = f"Start record {start_id} is not a complete record."
            raise PipelineError(msg)
        start = int(hits[0])
    chosen = [start]
    nearest = cdist(X, X[[start]]).ravel()
    while len(chosen) < k:
        # argmax returns the first (lowest id) maximum
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, cdist(X, X[[nxt]]).ravel())
    return X[chosen].copy()


def _class_seeds(group: Dataset, k: int) -> np.ndarray:
    group = group.sort_by_id()
    labels = group.labels
    classes = sorted({label for label in labels if label is not None})
    if len(classes) != k:
        msg = f"Class-seeded initialization needs k equal to the number of classes ({len(classes)}), got k={k}."
        raise PipelineError(msg)
    X = np.asarray(group.X, dtype=np.float64)
    return np.vstack([_ordered_mean(X[labels == c]) for c in classes])


def _initial_means(group: Dataset, X: np.ndarray, ids: np.ndarray, k: int, init: InitStrategy) -> np.ndarray:
    match init:
        case FixedInit(means=means):
            if means.shape != (k, X.shape[1]):
                msg = f"Fixed initial means have shape {means.shape}, expected {(k, X.shape[1])}."
                raise PipelineError(msg)
            return np.array(means)
        case ClassSeededInit():
            return _class_seeds(group, k)
        case FarthestFirstInit(start_id=start_id):
            return _farthest_first(X, ids, k, start_id)
        case _:
            msg = f"Unknown initialization {init!r}."
            raise TypeError(msg)


def _ordered_mean(rows: np.ndarray) -> np.ndarray:
    total = np.zeros(rows.shape[1])
    for row in rows:
        total += row
    return total / len(rows)


def _assign(X: np.ndarray, means: np.ndarray) -> np.ndarray:
    # first minimum wins, i.e. the lowest cluster index
    return np.argmin(cdist(X, means), axis=1)


def _repair_empty(X: np.ndarray, means: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    labels = labels.copy()
    for c in range(k):
        if (labels == c).any():
            continue
        sizes = np.bincount(labels, minlength=k)
        movable = sizes[labels] > 1
        dist = np.linalg.norm(X - means[labels], axis=1)
        dist[~movable] = -np.inf
        i = int(np.argmax(dist))
        logger.debug(f"cluster {c + 1} is empty, moving record at position {i} into it")
        labels[i] = c
    return labels


def _wcss(X: np.ndarray, means: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum((X - means[labels]) ** 2))


def kmeans(
    group: Dataset,
    k: int,
    init: InitStrategy | None = None,
    max_iter: int | None = None,
) -> ClusterModel:
    """\
    Cluster complete records with Lloyd's algorithm.

    Records are assigned to the nearest mean (ties to the lowest cluster index),
    then means are recomputed, until the assignment no longer changes.
    A cluster that runs empty receives the record farthest from its current
    mean among clusters with more than one member.

    Parameters
    ----------
    group
        Complete, encoded records (G₁).
    k
        Number of clusters, at most the number of records.
    init
        Initialization, :class:`FarthestFirstInit` from the lowest id by default.
    max_iter
        Cap on mean updates, defaults to `settings.max_iter`.
        Reaching it emits a :class:`~cbcimpute.ConvergenceWarning`.

    Returns
    -------
    The fitted :class:`ClusterModel`.
    """
    if k < 1:
        msg = f"k must be positive, got {k}."
        raise ValueError(msg)
    X, ids = _complete_matrix(group)
    if len(X) < k:
        msg = f"Cannot form {k} clusters from {len(X)} complete records."
        raise PipelineError(msg)
    init = FarthestFirstInit() if init is None else init
    max_iter = settings.max_iter if max_iter is None else max_iter

    means = _initial_means(group, X, ids, k, init)
    labels = _assign(X, means)
    history: list[float] = []
    n_iter, converged = 0, False
    while True:
        labels = _repair_empty(X, means, labels, k)
        means = np.vstack([_ordered_mean(X[labels == c]) for c in range(k)])
        n_iter += 1
        history.append(_wcss(X, means, labels))
        new_labels = _assign(X, means)
        # empty clusters are repaired before comparing
        if np.array_equal(_repair_empty(X, means, new_labels, k), labels):
            converged = True
            break
        if n_iter >= max_iter:
            break
        labels = new_labels

    if converged:
        logger.info(f"k-means with k={k} ({init}) converged after {n_iter} iteration(s)")
    else:
        warnings.warn(
            f"k-means stopped at max_iter={max_iter} before the assignment settled.",
            ConvergenceWarning,
            stacklevel=2,
        )
    return ClusterModel(
        k=k,
        means=means,
        record_ids=ids,
        labels=labels + 1,
        n_iter=n_iter,
        converged=converged,
        wcss_history=tuple(history),
    )


def cluster_means(model: ClusterModel, group: Dataset) -> np.ndarray:
    """\
    Per-attribute mean of every cluster's members, summed in ascending id order.

    Returns a `k × n` array.
    """
    X, ids = _complete_matrix(group)
    rows: list[np.ndarray] = []
    for c, members in enumerate(model.members, start=1):
        if not members:
            msg = f"Cluster {c} has no members."
            raise PipelineError(msg)
        rows.append(_ordered_mean(X[np.isin(ids, members)]))
    return np.vstack(rows)


def parse_init(text: str, means: Sequence[Sequence[float]] | np.ndarray | None = None) -> InitStrategy:
    """\
    Parse `fixed`, `class_seeded`, `farthest_first` or `farthest_first:<id>`.

    >>> parse_init("farthest_first:3")
    FarthestFirstInit(start_id=3)
    """
    name, _, arg = text.partition(":")
    match name.replace("-", "_"):
        case "fixed":
            if means is None:
                msg = "The fixed initialization needs initial means."
                raise ValueError(msg)
            return FixedInit(np.asarray(means))
        case "class_seeded":
            return ClassSeededInit()
        case "farthest_first":
            return FarthestFirstInit(int(arg) if arg else None)
    msg = f"Unknown initialization {text!r}."
    raise ValueError(msg)
