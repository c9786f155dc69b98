"""\
Distance kernels and the record → mapping distance reduction.

A complete record maps to the sum of its distances to all cluster means
(type-1) plus the distances to its nearest neighbors inside its own cluster.
An incomplete record maps to the same sum over its present cells (type-2)
plus the distances to its nearest complete records.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.spatial.distance import cdist, euclidean

from .dataset import as_matrix
from .errors import PipelineError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .clustering import ClusterModel
    from .dataset import Dataset, EncodedRecord, RecordMatrix

    Group = Dataset | RecordMatrix


class Type2Mode(StrEnum):
    """\
    How incomplete records get their cluster-distance sum.

    `MASKED` sums masked distances to every mean. `ALIGNED_TYPE1` gives the
    j-th incomplete record (ascending id) the type-1 sum of the j-th complete
    record, which regenerates the published case-study tables.
    """

    MASKED = "masked"
    ALIGNED_TYPE1 = "aligned-type1"


class Neighbor(NamedTuple):
    record_id: int
    distance: float


@dataclass(frozen=True)
class MappingConfig:
    """Number of nearest neighbors whose distances join the mapping distance."""

    neighbor_count: int

    def __post_init__(self):
        if self.neighbor_count < 1:
            msg = f"neighbor_count must be at least 1, got {self.neighbor_count}."
            raise ValueError(msg)


@dataclass(frozen=True)
class MappingEntry:
    """\
    The scalar representative of one record.

    `total` is `cluster_sum` plus the neighbor distances, added nearest first.
    """

    record_id: int
    cluster_distances: tuple[float, ...]
    cluster_sum: float
    neighbors: tuple[Neighbor, ...]
    total: float
    requested_neighbors: int

    @property
    def neighbor_distances(self) -> tuple[float, ...]:
        return tuple(n.distance for n in self.neighbors)

    @property
    def clamped(self) -> bool:
        """Fewer neighbors were available than requested."""
        return len(self.neighbors) < self.requested_neighbors


def _vector(a: Sequence[float] | np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=np.float64).reshape(-1)


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        msg = f"Value sequences differ in length: {len(a)} and {len(b)}."
        raise ValueError(msg)


def distance_full(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """\
    Euclidean distance between two complete value sequences.

    >>> distance_full([0, 0], [3, 4])
    5.0
    """
    a, b = _vector(a), _vector(b)
    _check_lengths(a, b)
    if np.isnan(a).any() or np.isnan(b).any():
        msg = "distance_full got a missing value, use distance_masked."
        raise ValueError(msg)
    return float(euclidean(a, b))


def distance_masked(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """\
    Euclidean distance over the positions where `a` is present.

    Skipped positions are not compensated for.

    >>> distance_masked([1, float("nan"), 4], [1, 100, 0])
    4.0
    """
    a, b = _vector(a), _vector(b)
    _check_lengths(a, b)
    present = ~np.isnan(a)
    if not present.any():
        msg = "All values are missing."
        raise PipelineError(msg)
    if np.isnan(b[present]).any():
        msg = "distance_masked needs the second sequence complete on the present positions of the first."
        raise ValueError(msg)
    return float(euclidean(a[present], b[present]))


def _ordered_sum(start: float, values: Sequence[float]) -> float:
    total = start
    for v in values:
        total += v
    return total


def cluster_distances(values: Sequence[float] | np.ndarray, means: np.ndarray) -> tuple[float, ...]:
    """Distance from a record to every mean, masked if the record has missing cells."""
    values = _vector(values)
    dist = distance_masked if np.isnan(values).any() else distance_full
    return tuple(dist(values, mean) for mean in np.asarray(means, dtype=np.float64))


def type1_sum(values: Sequence[float] | np.ndarray, means: np.ndarray) -> float:
    """Sum of distances from a complete record to all means, in cluster order."""
    values = _vector(values)
    return _ordered_sum(0.0, [distance_full(values, mean) for mean in np.asarray(means)])


def type2_sum(values: Sequence[float] | np.ndarray, means: np.ndarray) -> float:
    """Sum of masked distances from an incomplete record to all means, in cluster order."""
    values = _vector(values)
    return _ordered_sum(0.0, [distance_masked(values, mean) for mean in np.asarray(means)])


def _nearest(ids: np.ndarray, dist: np.ndarray, count: int) -> list[Neighbor]:
    order = np.lexsort((ids, dist))[:count]
    return [Neighbor(int(ids[i]), float(dist[i])) for i in order]


def intra_cluster_neighbors(
    record_id: int, model: ClusterModel, group: Group, count: int
) -> list[Neighbor]:
    """\
    The `count` nearest other members of the record's own cluster.

    Ascending by distance, ties by lowest id. Shorter when the cluster
    is too small; :attr:`MappingEntry.clamped` marks such records.
    """
    group = as_matrix(group)
    cluster = model.cluster_of(record_id)
    others = np.array([i for i in model.members[cluster - 1] if i != record_id], dtype=np.int64)
    if len(others) == 0:
        return []
    positions = np.searchsorted(group.record_ids, others)
    row = group.row(record_id)
    dist = cdist(row[None, :], group.X[positions]).ravel()
    return _nearest(others, dist, count)


def cross_group_neighbors(
    values: Sequence[float] | np.ndarray, group: Group, count: int
) -> list[Neighbor]:
    """\
    The `count` complete records nearest to an incomplete record by masked distance.

    Ascending by distance, ties by lowest id.
    """
    group = as_matrix(group)
    if len(group) == 0:
        msg = "No complete records to search for neighbors."
        raise PipelineError(msg)
    values = _vector(values)
    present = ~np.isnan(values)
    if not present.any():
        msg = "All values are missing."
        raise PipelineError(msg)
    dist = cdist(values[None, present], group.X[:, present]).ravel()
    return _nearest(group.record_ids, dist, count)


def _entry(
    record_id: int,
    distances: tuple[float, ...],
    cluster_sum: float,
    neighbors: list[Neighbor],
    requested: int,
) -> MappingEntry:
    return MappingEntry(
        record_id=record_id,
        cluster_distances=distances,
        cluster_sum=cluster_sum,
        neighbors=tuple(neighbors),
        total=_ordered_sum(cluster_sum, [n.distance for n in neighbors]),
        requested_neighbors=requested,
    )


def map_complete(
    record: EncodedRecord, model: ClusterModel, group: Group, config: MappingConfig
) -> MappingEntry:
    """Mapping distance of a complete record: type-1 sum plus intra-cluster neighbor distances."""
    if not record.is_complete:
        msg = f"Record {record.name} has missing cells, use map_missing."
        raise ValueError(msg)
    distances = tuple(distance_full(record.values, mean) for mean in model.means)
    neighbors = intra_cluster_neighbors(record.id, model, group, config.neighbor_count)
    return _entry(record.id, distances, _ordered_sum(0.0, distances), neighbors, config.neighbor_count)


def map_missing(
    record: EncodedRecord,
    model: ClusterModel,
    group: Group,
    config: MappingConfig,
    *,
    cluster_sum: float | None = None,
) -> MappingEntry:
    """\
    Mapping distance of an incomplete record: type-2 sum plus cross-group neighbor distances.

    Parameters
    ----------
    cluster_sum
        Replaces the type-2 sum, see :class:`Type2Mode`.
    """
    if record.n_missing == len(record.values):
        msg = f"Record {record.name} has no present cells."
        raise PipelineError(msg)
    distances = tuple(distance_masked(record.values, mean) for mean in model.means)
    if cluster_sum is None:
        cluster_sum = _ordered_sum(0.0, distances)
    neighbors = cross_group_neighbors(record.values, group, config.neighbor_count)
    return _entry(record.id, distances, cluster_sum, neighbors, config.neighbor_count)
