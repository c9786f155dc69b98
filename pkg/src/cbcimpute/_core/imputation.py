"""\
Donor matching on mapping distances, cell filling and class prediction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .dataset import as_matrix
from .errors import PipelineError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .dataset import EncodedRecord, RecordMatrix
    from .mapping import Group, MappingEntry


class DonorRank(NamedTuple):
    donor_id: int
    difference: float


@dataclass(frozen=True)
class CopyDonor:
    """Copy the chosen donor's cells."""

    def __str__(self) -> str:
        return "copy_donor"


@dataclass(frozen=True)
class TopK:
    """Numeric cells take the mean of the `k` best donors, categorical cells their mode."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            msg = f"top_k must be at least 1, got {self.k}."
            raise ValueError(msg)

    def __str__(self) -> str:
        return f"top_k:{self.k}"


@dataclass(frozen=True)
class ClassMean:
    """Numeric cells take the mean of the chosen donor's class, categorical cells its mode."""

    def __str__(self) -> str:
        return "class_mean"


FillStrategy = CopyDonor | TopK | ClassMean


def parse_fill(text: str) -> FillStrategy:
    """\
    Parse `copy_donor`, `class_mean` or `top_k:<k>`.

    >>> parse_fill("top_k:3")
    TopK(k=3)
    """
    name, _, arg = text.partition(":")
    match name.replace("-", "_"):
        case "copy_donor":
            return CopyDonor()
        case "class_mean":
            return ClassMean()
        case "top_k":
            return TopK(int(arg) if arg else 1)
    msg = f"Unknown fill strategy {text!r}."
    raise ValueError(msg)


@dataclass(frozen=True, eq=False)
class DonorPool:
    """Mapping totals of the candidate donors, sorted by id."""

    donor_ids: np.ndarray
    totals: np.ndarray

    @classmethod
    def from_entries(cls, entries: Sequence[MappingEntry]) -> DonorPool:
        entries = sorted(entries, key=lambda e: e.record_id)
        return cls(
            np.array([e.record_id for e in entries], dtype=np.int64),
            np.array([e.total for e in entries], dtype=np.float64),
        )

    def __len__(self) -> int:
        return len(self.donor_ids)

    def without(self, record_id: int) -> DonorPool:
        keep = self.donor_ids != record_id
        return DonorPool(self.donor_ids[keep], self.totals[keep])


@dataclass(frozen=True, eq=False)
class DonorMatch:
    """\
    Every candidate donor ranked by `|Map(donor) − Map(target)|`.

    Ties are ordered by lowest donor id.
    """

    target_id: int
    donor_ids: np.ndarray
    differences: np.ndarray

    @cached_property
    def ranked_donors(self) -> list[DonorRank]:
        return [
            DonorRank(int(i), float(d))
            for i, d in zip(self.donor_ids, self.differences)
        ]

    @property
    def chosen(self) -> DonorRank:
        return DonorRank(int(self.donor_ids[0]), float(self.differences[0]))

    def top(self, k: int) -> np.ndarray:
        return self.donor_ids[:k]

    def __repr__(self) -> str:
        return f"DonorMatch(target_id={self.target_id}, chosen={self.chosen})"


def match_nearest(
    target: MappingEntry, g1_entries: Sequence[MappingEntry] | DonorPool
) -> DonorMatch:
    """\
    Rank complete records by the difference between their mapping distance
    and the target's.
    """
    pool = g1_entries if isinstance(g1_entries, DonorPool) else DonorPool.from_entries(g1_entries)
    if len(pool) == 0:
        msg = "No complete records to match against."
        raise PipelineError(msg)
    diff = np.abs(pool.totals - target.total)
    order = np.lexsort((pool.donor_ids, diff))
    return DonorMatch(target.record_id, pool.donor_ids[order], diff[order])


def _ordered_mean(values: np.ndarray) -> float:
    total = 0.0
    for v in values:
        total += float(v)
    return total / len(values)


def _mode_by_rank(values: np.ndarray) -> float:
    # values are in donor-rank order; a tie goes to the value seen first
    counts = Counter(values.tolist())
    best = max(counts.values())
    return next(v for v in values.tolist() if counts[v] == best)


def _mode_by_level(values: np.ndarray) -> float:
    counts = Counter(values.tolist())
    best = max(counts.values())
    return min(v for v, n in counts.items() if n == best)


def _donor_rows(group: RecordMatrix, donor_ids: np.ndarray) -> np.ndarray:
    return group.X[np.searchsorted(group.record_ids, donor_ids)]


def fill_record(
    target: EncodedRecord,
    match: DonorMatch,
    group: Group,
    strategy: FillStrategy | None = None,
) -> EncodedRecord:
    """\
    Replace every missing cell of `target`; present cells are left untouched.

    Parameters
    ----------
    target
        Incomplete record.
    match
        Ranked donors for `target`.
    group
        The complete records the donors come from.
    strategy
        :class:`CopyDonor` (default), :class:`TopK` or :class:`ClassMean`.
    """
    group = as_matrix(group)
    strategy = CopyDonor() if strategy is None else strategy
    values = np.array(target.values)
    missing = np.flatnonzero(np.isnan(values))
    match strategy:
        case CopyDonor():
            donors = _donor_rows(group, match.top(1))
            mode = _mode_by_rank
        case TopK(k=k):
            if k > len(group):
                msg = f"top_k={k} exceeds the {len(group)} complete records."
                raise PipelineError(msg)
            donors = _donor_rows(group, match.top(k))
            mode = _mode_by_rank
        case ClassMean():
            label = group.label(match.chosen.donor_id)
            if label is None:
                msg = f"Donor {match.chosen.donor_id} has no class label to take a class mean from."
                raise PipelineError(msg)
            donors = group.X[group.labels == label]
            mode = _mode_by_level
        case _:
            msg = f"Unknown fill strategy {strategy!r}."
            raise TypeError(msg)
    for j in missing:
        column = donors[:, j]
        values[j] = mode(column) if group.categorical[j] else _ordered_mean(column)
    return target.with_values(values)


def predict_class(match: DonorMatch, group: Group, top_k: int = 1) -> str:
    """\
    Class label of the best donor, or the majority label of the `top_k` best.

    Unlabeled donors do not vote. When several classes tie, the class whose
    best-ranked donor has the lowest id wins.
    """
    group = as_matrix(group)
    if top_k < 1:
        msg = f"top_k must be at least 1, got {top_k}."
        raise ValueError(msg)
    if top_k > len(group):
        msg = f"top_k={top_k} exceeds the {len(group)} complete records."
        raise PipelineError(msg)
    votes = [
        (int(i), label)
        for i in match.top(top_k)
        if (label := group.label(int(i))) is not None
    ]
    if not votes:
        msg = f"None of the {top_k} best donors of record {match.target_id} is labeled."
        raise PipelineError(msg)
    counts = Counter(label for _, label in votes)
    best = max(counts.values())
    tied = {label for label, n in counts.items() if n == best}
    best_donor = {}
    for donor_id, label in votes:
        if label in tied:
            best_donor.setdefault(label, donor_id)
    return min(tied, key=lambda label: best_donor[label])
