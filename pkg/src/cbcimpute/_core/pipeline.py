"""\
End-to-end runs: split → cluster → map → match → fill → predict.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np

from .._settings import settings
from .._warnings import NeighborCountWarning, UnlabeledRecordWarning
from ..logging import get_logger
from .clustering import FarthestFirstInit, FixedInit, infer_k, kmeans
from .dataset import RecordMatrix, split_groups
from .encoding import encode, minmax_scale
from .errors import PipelineError, RecordImputationError
from .imputation import CopyDonor, DonorPool, fill_record, match_nearest, predict_class
from .mapping import MappingConfig, Type2Mode, map_complete, map_missing

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable

    from .clustering import ClusterModel, InitStrategy
    from .dataset import Dataset, EncodedRecord, GroupSplit
    from .imputation import DonorMatch, FillStrategy
    from .mapping import MappingEntry

logger = get_logger(__name__)


@dataclass(frozen=True)
class ImputeConfig:
    """\
    Settings of an imputation or classification run.

    `None` for `k` infers it from the labels of the complete records and
    `None` for `neighbor_count` uses `k`.
    """

    k: int | None = None
    init: InitStrategy | None = None
    max_iter: int | None = None
    neighbor_count: int | None = None
    fill: FillStrategy = field(default_factory=CopyDonor)
    class_top_k: int = 1
    scale: bool = False
    type2_mode: Type2Mode = Type2Mode.MASKED
    assign_labels: bool = False

    def __post_init__(self):
        for name in ("k", "max_iter", "neighbor_count"):
            if (v := getattr(self, name)) is not None and v < 1:
                msg = f"{name} must be positive, got {v}."
                raise ValueError(msg)
        if self.class_top_k < 1:
            msg = f"class_top_k must be positive, got {self.class_top_k}."
            raise ValueError(msg)
        object.__setattr__(self, "type2_mode", Type2Mode(self.type2_mode))


class FilledCell(NamedTuple):
    column: str
    encoded: float
    decoded: str | float


class RecordFailure(NamedTuple):
    record_id: int
    name: str
    message: str


@dataclass(frozen=True)
class TargetReport:
    """What happened to one target record."""

    target_id: int
    name: str
    entry: MappingEntry
    match: DonorMatch
    filled: tuple[FilledCell, ...]
    predicted_class: str | None
    label_assigned: bool = False


@dataclass(frozen=True, eq=False)
class PipelineState:
    """\
    Everything derived from the complete records, shared by all targets.

    `dataset` is the working (encoded and possibly scaled) dataset.
    """

    dataset: Dataset
    split: GroupSplit
    model: ClusterModel
    mapping_config: MappingConfig
    g1: RecordMatrix
    g1_entries: dict[int, MappingEntry]
    type2_override: dict[int, float]
    max_iter: int

    @property
    def k(self) -> int:
        return self.model.k

    @property
    def neighbor_count(self) -> int:
        return self.mapping_config.neighbor_count

    def pool(self, *, labeled_only: bool = False) -> DonorPool:
        pool = DonorPool.from_entries(self.g1_entries.values())
        if not labeled_only:
            return pool
        keep = np.array([self.g1.label(int(i)) is not None for i in pool.donor_ids], dtype=bool)
        return DonorPool(pool.donor_ids[keep], pool.totals[keep])

    def map_target(self, record: EncodedRecord) -> MappingEntry:
        if record.is_complete:
            return self.g1_entries[record.id]
        return map_missing(
            record,
            self.model,
            self.g1,
            self.mapping_config,
            cluster_sum=self.type2_override.get(record.id),
        )


@dataclass(frozen=True)
class ImputationReport:
    """\
    Outcome of :func:`impute_dataset` or :func:`classify_dataset`.

    `targets` and `failures` are in ascending record id order;
    `config` echoes every resolved setting.
    """

    config: dict[str, Any]
    targets: tuple[TargetReport, ...] = ()
    failures: tuple[RecordFailure, ...] = ()
    warnings: tuple[str, ...] = ()
    state: PipelineState | None = field(default=None, repr=False)

    @property
    def n_filled(self) -> int:
        return sum(len(t.filled) for t in self.targets)

    def target(self, record_id: int) -> TargetReport:
        for t in self.targets:
            if t.target_id == record_id:
                return t
        msg = f"Record {record_id} is not a target of this run."
        raise KeyError(msg)


def _echo(config: ImputeConfig, state: PipelineState | None) -> dict[str, Any]:
    init = FarthestFirstInit() if config.init is None else config.init
    return {
        "k": "auto" if state is None else state.k,
        "init": str(init),
        "max_iter": settings.max_iter if state is None else state.max_iter,
        "neighbor_count": "auto" if state is None else state.neighbor_count,
        "fill": str(config.fill),
        "class_top_k": config.class_top_k,
        "scale": config.scale,
        "type2_mode": str(config.type2_mode),
        "assign_labels": config.assign_labels,
    }


def _scaled_init(init: InitStrategy | None, dataset: Dataset) -> InitStrategy | None:
    if isinstance(init, FixedInit) and dataset.scaling is not None:
        return FixedInit(dataset.scaling.transform(init.means))
    return init


def _aligned_type1(split: GroupSplit, g1_entries: dict[int, MappingEntry]) -> dict[int, float]:
    g2_ids = np.sort(split.incomplete.record_ids)
    g1_ids = sorted(g1_entries)
    if len(g2_ids) > len(g1_ids):
        msg = (
            f"The aligned-type1 mode needs at least as many complete records ({len(g1_ids)}) "
            f"as incomplete ones ({len(g2_ids)})."
        )
        raise PipelineError(msg)
    return {
        int(target): g1_entries[source].cluster_sum
        for target, source in zip(g2_ids, g1_ids)
    }


def fit_pipeline(dataset: Dataset, config: ImputeConfig | None = None) -> PipelineState:
    """\
    Encode, optionally scale, split, cluster and map the complete records.

    Raises
    ------
    PipelineError
        No complete records, `k` cannot be inferred or exceeds their count.
    """
    config = ImputeConfig() if config is None else config
    work = encode(dataset)
    if config.scale:
        work = minmax_scale(work)
    split = split_groups(work)
    if split.z == 0:
        msg = "The dataset has no complete records to cluster and match against."
        raise PipelineError(msg)
    k = infer_k(split.complete) if config.k is None else config.k
    logger.info(f"using k={k}" + (" (inferred from class labels)" if config.k is None else ""))
    max_iter = settings.max_iter if config.max_iter is None else config.max_iter
    model = kmeans(split.complete, k, _scaled_init(config.init, work), max_iter)
    mapping_config = MappingConfig(k if config.neighbor_count is None else config.neighbor_count)

    g1 = RecordMatrix.from_dataset(split.complete)
    g1_entries = {
        record.id: map_complete(record, model, g1, mapping_config)
        for record in split.complete.sort_by_id().records()
    }
    if clamped := [i for i, e in g1_entries.items() if e.clamped]:
        warnings.warn(
            f"{len(clamped)} complete record(s) have fewer than "
            f"{mapping_config.neighbor_count} neighbors in their cluster: {clamped}.",
            NeighborCountWarning,
            stacklevel=2,
        )
    if mapping_config.neighbor_count > split.z and split.h:
        warnings.warn(
            f"Only {split.z} complete records are available as neighbors, "
            f"{mapping_config.neighbor_count} were requested.",
            NeighborCountWarning,
            stacklevel=2,
        )
    override = (
        _aligned_type1(split, g1_entries)
        if config.type2_mode is Type2Mode.ALIGNED_TYPE1
        else {}
    )
    return PipelineState(
        dataset=work,
        split=split,
        model=model,
        mapping_config=mapping_config,
        g1=g1,
        g1_entries=g1_entries,
        type2_override=override,
        max_iter=max_iter,
    )


def _process(
    state: PipelineState,
    record: EncodedRecord,
    pool: DonorPool,
    config: ImputeConfig,
    *,
    require_class: bool,
) -> tuple[EncodedRecord, TargetReport]:
    if record.n_missing == len(record.values):
        msg = f"Record {record.name} has no present cells."
        raise RecordImputationError(record.id, msg)
    try:
        entry = state.map_target(record)
        match = match_nearest(entry, pool.without(record.id))
        filled = record if record.is_complete else fill_record(record, match, state.g1, config.fill)
        try:
            predicted = predict_class(match, state.g1, config.class_top_k)
        except PipelineError:
            if require_class:
                raise
            predicted = None
    except PipelineError as e:
        raise RecordImputationError(record.id, str(e)) from e
    logger.debug(f"record {record.name}: donor {match.chosen.donor_id}, class {predicted}")
    return filled, TargetReport(
        target_id=record.id,
        name=record.name,
        entry=entry,
        match=match,
        filled=(),
        predicted_class=predicted,
    )


def _finish(
    encoded: Dataset,
    state: PipelineState,
    results: Iterable[tuple[EncodedRecord, TargetReport]],
    *,
    assign_labels: bool,
) -> tuple[Dataset, list[TargetReport]]:
    X = np.array(encoded.X)
    labels = list(encoded.labels)
    scaling = state.dataset.scaling
    schema = encoded.schema
    reports = []
    for filled, report in results:
        i = encoded.position(report.target_id)
        missing = np.flatnonzero(np.isnan(X[i]))
        values = np.array(filled.values)
        if scaling is not None:
            values = scaling.inverse(values)
            values[schema.categorical_mask] = np.rint(values[schema.categorical_mask])
        cells = []
        for j in missing:
            X[i, j] = values[j]
            attr = schema.attributes[j]
            cells.append(FilledCell(attr.name, float(values[j]), attr.decode(float(values[j]))))
        assigned = assign_labels and labels[i] is None and report.predicted_class is not None
        if assigned:
            labels[i] = report.predicted_class
        reports.append(replace(report, filled=tuple(cells), label_assigned=assigned))
    return encoded.with_values(X).with_labels(labels), reports


def _run(
    dataset: Dataset,
    config: ImputeConfig,
    select: Callable[[EncodedRecord], bool],
    *,
    labeled_pool: bool,
    assign_labels: bool,
) -> tuple[Dataset, ImputationReport]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        encoded = encode(dataset)
        state = fit_pipeline(encoded, config)
        pool = state.pool(labeled_only=labeled_pool)
        results, failures = [], []
        for record in state.dataset.sort_by_id().records():
            if not select(record):
                continue
            try:
                results.append(_process(state, record, pool, config, require_class=labeled_pool))
            except RecordImputationError as e:
                logger.warning(f"record {record.name}: {e}")
                failures.append(RecordFailure(record.id, record.name, str(e)))
        out, targets = _finish(encoded, state, results, assign_labels=assign_labels)
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    report = ImputationReport(
        config=_echo(config, state),
        targets=tuple(targets),
        failures=tuple(failures),
        warnings=tuple(str(w.message) for w in caught),
        state=state,
    )
    return out, report


def impute_dataset(
    dataset: Dataset, config: ImputeConfig | None = None
) -> tuple[Dataset, ImputationReport]:
    """\
    Fill every missing cell of every incomplete record.

    Each incomplete record is matched against the original complete records
    only, never against freshly imputed ones. Records that cannot be
    processed (e.g. without any present cell) are listed in
    :attr:`ImputationReport.failures` and stay incomplete; the others are
    processed normally.

    Parameters
    ----------
    dataset
        Raw or encoded dataset.
    config
        Run settings, see :class:`ImputeConfig`.

    Returns
    -------
    The imputed encoded dataset (in original units, unscaled) and the report.
    """
    config = ImputeConfig() if config is None else config
    encoded = encode(dataset)
    if not encoded.missing_mask.any():
        logger.info("no missing cells, nothing to impute")
        return encoded, ImputationReport(config=_echo(config, None))
    return _run(
        encoded,
        config,
        lambda record: not record.is_complete,
        labeled_pool=False,
        assign_labels=config.assign_labels,
    )


def classify_dataset(
    dataset: Dataset, config: ImputeConfig | None = None
) -> tuple[Dataset, ImputationReport]:
    """\
    Predict class labels for every unlabeled record.

    Complete records are matched on their own mapping distance, incomplete
    records are mapped and filled as in :func:`impute_dataset`. Only labeled
    complete records serve as donors. Predicted labels are written to the
    returned dataset.
    """
    config = ImputeConfig() if config is None else config
    encoded = encode(dataset)
    if encoded.labeled.all():
        logger.info("all records are labeled, nothing to classify")
        return encoded, ImputationReport(config=_echo(replace(config, assign_labels=True), None))
    config = replace(config, assign_labels=True)
    if unlabeled := [
        int(i) for i, lab, miss in zip(encoded.record_ids, encoded.labels, encoded.missing_mask.any(axis=1))
        if lab is None and not miss
    ]:
        logger.info(f"{len(unlabeled)} unlabeled complete record(s) are matched but not used as donors")
    out, report = _run(
        encoded,
        config,
        lambda record: record.label is None,
        labeled_pool=True,
        assign_labels=True,
    )
    if unlabeled:
        msg = f"Unlabeled complete records {unlabeled} are excluded from the donor pool."
        warnings.warn(msg, UnlabeledRecordWarning, stacklevel=2)
        report = replace(report, warnings=(*report.warnings, msg))
    return out, report
