"""\
Mask-and-score evaluation: hide known cells, impute them, measure the error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import pandas as pd

from .._warnings import MaskShortfallWarning
from ..logging import get_logger
from .dataset import Dataset, RecordMatrix, _gen_obs, split_groups
from .encoding import encode
from .errors import PipelineError, RecordImputationError
from .imputation import _mode_by_level, _mode_by_rank, _ordered_mean
from .mapping import cross_group_neighbors
from .pipeline import ImputeConfig, impute_dataset
from .schema import AttributeDescriptor, Schema

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence
    from typing import Any

logger = get_logger(__name__)

GENERATOR = "PCG64"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class MaskSpec:
    """\
    Which cells to hide.

    Parameters
    ----------
    fraction
        Share of eligible present cells to hide, strictly between 0 and 1.
    seed
        Seed of the `PCG64` generator.
    eligible_columns
        Attribute names that may be masked, all attributes if `None`.
    max_per_record
        Cap on masked cells per record, `n − 1` if `None`. A record always
        keeps at least one present cell.
    hide_labels
        Also hide the labels of records that received a masked cell.
    """

    fraction: float
    seed: int = 0
    eligible_columns: tuple[str, ...] | None = None
    max_per_record: int | None = None
    hide_labels: bool = False

    def __post_init__(self):
        if not 0 < self.fraction < 1:
            msg = f"fraction must be strictly between 0 and 1, got {self.fraction}."
            raise ValueError(msg)
        if self.max_per_record is not None and self.max_per_record < 1:
            msg = f"max_per_record must be positive, got {self.max_per_record}."
            raise ValueError(msg)
        if self.eligible_columns is not None:
            object.__setattr__(self, "eligible_columns", tuple(self.eligible_columns))


@dataclass(frozen=True)
class GroundTruth:
    """\
    Hidden values keyed by `(record_id, column)`, in encoded units.

    `labels` holds hidden class labels by record id.
    """

    cells: dict[tuple[int, str], float]
    labels: dict[int, str | None] = field(default_factory=dict)
    requested: int = 0
    shortfall: int = 0
    seed: int = 0
    generator: str = GENERATOR

    @property
    def n_masked(self) -> int:
        return len(self.cells)


def mask_dataset(dataset: Dataset, spec: MaskSpec) -> tuple[Dataset, GroundTruth]:
    """\
    Hide `round(fraction × eligible)` present cells (half rounds up).

    Cells are drawn from the seeded generator in ascending (record id, column)
    order, so the same `spec` on the same records gives the same mask whatever
    the record order. Cells already missing are never selected.
    """
    dataset = encode(dataset)
    schema = dataset.schema
    columns = schema.names if spec.eligible_columns is None else list(spec.eligible_columns)
    if not columns:
        msg = "No eligible columns to mask."
        raise ValueError(msg)
    col_idx = np.array([schema.index(c) for c in columns], dtype=np.intp)
    col_idx.sort()

    ordered = dataset.sort_by_id()
    present = ~ordered.missing_mask
    rows, cols = np.nonzero(present[:, col_idx])
    cols = col_idx[cols]
    if len(rows) == 0:
        msg = "No present cells in the eligible columns."
        raise ValueError(msg)
    requested = int(math.floor(spec.fraction * len(rows) + 0.5))
    cap = schema.n_attributes - 1 if spec.max_per_record is None else spec.max_per_record

    masked_per_row = np.zeros(ordered.n_obs, dtype=np.int64)
    present_per_row = present.sum(axis=1)
    chosen: list[tuple[int, int]] = []
    for pick in _rng(spec.seed).permutation(len(rows)):
        if len(chosen) == requested:
            break
        i, j = int(rows[pick]), int(cols[pick])
        if masked_per_row[i] >= cap or present_per_row[i] - masked_per_row[i] <= 1:
            continue
        masked_per_row[i] += 1
        chosen.append((i, j))
    chosen.sort()

    X = np.array(ordered.X)
    cells: dict[tuple[int, str], float] = {}
    for i, j in chosen:
        cells[(int(ordered.record_ids[i]), schema.names[j])] = float(X[i, j])
        X[i, j] = np.nan
    labels = list(ordered.labels)
    hidden: dict[int, str | None] = {}
    if spec.hide_labels:
        for i in np.flatnonzero(masked_per_row):
            hidden[int(ordered.record_ids[i])] = labels[i]
            labels[i] = None
    masked = ordered.with_values(X).with_labels(labels)
    # back to the caller's record order
    masked = masked[[masked.position(int(i)) for i in dataset.record_ids]]

    shortfall = requested - len(chosen)
    if shortfall:
        warnings.warn(
            f"Masked {len(chosen)} of {requested} requested cells; "
            f"max_per_record={cap} left no room for the rest.",
            MaskShortfallWarning,
            stacklevel=2,
        )
    logger.info(f"masked {len(chosen)} cells with {GENERATOR}(seed={spec.seed})")
    truth = GroundTruth(
        cells=cells,
        labels=hidden,
        requested=requested,
        shortfall=shortfall,
        seed=spec.seed,
    )
    return masked, truth


class ColumnError(NamedTuple):
    n: int
    rmse: float
    mae: float


@dataclass(frozen=True)
class Metrics:
    """\
    Reconstruction quality in encoded units.

    Scores without any cell (or label) to measure are `None`.
    """

    numeric_rmse: float | None
    numeric_mae: float | None
    per_column: dict[str, ColumnError]
    categorical_accuracy: float | None
    class_accuracy: float | None
    n_numeric: int
    n_categorical: int
    n_labels: int

    def as_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "numeric_rmse": self.numeric_rmse,
            "numeric_mae": self.numeric_mae,
            "categorical_accuracy": self.categorical_accuracy,
            "class_accuracy": self.class_accuracy,
            "n_numeric": self.n_numeric,
            "n_categorical": self.n_categorical,
            "n_labels": self.n_labels,
        }
        for name, err in self.per_column.items():
            d[f"rmse[{name}]"] = err.rmse
            d[f"mae[{name}]"] = err.mae
        return d


def _rmse_mae(errors: Sequence[float]) -> tuple[float | None, float | None]:
    if not errors:
        return None, None
    e = np.asarray(errors, dtype=np.float64)
    return float(np.sqrt(np.mean(e**2))), float(np.mean(np.abs(e)))


def _imputed_cell(imputed: Dataset, record_id: int, column: str) -> float:
    try:
        v = float(imputed.X[imputed.position(record_id), imputed.schema.index(column)])
    except KeyError as e:
        e.add_note(f"while scoring cell ({record_id}, {column!r})")
        raise
    if np.isnan(v):
        msg = f"Cell ({record_id}, {column!r}) was not imputed."
        raise PipelineError(msg)
    return v


def score_imputation(imputed: Dataset, truth: GroundTruth) -> Metrics:
    """\
    Compare imputed cells and labels with the hidden values.

    Numeric cells give RMSE and MAE, categorical cells the share restored
    exactly, hidden labels the share predicted correctly.
    """
    imputed = encode(imputed)
    schema = imputed.schema
    numeric: dict[str, list[float]] = {}
    hits: list[bool] = []
    for (record_id, column), value in sorted(truth.cells.items()):
        got = _imputed_cell(imputed, record_id, column)
        if schema[column].is_categorical:
            hits.append(bool(np.rint(got) == value))
        else:
            numeric.setdefault(column, []).append(got - value)
    per_column = {
        name: ColumnError(len(numeric[name]), *_rmse_mae(numeric[name]))
        for name in schema.names
        if name in numeric
    }
    rmse, mae = _rmse_mae([e for name in per_column for e in numeric[name]])
    labels = [
        imputed.labels[imputed.position(record_id)] == label
        for record_id, label in sorted(truth.labels.items())
        if label is not None
    ]
    return Metrics(
        numeric_rmse=rmse,
        numeric_mae=mae,
        per_column=per_column,
        categorical_accuracy=float(np.mean(hits)) if hits else None,
        class_accuracy=float(np.mean(labels)) if labels else None,
        n_numeric=sum(len(v) for v in numeric.values()),
        n_categorical=len(hits),
        n_labels=len(labels),
    )


def cell_errors(imputed: Dataset, truth: GroundTruth) -> pd.DataFrame:
    """One row per hidden cell: record, column, truth, imputed value and absolute error."""
    imputed = encode(imputed)
    rows = []
    for (record_id, column), value in sorted(truth.cells.items()):
        got = _imputed_cell(imputed, record_id, column)
        attr = imputed.schema[column]
        rows.append(
            {
                "record": imputed.name_of(record_id),
                "column": column,
                "truth": attr.decode(value),
                "imputed": attr.decode(got),
                "abs_error": abs(got - value),
            }
        )
    return pd.DataFrame(rows, columns=["record", "column", "truth", "imputed", "abs_error"])


@dataclass(frozen=True)
class GlobalMeanMode:
    """Column mean (numeric) or mode (categorical) over the complete records."""

    def __str__(self) -> str:
        return "global_mean_mode"


@dataclass(frozen=True)
class RawKNN:
    """Mean or mode over the `k` complete records nearest by masked distance."""

    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            msg = f"k must be at least 1, got {self.k}."
            raise ValueError(msg)

    def __str__(self) -> str:
        return f"raw_knn:{self.k}"


BaselineKind = GlobalMeanMode | RawKNN


def _majority_label(labels: Iterable[str | None]) -> str | None:
    present = sorted(label for label in labels if label is not None)
    if not present:
        return None
    counts = pd.Series(present).value_counts(sort=False)
    return counts.index[int(np.argmax(counts.to_numpy()))]


def run_baseline(
    masked: Dataset, kind: BaselineKind, *, assign_labels: bool = False
) -> Dataset:
    """\
    Fill missing cells with a reference method.

    Parameters
    ----------
    masked
        Dataset with missing cells.
    kind
        :class:`GlobalMeanMode` or :class:`RawKNN`.
    assign_labels
        Also give unlabeled incomplete records the majority label of the
        complete records (:class:`GlobalMeanMode`) or of the `k` neighbors
        (:class:`RawKNN`).
    """
    masked = encode(masked)
    split = split_groups(masked)
    if split.z == 0:
        msg = "The dataset has no complete records."
        raise PipelineError(msg)
    g1 = RecordMatrix.from_dataset(split.complete)
    categorical = masked.schema.categorical_mask
    X = np.array(masked.X)
    labels = list(masked.labels)

    match kind:
        case GlobalMeanMode():
            fills = np.array([
                _mode_by_level(g1.X[:, j]) if categorical[j] else _ordered_mean(g1.X[:, j])
                for j in range(masked.n_vars)
            ])
            majority = _majority_label(g1.labels)
        case RawKNN():
            pass
        case _:
            msg = f"Unknown baseline {kind!r}."
            raise TypeError(msg)

    for i in np.flatnonzero(np.isnan(X).any(axis=1)):
        missing = np.isnan(X[i])
        if isinstance(kind, RawKNN):
            try:
                neighbors = cross_group_neighbors(X[i], g1, kind.k)
            except PipelineError as e:
                raise RecordImputationError(int(masked.record_ids[i]), str(e)) from e
            ids = np.array([n.record_id for n in neighbors])
            rows = g1.X[np.searchsorted(g1.record_ids, ids)]
            fills = np.array([
                _mode_by_rank(rows[:, j]) if categorical[j] else _ordered_mean(rows[:, j])
                for j in range(masked.n_vars)
            ])
            majority = _majority_by_rank(g1.labels[np.searchsorted(g1.record_ids, ids)])
        X[i, missing] = fills[missing]
        if assign_labels and labels[i] is None:
            labels[i] = majority
    return masked.with_values(X).with_labels(labels)


def _majority_by_rank(labels: np.ndarray) -> str | None:
    present = np.array([label for label in labels if label is not None], dtype=object)
    return None if len(present) == 0 else _mode_by_rank(present)


def parse_method(text: str) -> str | BaselineKind:
    """\
    Parse `cbci`, `global_mean_mode` or `raw_knn[:<k>]`.

    >>> parse_method("raw_knn:3")
    RawKNN(k=3)
    """
    name, _, arg = text.strip().partition(":")
    match name.replace("-", "_"):
        case "cbci":
            return "cbci"
        case "global_mean_mode":
            return GlobalMeanMode()
        case "raw_knn":
            return RawKNN(int(arg) if arg else 1)
    msg = f"Unknown method {text!r}."
    raise ValueError(msg)


@dataclass(frozen=True)
class MethodResult:
    method: str
    imputed: Dataset
    metrics: Metrics
    errors: pd.DataFrame


@dataclass(frozen=True)
class EvaluationResult:
    """One shared mask and the score of every method on it."""

    spec: MaskSpec
    masked: Dataset
    truth: GroundTruth
    results: dict[str, MethodResult]


def evaluate_methods(
    dataset: Dataset,
    spec: MaskSpec,
    methods: Sequence[str | BaselineKind] = ("cbci", GlobalMeanMode()),
    config: ImputeConfig | None = None,
) -> EvaluationResult:
    """\
    Mask `dataset` once, run every method on the same mask and score each.

    `cbci` runs :func:`~cbcimpute.impute_dataset` with `config`; the other
    methods are baselines (see :func:`run_baseline`).
    """
    config = ImputeConfig() if config is None else config
    masked, truth = mask_dataset(dataset, spec)
    results: dict[str, MethodResult] = {}
    for method in methods:
        if isinstance(method, str):
            method = parse_method(method)
        name = str(method)
        if name in results:
            continue
        if method == "cbci":
            imputed, report = impute_dataset(masked, replace(config, assign_labels=spec.hide_labels))
            if report.failures:
                msg = f"{len(report.failures)} record(s) could not be imputed, e.g. {report.failures[0].message}"
                raise PipelineError(msg)
        else:
            imputed = run_baseline(masked, method, assign_labels=spec.hide_labels)
        metrics = score_imputation(imputed, truth)
        logger.info(f"{name}: rmse={metrics.numeric_rmse}, categorical accuracy={metrics.categorical_accuracy}")
        results[name] = MethodResult(name, imputed, metrics, cell_errors(imputed, truth))
    return EvaluationResult(spec, masked, truth, results)


def make_synthetic(
    n_obs: int,
    n_vars: int,
    n_classes: int = 2,
    *,
    seed: int = 0,
    n_categorical: int = 0,
    n_levels: int = 3,
) -> Dataset:
    """\
    Labeled, complete, mixed-type dataset drawn around class-specific centres.

    The last `n_categorical` attributes are categorical with levels
    `L1..L<n_levels>`; numeric values are rounded to 3 decimals.

    >>> make_synthetic(6, 3, 2, seed=1, n_categorical=1)
    Dataset object with n_obs × n_vars = 6 × 3
        obs: 'record_id', 'label'
        var: 'A1', 'A2', 'A3'
    """
    if n_obs < 1 or n_vars < 1 or n_classes < 1:
        msg = "n_obs, n_vars and n_classes must be positive."
        raise ValueError(msg)
    if not 0 <= n_categorical <= n_vars:
        msg = f"n_categorical must be between 0 and {n_vars}, got {n_categorical}."
        raise ValueError(msg)
    rng = _rng(seed)
    centres = rng.normal(0.0, 3.0, size=(n_classes, n_vars))
    classes = rng.integers(n_classes, size=n_obs)
    X = np.round(centres[classes] + rng.normal(size=(n_obs, n_vars)), 3)
    first_cat = n_vars - n_categorical
    X[:, first_cat:] = np.floor(X[:, first_cat:]) % n_levels + 1
    levels = tuple(f"L{i}" for i in range(1, n_levels + 1))
    schema = Schema(
        [
            AttributeDescriptor(f"A{j + 1}", "categorical", levels)
            if j >= first_cat
            else AttributeDescriptor(f"A{j + 1}")
            for j in range(n_vars)
        ],
        class_attribute="class",
    )
    obs = _gen_obs(n_obs, labels=[f"C{c + 1}" for c in classes])
    return Dataset(X, schema=schema, obs=obs, encoded=True)


def summarize(result: EvaluationResult) -> Mapping[str, Any]:
    """Key/value summary of the mask shared by all methods."""
    return {
        "generator": result.truth.generator,
        "seed": result.truth.seed,
        "fraction": result.spec.fraction,
        "max_per_record": (
            result.masked.n_vars - 1 if result.spec.max_per_record is None else result.spec.max_per_record
        ),
        "hide_labels": result.spec.hide_labels,
        "requested_cells": result.truth.requested,
        "masked_cells": result.truth.n_masked,
        "shortfall": result.truth.shortfall,
        "hidden_labels": sum(label is not None for label in result.truth.labels.values()),
    }
