"""\
Main container class and the complete/incomplete group split.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import singledispatch
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from ..logging import get_logger
from .schema import Schema

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence
    from typing import Any

    from .encoding import ScalingParams

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class EncodedRecord:
    """\
    One record: `n` cells (`NaN` marks a missing cell) and an optional label.

    Records are identified by `id`, their 1-based input ordinal.
    """

    id: int
    values: np.ndarray
    label: str | None = None
    name: str | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            msg = f"Record {self.id} values must be one-dimensional, got shape {values.shape}."
            raise ValueError(msg)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        if self.name is None:
            object.__setattr__(self, "name", str(self.id))

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def n_missing(self) -> int:
        return int(self.missing.sum())

    @property
    def is_complete(self) -> bool:
        return self.n_missing == 0

    def with_values(self, values: np.ndarray) -> EncodedRecord:
        return replace(self, values=values)

    def __repr__(self) -> str:
        label = "ABSENT" if self.label is None else repr(self.label)
        return f"EncodedRecord({self.name}, values={self.values.tolist()}, label={label})"


def _gen_obs(
    n_obs: int,
    record_ids: Sequence[int] | None = None,
    labels: Sequence[str | None] | None = None,
    names: Sequence[str] | None = None,
) -> pd.DataFrame:
    ids = np.arange(1, n_obs + 1) if record_ids is None else np.asarray(record_ids)
    if labels is None:
        labels = [None] * n_obs
    if names is None:
        names = [str(i) for i in ids]
    if not len(ids) == len(labels) == len(names) == n_obs:
        msg = (
            f"Record annotations must have as many rows as `X` ({n_obs}), "
            f"got {len(ids)} ids, {len(labels)} labels and {len(names)} names."
        )
        raise ValueError(msg)
    obs = pd.DataFrame(
        {
            "record_id": pd.Series(ids, dtype=np.int64),
            "label": pd.Series(list(labels), dtype=object),
        }
    )
    obs.index = pd.Index([str(n) for n in names], dtype=object)
    return obs


class Dataset:
    """\
    A table of records described by a :class:`~cbcimpute.Schema`.

    :class:`~cbcimpute.Dataset` stores a data matrix :attr:`X`
    (records × attributes) together with per-record annotations :attr:`obs`
    (`record_id`, `label`) and per-attribute annotations :attr:`var`.

    A raw dataset (as read by :func:`~cbcimpute.io.load_csv`) holds level names
    and numbers in an object matrix with `None` for missing cells. An encoded
    dataset (see :func:`~cbcimpute.encode`) holds a read-only float matrix
    in which missing cells are `NaN`.

    Subsetting with `dataset[index]` selects records and returns a copy.

    Parameters
    ----------
    X
        A records × attributes matrix.
    schema
        Attribute descriptors matching the columns of `X`.
    obs
        Record annotations with columns `record_id` and `label`,
        indexed by record name. Defaults to ids `1..n_obs` without labels.
    encoded
        Whether `X` holds encoded values. Inferred from the dtype if `None`.
    scaling
        Min-max parameters if `X` has been scaled, see :func:`~cbcimpute.minmax_scale`.
    columns
        Column order of the source table, used when writing.
    """

    def __init__(
        self,
        X: np.ndarray | Sequence[Sequence[Any]],
        *,
        schema: Schema,
        obs: pd.DataFrame | None = None,
        encoded: bool | None = None,
        scaling: ScalingParams | None = None,
        columns: Sequence[str] | None = None,
    ):
        X = np.asarray(X)
        if X.size == 0 and X.ndim < 2:
            X = X.reshape(0, schema.n_attributes)
        if X.ndim != 2 or X.shape[1] != schema.n_attributes:
            msg = f"`X` must have shape (n_obs, {schema.n_attributes}), got {X.shape}."
            raise ValueError(msg)
        if encoded is None:
            encoded = X.dtype.kind in "fiu"
        if encoded:
            X = np.array(X, dtype=np.float64)
            X.flags.writeable = False
        else:
            X = np.array(X, dtype=object)
        self._X = X
        self._schema = schema
        self._obs = _gen_obs(X.shape[0]) if obs is None else obs.copy()
        if list(self._obs.columns) != ["record_id", "label"] or len(self._obs) != len(X):
            msg = "`obs` must have one row per record and columns ['record_id', 'label']."
            raise ValueError(msg)
        if not self._obs["record_id"].is_unique:
            msg = "Record ids are not unique."
            raise ValueError(msg)
        self._encoded = bool(encoded)
        self._scaling = scaling
        self._columns = list(schema.columns if columns is None else columns)

    def _gen_repr(self) -> str:
        kind = "Dataset" if self.is_encoded else "Raw dataset"
        descr = f"{kind} object with n_obs × n_vars = {self.n_obs} × {self.n_vars}"
        descr += f"\n    obs: {str(list(self.obs.columns))[1:-1]}"
        descr += f"\n    var: {str(list(self.var_names))[1:-1]}"
        if self.scaling is not None:
            descr += "\n    scaled: min-max"
        return descr

    def __repr__(self) -> str:
        return self._gen_repr()

    def __len__(self) -> int:
        return self.n_obs

    @property
    def X(self) -> np.ndarray:
        """Data matrix of shape :attr:`n_obs` × :attr:`n_vars`."""
        return self._X

    @property
    def schema(self) -> Schema:
        return self._schema

    @property
    def obs(self) -> pd.DataFrame:
        """One-dimensional annotation of records (`pd.DataFrame`)."""
        return self._obs

    @property
    def var(self) -> pd.DataFrame:
        """One-dimensional annotation of attributes (`pd.DataFrame`)."""
        return pd.DataFrame(
            {
                "kind": pd.Categorical(
                    [a.kind for a in self.schema.attributes],
                    categories=["numeric", "categorical"],
                ),
                "n_levels": [a.n_levels for a in self.schema.attributes],
                "levels": [a.levels for a in self.schema.attributes],
            },
            index=pd.Index(self.schema.names, dtype=object),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self._X.shape

    @property
    def n_obs(self) -> int:
        return self._X.shape[0]

    @property
    def n_vars(self) -> int:
        return self._X.shape[1]

    @property
    def obs_names(self) -> pd.Index:
        return self._obs.index

    @property
    def var_names(self) -> pd.Index:
        return pd.Index(self.schema.names, dtype=object)

    @property
    def record_ids(self) -> np.ndarray:
        return self._obs["record_id"].to_numpy()

    @property
    def labels(self) -> np.ndarray:
        """Class labels, `None` where absent."""
        return self._obs["label"].to_numpy(dtype=object)

    @property
    def labeled(self) -> np.ndarray:
        return np.array([label is not None for label in self.labels], dtype=bool)

    @property
    def is_encoded(self) -> bool:
        return self._encoded

    @property
    def scaling(self) -> ScalingParams | None:
        return self._scaling

    @property
    def columns(self) -> list[str]:
        return list(self._columns)

    @property
    def missing_mask(self) -> np.ndarray:
        """Boolean matrix, `True` where a cell is missing."""
        if self.is_encoded:
            return np.isnan(self._X)
        return pd.isna(pd.DataFrame(self._X)).to_numpy()

    def _normalize_index(self, index: Any) -> np.ndarray | slice:
        if isinstance(index, str):
            index = [index]
        if isinstance(index, slice):
            return index
        index = np.asarray(index)
        if index.dtype == bool:
            if index.shape != (self.n_obs,):
                msg = f"Boolean index of shape {index.shape} does not match {self.n_obs} records."
                raise IndexError(msg)
            return np.flatnonzero(index)
        if index.dtype.kind in "OU":
            positions = self.obs_names.get_indexer(index)
            if (positions < 0).any():
                missing = list(index[positions < 0])
                msg = f"Records {missing} not found."
                raise KeyError(msg)
            return positions
        return index.astype(np.intp).reshape(-1)

    def __getitem__(self, index: Any) -> Dataset:
        idx = self._normalize_index(index)
        return self._mutated_copy(X=self._X[idx], obs=self._obs.iloc[idx])

    def _mutated_copy(self, **kwargs) -> Dataset:
        new = dict(
            X=self._X,
            schema=self._schema,
            obs=self._obs,
            encoded=self._encoded,
            scaling=self._scaling,
            columns=self._columns,
        )
        new.update(kwargs)
        return Dataset(new.pop("X"), **new)

    def copy(self) -> Dataset:
        return self._mutated_copy()

    def with_values(self, X: np.ndarray) -> Dataset:
        return self._mutated_copy(X=X)

    def with_labels(self, labels: Sequence[str | None]) -> Dataset:
        obs = self._obs.copy()
        obs["label"] = pd.Series(list(labels), dtype=object, index=obs.index)
        return self._mutated_copy(obs=obs)

    def sort_by_id(self) -> Dataset:
        return self[np.argsort(self.record_ids, kind="stable")]

    def position(self, record_id: int) -> int:
        positions = np.flatnonzero(self.record_ids == record_id)
        if len(positions) == 0:
            msg = f"Record id {record_id} not found."
            raise KeyError(msg)
        return int(positions[0])

    def record(self, record_id: int) -> EncodedRecord:
        return self._record_at(self.position(record_id))

    def _record_at(self, i: int) -> EncodedRecord:
        if not self.is_encoded:
            msg = "Records are only available from encoded datasets."
            raise ValueError(msg)
        return EncodedRecord(
            int(self.record_ids[i]),
            self._X[i],
            label=self.labels[i],
            name=self.obs_names[i],
        )

    def records(self) -> Iterator[EncodedRecord]:
        for i in range(self.n_obs):
            yield self._record_at(i)

    def name_of(self, record_id: int) -> str:
        return self.obs_names[self.position(record_id)]

    def to_df(self, *, decode: bool = True) -> pd.DataFrame:
        """\
        Generate a table in source column order.

        Parameters
        ----------
        decode
            Map categorical indices back to level names and undo scaling.
            Otherwise the encoded values are returned as they are.
        """
        if decode and self.is_encoded:
            from .encoding import decode_matrix

            cells = decode_matrix(self)
        else:
            cells = np.array(self._X, dtype=object)
            cells[self.missing_mask] = None
        data: dict[str, Any] = {}
        for col in self._columns:
            if col == self.schema.id_attribute:
                data[col] = list(self.obs_names)
            elif col == self.schema.class_attribute:
                data[col] = list(self.labels)
            else:
                data[col] = list(cells[:, self.schema.index(col)])
        return pd.DataFrame(data, columns=self._columns, dtype=object)


@dataclass(frozen=True)
class GroupSplit:
    """\
    Complete records (G₁, `z` of them) and records with missing cells (G₂, `h` of them).
    """

    complete: Dataset
    incomplete: Dataset

    @property
    def z(self) -> int:
        return self.complete.n_obs

    @property
    def h(self) -> int:
        return self.incomplete.n_obs


def split_groups(dataset: Dataset) -> GroupSplit:
    """\
    Partition records by whether any attribute cell is missing.

    Labels are not attributes: a complete record without a label stays in
    the complete group. Input order is preserved within each group.
    """
    incomplete = dataset.missing_mask.any(axis=1)
    split = GroupSplit(complete=dataset[~incomplete], incomplete=dataset[incomplete])
    logger.info(f"split {dataset.n_obs} records into {split.z} complete and {split.h} incomplete")
    return split


@dataclass(frozen=True, eq=False)
class RecordMatrix:
    """\
    Encoded records of a group sorted by id, as plain arrays.

    Scans over a group (neighbor search, donor ranking) work on this form.
    """

    record_ids: np.ndarray
    X: np.ndarray
    labels: np.ndarray
    categorical: np.ndarray

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> RecordMatrix:
        if not dataset.is_encoded:
            msg = "Records are only available from encoded datasets."
            raise ValueError(msg)
        dataset = dataset.sort_by_id()
        return cls(
            dataset.record_ids,
            dataset.X,
            dataset.labels,
            dataset.schema.categorical_mask,
        )

    def __len__(self) -> int:
        return len(self.record_ids)

    def position(self, record_id: int) -> int:
        i = int(np.searchsorted(self.record_ids, record_id))
        if i == len(self.record_ids) or self.record_ids[i] != record_id:
            msg = f"Record id {record_id} not found."
            raise KeyError(msg)
        return i

    def row(self, record_id: int) -> np.ndarray:
        return self.X[self.position(record_id)]

    def label(self, record_id: int) -> str | None:
        return self.labels[self.position(record_id)]


@singledispatch
def as_matrix(group: Any) -> RecordMatrix:
    msg = f"Expected a Dataset or RecordMatrix, got {type(group).__name__}."
    raise TypeError(msg)


@as_matrix.register(RecordMatrix)
def _(group: RecordMatrix) -> RecordMatrix:
    return group


@as_matrix.register(Dataset)
def _(group: Dataset) -> RecordMatrix:
    return RecordMatrix.from_dataset(group)
