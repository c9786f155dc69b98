from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..logging import get_logger
from .errors import PipelineError, SchemaError

if TYPE_CHECKING:
    from .dataset import Dataset
    from .schema import AttributeDescriptor

logger = get_logger(__name__)


def _is_missing(v: object) -> bool:
    return v is None or (isinstance(v, float) and np.isnan(v))


def resolve_levels(dataset: Dataset) -> Dataset:
    """\
    Fill in undeclared categorical levels from the data.

    Levels are the distinct present values in lexicographic order.
    """
    attributes = []
    for j, attr in enumerate(dataset.schema.attributes):
        if attr.is_categorical and attr.levels is None:
            present = {str(v) for v in dataset.X[:, j] if not _is_missing(v)}
            attr = attr.with_levels(sorted(present))
            logger.debug(f"derived levels for {attr.name!r}: {list(attr.levels)}")
        attributes.append(attr)
    return dataset._mutated_copy(schema=dataset.schema.replace_attributes(attributes))


def encode(dataset: Dataset) -> Dataset:
    """\
    Replace categorical levels by their 1-based index.

    Numeric values pass through and missing cells become `NaN`.
    Already encoded datasets are returned unchanged.

    Parameters
    ----------
    dataset
        A raw dataset as returned by :func:`~cbcimpute.io.load_csv`.

    Returns
    -------
    An encoded dataset whose schema has all levels resolved.
    """
    if dataset.is_encoded:
        return dataset
    dataset = resolve_levels(dataset)
    X = np.full(dataset.shape, np.nan)
    for j, attr in enumerate(dataset.schema.attributes):
        for i, value in enumerate(dataset.X[:, j]):
            if _is_missing(value):
                continue
            try:
                X[i, j] = attr.encode(value)
            except (SchemaError, ValueError, TypeError) as e:
                e.add_note(f"while encoding record {dataset.obs_names[i]!r}")
                raise
    return dataset._mutated_copy(X=X, encoded=True)


def decode_value(column: AttributeDescriptor, v: float) -> str | float:
    """\
    Map an encoded value back to its raw representation.

    >>> from cbcimpute import AttributeDescriptor
    >>> decode_value(AttributeDescriptor("Z3", "categorical", ("J31", "J32")), 2.0)
    'J32'
    >>> decode_value(AttributeDescriptor("Z4"), 7.0)
    7.0
    """
    return column.decode(v)


def decode_matrix(dataset: Dataset) -> np.ndarray:
    """Object matrix of raw values (`None` where missing), scaling undone."""
    X = dataset.X
    if dataset.scaling is not None:
        X = dataset.scaling.inverse(X)
    out = np.empty(X.shape, dtype=object)
    for j, attr in enumerate(dataset.schema.attributes):
        for i, v in enumerate(X[:, j]):
            out[i, j] = None if np.isnan(v) else decode_value(attr, float(v))
    return out


@dataclass(frozen=True)
class ScalingParams:
    """Per-column affine map `(x - minimum) / span`; constant columns map to 0."""

    minimum: np.ndarray
    span: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        safe = np.where(self.span > 0, self.span, 1.0)
        scaled = (X - self.minimum) / safe
        return np.where(self.span > 0, scaled, np.where(np.isnan(X), np.nan, 0.0))

    def inverse(self, X: np.ndarray) -> np.ndarray:
        return X * self.span + self.minimum


def minmax_scale(dataset: Dataset) -> Dataset:
    """\
    Scale every column of an encoded dataset to `[0, 1]`.

    The parameters are kept on the result (:attr:`~cbcimpute.Dataset.scaling`)
    so that :meth:`~cbcimpute.Dataset.to_df` writes values in original units.
    """
    if not dataset.is_encoded:
        msg = "Only encoded datasets can be scaled, call `encode` first."
        raise PipelineError(msg)
    if dataset.scaling is not None:
        msg = "Dataset is already scaled."
        raise PipelineError(msg)
    present = ~dataset.missing_mask
    if empty := [
        name for name, has in zip(dataset.var_names, present.any(axis=0)) if not has
    ]:
        msg = f"Cannot scale columns without present values: {empty}."
        raise PipelineError(msg)
    minimum = np.nanmin(dataset.X, axis=0)
    span = np.nanmax(dataset.X, axis=0) - minimum
    params = ScalingParams(minimum=minimum, span=span)
    return dataset._mutated_copy(X=params.transform(dataset.X), scaling=params)
