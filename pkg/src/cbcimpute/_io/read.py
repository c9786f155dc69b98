from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
import yaml

from .._core.dataset import Dataset, _gen_obs
from .._core.errors import CSVFormatError, SchemaError
from .._core.schema import Schema
from ..logging import get_logger
from .utils import describe_source, read_source_text

if TYPE_CHECKING:
    from os import PathLike

    from .utils import Source

logger = get_logger(__name__)


def _tokenize(text: str) -> list[list[str]]:
    # pandas pads short rows silently, so arity is checked on the raw rows
    rows = [row for row in csv.reader(io.StringIO(text, newline="")) if row]
    if not rows:
        msg = "Table has no header row."
        raise CSVFormatError(msg)
    width = len(rows[0])
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            msg = f"Row {lineno} has {len(row)} fields, the header has {width}."
            raise CSVFormatError(msg)
    return rows


def _check_header(header: list[str], schema: Schema) -> None:
    if dupes := sorted({c for c in header if header.count(c) > 1}):
        msg = f"Duplicated header columns: {dupes}."
        raise CSVFormatError(msg)
    if missing := [c for c in schema.columns if c not in header]:
        msg = f"Header is missing schema columns {missing}."
        raise CSVFormatError(msg)
    if extra := [c for c in header if c not in schema.columns]:
        msg = f"Header has columns {extra} that are not in the schema."
        raise CSVFormatError(msg)


def load_csv(source: Source, schema: Schema) -> Dataset:
    """\
    Read a record table.

    The header must name every schema attribute and the class column (plus
    the id column if the schema declares one), in any order. Cells whose text
    is one of the schema's missing tokens become missing; so does the label.

    Parameters
    ----------
    source
        Path or open text/byte stream of UTF-8 CSV text.
    schema
        Attribute descriptors, class column and missing tokens.

    Returns
    -------
    A raw :class:`~cbcimpute.Dataset` with record ids `1..m` in file order.
    """
    where = describe_source(source)
    try:
        rows = _tokenize(read_source_text(source))
        header, body = rows[0], rows[1:]
        _check_header(header, schema)
    except (CSVFormatError, csv.Error, UnicodeDecodeError) as e:
        e.add_note(f"while reading {where}")
        raise
    df = pd.DataFrame(body, columns=header, dtype=object)

    X = np.empty((len(df), schema.n_attributes), dtype=object)
    for j, attr in enumerate(schema.attributes):
        for i, text in enumerate(df[attr.name]):
            if schema.is_missing(text):
                X[i, j] = None
            elif attr.is_categorical:
                X[i, j] = text
            else:
                try:
                    value = float(text)
                    if not math.isfinite(value):
                        raise ValueError(text)
                    X[i, j] = value
                except ValueError:
                    msg = f"Non-numeric value {text!r} in numeric column {attr.name!r}."
                    e = CSVFormatError(msg)
                    e.add_note(f"while reading row {i + 2} of {where}")
                    raise e from None

    labels = [
        None if schema.is_missing(text) else text
        for text in df[schema.class_attribute]
    ]
    names = None
    if schema.id_attribute is not None:
        names = list(df[schema.id_attribute])
        if len(set(names)) != len(names):
            msg = f"Record names in {schema.id_attribute!r} are not unique."
            raise CSVFormatError(msg)
    obs = _gen_obs(len(df), labels=labels, names=names)
    logger.info(f"read {len(df)} records with {schema.n_attributes} attributes from {where}")
    return Dataset(X, schema=schema, obs=obs, encoded=False, columns=header)


def read_schema(path: PathLike | str) -> Schema:
    """\
    Read a YAML schema sidecar.

    .. code-block:: yaml

        class_attribute: Class
        id_attribute: Record
        missing_tokens: ["?", ""]
        attributes:
          - {name: Z1, kind: categorical, levels: [K11, K12, K13]}
          - Z2
          - {name: Z3, kind: categorical}
          - Z4

    Bare names are numeric attributes. Categorical attributes without
    `levels` get their levels from the data, sorted lexicographically.
    """
    try:
        d = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if not isinstance(d, dict):
            msg = "Schema file must contain a mapping."
            raise SchemaError(msg)
        return Schema.from_dict(d)
    except (SchemaError, yaml.YAMLError) as e:
        e.add_note(f"while reading schema {path}")
        raise


def read_fixed_means(path: PathLike | str, n_vars: int | None = None) -> np.ndarray:
    """\
    Read initial cluster means, one comma-separated vector per line.

    Blank lines and `#` comments are ignored.
    """
    try:
        means = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, dtype=np.float64)
    except ValueError as e:
        msg = f"Cannot parse initial means: {e}"
        raise CSVFormatError(msg) from e
    if means.size == 0:
        msg = f"No initial means found in {path}."
        raise CSVFormatError(msg)
    if n_vars is not None and means.shape[1] != n_vars:
        msg = f"Initial means have {means.shape[1]} values, the schema has {n_vars} attributes."
        raise CSVFormatError(msg)
    return means
