from __future__ import annotations

import math
from functools import singledispatch
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from os import PathLike
    from typing import IO, Any

    Source = PathLike | str | IO[str] | IO[bytes]


def read_source_text(source: Source) -> str:
    """Read a path or an open text/byte stream as UTF-8 text (a BOM is dropped)."""
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = Path(source).read_bytes()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return data.removeprefix("\ufeff")


def describe_source(source: Source) -> str:
    if hasattr(source, "read"):
        return getattr(source, "name", "<stream>")
    return str(source)


@singledispatch
def format_cell(v: Any, precision: int | None = None) -> str:
    """\
    Text for one output cell.

    Without `precision`, integral floats lose their fractional part and other
    floats use the shortest round-trip form; with it, floats are fixed-point.

    >>> format_cell(7.0), format_cell(2.5), format_cell(1 / 3, 6), format_cell(None)
    ('7', '2.5', '0.333333', '')
    """
    return "" if v is None else str(v)


@format_cell.register(float)
@format_cell.register(np.floating)
def _format_float(v: float, precision: int | None = None) -> str:
    v = float(v)
    if math.isnan(v):
        return ""
    if precision is not None:
        return f"{v:.{precision}f}"
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


@format_cell.register(bool)
@format_cell.register(np.bool_)
def _format_bool(v: bool, precision: int | None = None) -> str:
    return "true" if v else "false"


@format_cell.register(np.integer)
def _format_int(v: np.integer, precision: int | None = None) -> str:
    return str(int(v))


@format_cell.register(list)
@format_cell.register(tuple)
def _format_sequence(v: list | tuple, precision: int | None = None) -> str:
    return ",".join(format_cell(x, precision) for x in v)
