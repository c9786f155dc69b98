"""\
Structured-text report documents.

A report is a title line followed by named sections separated by blank lines.
A `[name]` section holds tab-separated key/value pairs, a `[table name]`
section a header row and tab-separated data rows::

    # cbcimpute trace

    [config]
    k	2
    neighbor_count	2

    [table type1]
    record	cluster	type1_sum
    MR1	1	6.791479
"""

from __future__ import annotations

from datetime import UTC, datetime
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple

import pandas as pd

from .._settings import settings
from ..logging import get_logger
from .utils import format_cell

if TYPE_CHECKING:
    from collections.abc import Mapping
    from os import PathLike
    from typing import Any

logger = get_logger(__name__)


def _check_name(name: str) -> str:
    if not name or any(c in name for c in "[]\t\n"):
        msg = f"Invalid report section name {name!r}."
        raise ValueError(msg)
    return name


def _clean(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ")


class ReportDocument:
    """\
    An ordered collection of key/value sections and tables.

    Parameters
    ----------
    title
        Written on the first line after `# cbcimpute`.
    precision
        Decimals for float cells, defaults to `settings.report_precision`.
    timestamps
        Add a UTC time line, defaults to `settings.report_timestamps`.
    """

    def __init__(
        self,
        title: str,
        *,
        precision: int | None = None,
        timestamps: bool | None = None,
    ):
        self.title = title
        self.precision = settings.report_precision if precision is None else precision
        self.timestamps = settings.report_timestamps if timestamps is None else timestamps
        self._sections: dict[str, tuple[str, Any]] = {}

    def __contains__(self, name: str) -> bool:
        return name in self._sections

    def _add(self, key: str, kind: str, content: Any) -> None:
        if key in self._sections:
            msg = f"Report already has a section {key!r}."
            raise KeyError(msg)
        self._sections[key] = (kind, content)

    def add_mapping(self, name: str, mapping: Mapping[str, Any]) -> None:
        """Add a key/value section; values are formatted like table cells."""
        self._add(_check_name(name), "mapping", dict(mapping))

    def add_table(self, name: str, table: pd.DataFrame) -> None:
        """Add a table section; the frame's index is not written."""
        self._add(f"table {_check_name(name)}", "table", table.copy())

    @property
    def table_names(self) -> list[str]:
        return [k.removeprefix("table ") for k, (kind, _) in self._sections.items() if kind == "table"]

    def _cell(self, v: Any) -> str:
        return _clean(format_cell(v, self.precision))

    def render(self) -> str:
        lines = [f"# cbcimpute {self.title}"]
        if self.timestamps:
            lines.append(f"# written {datetime.now(UTC).isoformat(timespec='seconds')}")
        for key, (kind, content) in self._sections.items():
            lines += ["", f"[{key}]"]
            if kind == "mapping":
                lines += [f"{k}\t{self._cell(v)}" for k, v in content.items()]
            else:
                lines.append("\t".join(_clean(str(c)) for c in content.columns))
                lines += [
                    "\t".join(self._cell(v) for v in row)
                    for row in content.itertuples(index=False, name=None)
                ]
        return "\n".join(lines) + "\n"

    def write(self, path: PathLike | str) -> None:
        path = Path(path)
        logger.info(f"writing report to {path}")
        path.write_text(self.render(), encoding="utf-8", newline="\n")


class ParsedReport(NamedTuple):
    title: str
    mappings: dict[str, dict[str, str]]
    tables: dict[str, pd.DataFrame]


def parse_report(text: str) -> ParsedReport:
    """\
    Read a rendered report back; all cells stay text.

    >>> doc = ReportDocument("demo")
    >>> doc.add_mapping("config", {"k": 2, "scale": False})
    >>> parse_report(doc.render()).mappings["config"]
    {'k': '2', 'scale': 'false'}
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# cbcimpute "):
        msg = "Not a cbcimpute report."
        raise ValueError(msg)
    title = lines[0].removeprefix("# cbcimpute ")
    mappings: dict[str, dict[str, str]] = {}
    tables: dict[str, pd.DataFrame] = {}
    blocks: list[list[str]] = []
    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            blocks.append([line[1:-1]])
        elif line and blocks:
            blocks[-1].append(line)
    for key, *body in blocks:
        rows = [line.split("\t") for line in body]
        if key.startswith("table "):
            header, *data = rows
            tables[key.removeprefix("table ")] = pd.DataFrame(data, columns=header, dtype=object)
        else:
            mappings[key] = {k: v for k, v in rows}
    return ParsedReport(title, mappings, tables)
