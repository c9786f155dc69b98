from __future__ import annotations

from ._io.read import load_csv, read_fixed_means, read_schema
from ._io.report import ParsedReport, ReportDocument, parse_report
from ._io.write import write_csv

__all__ = [
    "load_csv",
    "read_schema",
    "read_fixed_means",
    "write_csv",
    "ReportDocument",
    "ParsedReport",
    "parse_report",
]
