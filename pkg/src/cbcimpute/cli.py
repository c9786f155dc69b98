"""\
Command-line interface: `cbcimpute {impute,trace,classify,evaluate}`.

Every :class:`RunConfig` field has a flag. `--config FILE` reads a YAML
mapping of flag names to values; flags given on the command line win over
the file, which wins over the defaults.

Exit status is 0 on success, 1 on fatal errors (nothing is written) and 2
when some records could not be processed (the others are written).
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import TYPE_CHECKING, Any

import pandas as pd
import yaml

from . import __version__
from ._core.clustering import parse_init
from ._core.errors import CSVFormatError, PipelineError, SchemaError
from ._core.evaluation import (
    MaskSpec,
    evaluate_methods,
    make_synthetic,
    parse_method,
    summarize,
)
from ._core.imputation import parse_fill
from ._core.mapping import Type2Mode
from ._core.pipeline import ImputeConfig, classify_dataset, impute_dataset
from ._core.schema import Schema
from ._core.trace import build_trace
from ._io.read import load_csv, read_fixed_means, read_schema
from ._io.report import ReportDocument
from ._io.utils import format_cell
from ._io.write import write_csv
from ._settings import settings
from .logging import get_logger, set_verbosity

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from ._core.dataset import Dataset
    from ._core.pipeline import ImputationReport

logger = get_logger(__name__)

COMMANDS = ("impute", "trace", "classify", "evaluate")
EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


@dataclass
class RunConfig:
    """Resolved settings of one command-line run."""

    command: str = "impute"
    input: Path | None = None
    schema: Path | None = None
    class_attribute: str = "class"
    id_attribute: str | None = None
    categorical: tuple[str, ...] = ()
    missing_tokens: tuple[str, ...] | None = None
    k: int | None = None
    init: str = "farthest_first"
    init_means: Path | None = None
    start_id: int | None = None
    max_iter: int | None = None
    neighbor_count: int | None = None
    fill: str = "copy_donor"
    top_k: int = 1
    scale: bool = False
    type2_mode: str = Type2Mode.MASKED.value
    seed: int = 0
    output: Path | None = None
    report: Path | None = None
    timestamps: bool = False
    errors_csv: Path | None = None
    fraction: float = 0.1
    methods: tuple[str, ...] = ("cbci", "global_mean_mode")
    hide_labels: bool = False
    synthetic: tuple[int, ...] | None = None
    verbose: int = 0
    quiet: int = 0

    _paths = ("input", "schema", "init_means", "output", "report", "errors_csv")
    _tuples = ("categorical", "missing_tokens", "methods", "synthetic")

    def __post_init__(self):
        for name in self._paths:
            if (v := getattr(self, name)) is not None:
                setattr(self, name, Path(v))
        for name in self._tuples:
            v = getattr(self, name)
            if isinstance(v, str):
                v = _split_list(v)
            if v is not None:
                setattr(self, name, tuple(v))
        if self.synthetic is not None:
            self.synthetic = tuple(int(v) for v in self.synthetic)
        if self.command not in COMMANDS:
            msg = f"Unknown command {self.command!r}, expected one of {COMMANDS}."
            raise ValueError(msg)

    def echo(self) -> dict[str, Any]:
        """Every setting except logging verbosity, for the report."""
        d = asdict(self)
        for key in ("verbose", "quiet"):
            d.pop(key)
        return {k: ("" if v is None else v) for k, v in d.items()}

    def impute_config(self) -> ImputeConfig:
        means = None
        if self.init == "fixed":
            if self.init_means is None:
                msg = "--init fixed needs --init-means FILE."
                raise ValueError(msg)
            means = read_fixed_means(self.init_means)
        init_text = self.init
        if self.init == "farthest_first" and self.start_id is not None:
            init_text = f"farthest_first:{self.start_id}"
        return ImputeConfig(
            k=self.k,
            init=parse_init(init_text, means),
            max_iter=self.max_iter,
            neighbor_count=self.neighbor_count,
            fill=parse_fill(self.fill),
            class_top_k=self.top_k,
            scale=self.scale,
            type2_mode=Type2Mode(self.type2_mode),
        )


def _split_list(text: str) -> list[str]:
    return next(csv.reader([text])) if text else []


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("input", nargs="?", type=Path, default=S, help="Input CSV file.")
    p.add_argument("--config", type=Path, help="YAML file with flag values.")
    p.add_argument("-v", "--verbose", action="count", default=S, help="More log output.")
    p.add_argument("-q", "--quiet", action="count", default=S, help="Less log output.")
    g = p.add_argument_group("data")
    g.add_argument("--schema", type=Path, default=S, help="YAML schema sidecar.")
    g.add_argument("--class-attribute", default=S, help="Class column when no schema is given (default: class).")
    g.add_argument("--id-attribute", default=S, help="Column naming the records.")
    g.add_argument("--categorical", type=_split_list, default=S, help="Comma-separated categorical columns.")
    g.add_argument("--missing-token", dest="missing_tokens", action="append", default=S, help="Text read as missing, repeatable.")
    g = p.add_argument_group("pipeline")
    g.add_argument("--k", type=int, default=S, help="Number of clusters (default: number of classes).")
    g.add_argument("--init", choices=["farthest_first", "class_seeded", "fixed"], default=S)
    g.add_argument("--init-means", type=Path, default=S, help="Initial means for --init fixed.")
    g.add_argument("--start-id", type=int, default=S, help="First seed of --init farthest_first.")
    g.add_argument("--max-iter", type=int, default=S)
    g.add_argument("--neighbor-count", type=int, default=S, help="Neighbors per record (default: k).")
    g.add_argument("--fill", default=S, help="copy_donor, top_k:<k> or class_mean.")
    g.add_argument("--top-k", type=int, default=S, help="Donors voting on the class label.")
    g.add_argument("--scale", action="store_true", default=S, help="Min-max scale attributes first.")
    g.add_argument("--type2-mode", choices=[m.value for m in Type2Mode], default=S)
    g = p.add_argument_group("output")
    g.add_argument("-o", "--output", type=Path, default=S, help="Output CSV (default: stdout).")
    g.add_argument("--report", type=Path, default=S, help="Report file.")
    g.add_argument("--timestamps", action="store_true", default=S, help="Stamp the report with the time.")


def _add_evaluate(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    g = p.add_argument_group("evaluation")
    g.add_argument("--fraction", type=float, default=S, help="Share of cells to mask.")
    g.add_argument("--seed", type=int, default=S, help="Seed of the masking generator.")
    g.add_argument("--methods", type=_split_list, default=S, help="Comma-separated: cbci, global_mean_mode, raw_knn:<k>.")
    g.add_argument("--hide-labels", action="store_true", default=S, help="Also hide labels of masked records.")
    g.add_argument("--errors-csv", type=Path, default=S, help="Per-cell errors of every method.")
    g.add_argument(
        "--synthetic",
        type=lambda s: tuple(int(v) for v in _split_list(s)),
        default=S,
        help="N_OBS,N_VARS[,N_CLASSES[,N_CATEGORICAL]] instead of an input file.",
    )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbcimpute",
        description="Class-based cluster imputation of tabular records.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "impute": "Fill missing cells and write the completed table.",
        "trace": "Write every intermediate table of an imputation run.",
        "classify": "Predict labels of unlabeled records.",
        "evaluate": "Mask known cells and score imputation methods.",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        _add_common(p)
        if name == "evaluate":
            _add_evaluate(p)
    return parser


def load_config_file(path: Path) -> dict[str, Any]:
    d = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(d, dict):
        msg = f"Config file {path} must contain a mapping."
        raise ValueError(msg)
    known = {f.name for f in fields(RunConfig)} - {"command"}
    d = {str(k).replace("-", "_"): v for k, v in d.items()}
    if "missing_token" in d:
        d["missing_tokens"] = d.pop("missing_token")
    if unknown := sorted(set(d) - known):
        msg = f"Unknown settings in {path}: {unknown}."
        raise ValueError(msg)
    return d


def resolve_config(argv: Sequence[str] | None = None) -> RunConfig:
    """Defaults, then the `--config` file, then explicit flags."""
    ns = vars(make_parser().parse_args(argv))
    config_file = ns.pop("config", None)
    values = {} if config_file is None else load_config_file(config_file)
    values.update(ns)
    return RunConfig(**values)


def _schema(cfg: RunConfig) -> Schema | None:
    if cfg.schema is not None:
        schema = read_schema(cfg.schema)
        if cfg.missing_tokens is not None:
            schema = Schema(
                schema.attributes,
                class_attribute=schema.class_attribute,
                missing_tokens=cfg.missing_tokens,
                id_attribute=schema.id_attribute,
            )
        return schema
    return None


def load_input(cfg: RunConfig) -> Dataset:
    if cfg.input is None:
        msg = "No input file given."
        raise ValueError(msg)
    schema = _schema(cfg)
    if schema is None:
        with cfg.input.open(encoding="utf-8-sig", newline="") as f:
            header = next(csv.reader(f), None)
        if header is None:
            msg = f"{cfg.input} has no header row."
            raise CSVFormatError(msg)
        schema = Schema.from_header(
            header,
            class_attribute=cfg.class_attribute,
            id_attribute=cfg.id_attribute,
            categorical=cfg.categorical,
            missing_tokens=cfg.missing_tokens,
        )
    return load_csv(cfg.input, schema)


def _new_document(cfg: RunConfig, title: str, resolved: dict[str, Any] | None = None) -> ReportDocument:
    doc = ReportDocument(title, timestamps=cfg.timestamps or None)
    doc.add_mapping("config", cfg.echo())
    if resolved is not None:
        doc.add_mapping("resolved", resolved)
    return doc


def _add_run_summary(doc: ReportDocument, dataset: Dataset, report: ImputationReport) -> None:
    summary: dict[str, Any] = {"records": dataset.n_obs}
    if report.state is not None:
        summary["complete"] = report.state.split.z
        summary["incomplete"] = report.state.split.h
        summary["clusters"] = report.state.model.k
        summary["kmeans_iterations"] = report.state.model.n_iter
        summary["kmeans_converged"] = report.state.model.converged
    summary["targets"] = len(report.targets)
    summary["filled_cells"] = report.n_filled
    summary["failures"] = len(report.failures)
    if report.state is None:
        summary["notice"] = "nothing to do"
    doc.add_mapping("summary", summary)


def _add_targets(doc: ReportDocument, report: ImputationReport) -> None:
    doc.add_table(
        "targets",
        pd.DataFrame(
            [
                [
                    t.name,
                    t.entry.total,
                    report.state.dataset.name_of(t.match.chosen.donor_id),
                    t.match.chosen.difference,
                    ",".join(f"{c.column}={format_cell(c.decoded)}" for c in t.filled),
                    t.predicted_class,
                    t.label_assigned,
                ]
                for t in report.targets
            ],
            columns=["record", "mapping", "donor", "difference", "filled", "predicted_class", "label_assigned"],
        ),
    )
    if report.failures:
        doc.add_table(
            "failures",
            pd.DataFrame([[f.name, f.message] for f in report.failures], columns=["record", "message"]),
        )


def _add_warnings(doc: ReportDocument, messages: Sequence[str]) -> None:
    if messages:
        doc.add_table("warnings", pd.DataFrame({"message": list(messages)}))


def cmd_impute(cfg: RunConfig) -> int:
    dataset = load_input(cfg)
    (out, report), messages = _collect(impute_dataset, dataset, cfg.impute_config())
    doc = _new_document(cfg, "impute", report.config)
    _add_run_summary(doc, dataset, report)
    if report.state is not None:
        _add_targets(doc, report)
    _add_warnings(doc, messages)
    _write_outputs(cfg, doc, out, report_to_stdout=False)
    return EXIT_PARTIAL if report.failures else EXIT_OK


def cmd_trace(cfg: RunConfig) -> int:
    dataset = load_input(cfg)
    (out, report), messages = _collect(impute_dataset, dataset, cfg.impute_config())
    doc = _new_document(cfg, "trace", report.config)
    _add_run_summary(doc, dataset, report)
    if report.state is not None:
        build_trace(report).add_to(doc)
    _add_warnings(doc, messages)
    _write_outputs(cfg, doc, out if cfg.output is not None else None, report_to_stdout=True)
    return EXIT_PARTIAL if report.failures else EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    dataset = load_input(cfg)
    (out, report), messages = _collect(classify_dataset, dataset, cfg.impute_config())
    doc = _new_document(cfg, "classify", report.config)
    _add_run_summary(doc, dataset, report)
    if report.state is not None:
        _add_targets(doc, report)
    _add_warnings(doc, messages)
    _write_outputs(cfg, doc, out, report_to_stdout=False)
    return EXIT_PARTIAL if report.failures else EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    if cfg.synthetic is not None:
        if not 2 <= len(cfg.synthetic) <= 4:
            msg = "--synthetic needs N_OBS,N_VARS[,N_CLASSES[,N_CATEGORICAL]]."
            raise ValueError(msg)
        n_obs, n_vars, *rest = cfg.synthetic
        n_classes = rest[0] if rest else 2
        n_categorical = rest[1] if len(rest) > 1 else 0
        dataset = make_synthetic(n_obs, n_vars, n_classes, seed=cfg.seed, n_categorical=n_categorical)
    else:
        dataset = load_input(cfg)
    spec = MaskSpec(cfg.fraction, seed=cfg.seed, hide_labels=cfg.hide_labels)
    methods = [parse_method(m) for m in cfg.methods]
    result, messages = _collect(evaluate_methods, dataset, spec, methods, cfg.impute_config())
    doc = _new_document(cfg, "evaluate")
    doc.add_mapping("mask", summarize(result))
    for name, method in result.results.items():
        doc.add_mapping(f"metrics {name}", method.metrics.as_dict())
    _add_warnings(doc, messages)
    errors = None
    if cfg.errors_csv is not None:
        errors = pd.concat(
            [m.errors.assign(method=name) for name, m in result.results.items()],
            ignore_index=True,
        )
        errors = errors[["method", "record", "column", "truth", "imputed", "abs_error"]]
    if cfg.report is not None:
        doc.write(cfg.report)
    else:
        sys.stdout.write(doc.render())
    if errors is not None:
        errors.map(lambda v: format_cell(v, settings.report_precision)).to_csv(
            cfg.errors_csv, index=False, lineterminator="\n"
        )
    return EXIT_OK


def _collect(fn: Callable[..., Any], *args: Any) -> tuple[Any, list[str]]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = fn(*args)
    messages = list(dict.fromkeys(str(w.message) for w in caught))
    for message in messages:
        logger.warning(message)
    return result, messages


def _write_outputs(cfg: RunConfig, doc: ReportDocument, out: Dataset | None, *, report_to_stdout: bool) -> None:
    if out is not None:
        write_csv(out, sys.stdout if cfg.output is None else cfg.output)
    if cfg.report is not None:
        doc.write(cfg.report)
    elif report_to_stdout:
        sys.stdout.write(doc.render())


HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    "impute": cmd_impute,
    "trace": cmd_trace,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = resolve_config(argv)
    except (OSError, ValueError, TypeError, yaml.YAMLError) as e:
        logger.error(f"error: {e}")
        return EXIT_FATAL
    set_verbosity(cfg.verbose - cfg.quiet)
    try:
        return HANDLERS[cfg.command](cfg)
    except (OSError, SchemaError, CSVFormatError, PipelineError, ValueError, yaml.YAMLError) as e:
        notes = "".join(f"\n  {n}" for n in getattr(e, "__notes__", ()))
        logger.error(f"error: {e}{notes}")
        return EXIT_FATAL
