from __future__ import annotations

from pathlib import Path

import pandas as pd
import pytest

from cbcimpute import __version__
from cbcimpute.cli import RunConfig, main, resolve_config
from cbcimpute.io import parse_report
from cbcimpute.tests.helpers import CASE_STUDY_CSV


@pytest.fixture
def fixed_args(case_files) -> list[str]:
    return [
        case_files["input"],
        "--schema", case_files["schema"],
        "--k", "2",
        "--init", "fixed",
        "--init-means", case_files["means"],
    ]  # fmt: skip


def _rows(text: str) -> dict[str, str]:
    return {line.split(",", 1)[0]: line for line in text.splitlines()[1:]}


def test_impute_to_stdout(fixed_args, capsys):
    assert main(["impute", *fixed_args]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows["MR3"] == "MR3,K11,7,J31,7,C-1"
    assert rows["MR5"] == "MR5,K13,3,J32,7,C-2"
    assert rows["MR1"] == "MR1,K11,5,J31,10,C-1"


def test_impute_outputs(fixed_args, tmp_path, capsys):
    out, report = tmp_path / "out.csv", tmp_path / "report.txt"
    assert main(["impute", *fixed_args, "-o", str(out), "--report", str(report)]) == 0
    assert capsys.readouterr().out == ""
    assert _rows(out.read_text())["MR5"] == "MR5,K13,3,J32,7,C-2"
    parsed = parse_report(report.read_text())
    assert parsed.title == "impute"
    assert parsed.mappings["config"]["init"] == "fixed"
    assert parsed.mappings["resolved"]["neighbor_count"] == "2"
    assert parsed.mappings["summary"]["filled_cells"] == "2"
    assert parsed.mappings["summary"]["kmeans_converged"] == "true"
    targets = parsed.tables["targets"].set_index("record")
    assert targets.loc["MR3", "donor"] == "MR1"
    assert targets.loc["MR3", "filled"] == "Z3=J31"
    assert targets.loc["MR5", "mapping"] == "11.931075"


def test_impute_is_deterministic(fixed_args, tmp_path):
    outputs = []
    for name in ("a", "b"):
        report = tmp_path / f"{name}.txt"
        out = tmp_path / f"{name}.csv"
        assert main(["trace", *fixed_args, "-o", str(out), "--report", str(report)]) == 0
        outputs.append((out.read_bytes(), report.read_bytes()))
    assert outputs[0] == outputs[1]


def test_aligned_type1(fixed_args, capsys):
    assert main(["impute", *fixed_args, "--type2-mode", "aligned-type1"]) == 0
    assert _rows(capsys.readouterr().out)["MR3"] == "MR3,K11,7,J32,7,C-1"


def test_trace_to_stdout(fixed_args, capsys):
    assert main(["trace", *fixed_args]) == 0
    parsed = parse_report(capsys.readouterr().out)
    assert parsed.title == "trace"
    final = parsed.tables["final_mapping_g2"].set_index("record")
    assert float(final.loc["MR3", "total"]) == pytest.approx(10.849893, abs=1e-5)
    assert float(final.loc["MR5", "total"]) == pytest.approx(11.931075, abs=1e-5)
    assert parsed.tables["donor_ranking_MR3"]["donor"].iloc[0] == "MR1"
    notes = parsed.mappings["notes"]
    assert notes["donor_MR3"] == "MR1 with masked type-2 sums, MR8 with aligned-type1 sums"
    assert "donor_MR5" not in notes


def test_classify(case_files, fixed_args, capsys):
    Path(case_files["input"]).write_text(CASE_STUDY_CSV.replace("MR3,K11,7,?,7,C-1", "MR3,K11,7,?,7,?"))
    assert main(["classify", *fixed_args]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows["MR3"] == "MR3,K11,7,J31,7,C-1"
    assert rows["MR5"] == "MR5,K13,3,J32,?,C-2"


def test_header_schema(case_files, capsys):
    args = [
        "impute", case_files["input"],
        "--class-attribute", "Class",
        "--id-attribute", "Record",
        "--categorical", "Z1,Z3",
        "--k", "2",
        "--init", "fixed",
        "--init-means", case_files["means"],
    ]  # fmt: skip
    assert main(args) == 0
    assert _rows(capsys.readouterr().out)["MR5"] == "MR5,K13,3,J32,7,C-2"


def test_config_file(case_files, tmp_path, capsys):
    config = tmp_path / "run.yaml"
    config.write_text(
        f"schema: {case_files['schema']}\nk: 2\ninit: fixed\n"
        f"init-means: {case_files['means']}\ntype2_mode: aligned-type1\n"
    )
    assert main(["impute", case_files["input"], "--config", str(config)]) == 0
    assert _rows(capsys.readouterr().out)["MR3"] == "MR3,K11,7,J32,7,C-1"
    # flags win over the file
    args = ["impute", case_files["input"], "--config", str(config), "--type2-mode", "masked"]
    assert main(args) == 0
    assert _rows(capsys.readouterr().out)["MR3"] == "MR3,K11,7,J31,7,C-1"


def test_resolve_config_defaults(case_files):
    cfg = resolve_config(["impute", case_files["input"]])
    assert cfg == RunConfig(command="impute", input=Path(case_files["input"]))
    assert cfg.impute_config().neighbor_count is None


@pytest.mark.parametrize(
    "contents",
    [
        pytest.param("colour: red\n", id="unknown-key"),
        pytest.param("- a\n", id="not-a-mapping"),
    ],
)
def test_bad_config_file(case_files, tmp_path, contents):
    config = tmp_path / "run.yaml"
    config.write_text(contents)
    assert main(["impute", case_files["input"], "--config", str(config)]) == 1


def test_fatal_error_writes_nothing(case_files, fixed_args, tmp_path):
    Path(case_files["input"]).write_text(CASE_STUDY_CSV + "MR10,K11,5\n")
    out, report = tmp_path / "out.csv", tmp_path / "report.txt"
    assert main(["impute", *fixed_args, "-o", str(out), "--report", str(report)]) == 1
    assert not out.exists()
    assert not report.exists()


@pytest.mark.parametrize(
    "args",
    [
        pytest.param(["impute"], id="no-input"),
        pytest.param(["impute", "missing.csv"], id="missing-file"),
        pytest.param(["impute", "{input}", "--schema", "{schema}", "--init", "fixed"], id="fixed-without-means"),
        pytest.param(["impute", "{input}", "--schema", "{schema}", "--k", "20"], id="k-too-large"),
        pytest.param(["impute", "{input}", "--schema", "{schema}", "--fill", "median"], id="bad-fill"),
    ],
)
def test_fatal_exit_codes(case_files, args):
    assert main([a.format(**case_files) for a in args]) == 1


def test_partial_failure(case_files, fixed_args, tmp_path):
    Path(case_files["input"]).write_text(CASE_STUDY_CSV + "MR10,?,?,?,?,C-1\n")
    out, report = tmp_path / "out.csv", tmp_path / "report.txt"
    assert main(["impute", *fixed_args, "-o", str(out), "--report", str(report)]) == 2
    rows = _rows(out.read_text())
    assert rows["MR10"] == "MR10,?,?,?,?,C-1"
    assert rows["MR5"] == "MR5,K13,3,J32,7,C-2"
    parsed = parse_report(report.read_text())
    assert parsed.tables["failures"]["record"].tolist() == ["MR10"]


def test_evaluate_synthetic(tmp_path, capsys):
    errors = tmp_path / "errors.csv"
    args = [
        "evaluate",
        "--synthetic", "60,4,2,1",
        "--fraction", "0.1",
        "--seed", "1",
        "--methods", "cbci,global_mean_mode,raw_knn:1",
        "--errors-csv", str(errors),
    ]  # fmt: skip
    assert main(args) == 0
    parsed = parse_report(capsys.readouterr().out)
    assert parsed.mappings["mask"]["masked_cells"] == "24"
    assert parsed.mappings["mask"]["generator"] == "PCG64"
    assert {"metrics cbci", "metrics global_mean_mode", "metrics raw_knn:1"} <= set(parsed.mappings)
    df = pd.read_csv(errors)
    assert list(df.columns) == ["method", "record", "column", "truth", "imputed", "abs_error"]
    assert len(df) == 3 * 24


def test_evaluate_case_study(fixed_args, tmp_path):
    report = tmp_path / "report.txt"
    assert main(["evaluate", *fixed_args, "--fraction", "0.05", "--report", str(report)]) == 0
    parsed = parse_report(report.read_text())
    assert parsed.mappings["mask"]["requested_cells"] == "2"
    assert "metrics cbci" in parsed.mappings


def test_evaluate_bad_synthetic():
    assert main(["evaluate", "--synthetic", "60"]) == 1


def test_version(capsys):
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
    assert __version__ in capsys.readouterr().out
