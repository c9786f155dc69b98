from __future__ import annotations

import numpy as np
import pytest

import cbcimpute as cbci
from cbcimpute import MaskShortfallWarning
from cbcimpute._core.evaluation import cell_errors, parse_method, summarize


@pytest.fixture
def synthetic() -> cbci.Dataset:
    return cbci.make_synthetic(60, 4, 2, seed=0, n_categorical=1)


def test_mask_counts(case_encoded):
    masked, truth = cbci.mask_dataset(case_encoded, cbci.MaskSpec(0.5, seed=3))
    assert truth.requested == 17
    assert truth.n_masked == 17
    assert truth.shortfall == 0
    assert masked.missing_mask.sum() == 17 + 2
    assert (masked.missing_mask.sum(axis=1) <= 3).all()
    for (record_id, column), value in truth.cells.items():
        assert case_encoded.X[case_encoded.position(record_id), case_encoded.schema.index(column)] == value
        assert np.isnan(masked.X[masked.position(record_id), masked.schema.index(column)])


def test_mask_never_selects_missing_cells(case_encoded):
    _, truth = cbci.mask_dataset(case_encoded, cbci.MaskSpec(0.5, seed=3))
    assert (3, "Z3") not in truth.cells
    assert (5, "Z4") not in truth.cells


def test_mask_rounds_half_up(case_encoded):
    _, truth = cbci.mask_dataset(case_encoded, cbci.MaskSpec(0.5, eligible_columns=("Z2",)))
    assert truth.requested == 5
    assert {column for _, column in truth.cells} == {"Z2"}


def test_mask_is_deterministic_and_order_independent(case_encoded):
    spec = cbci.MaskSpec(0.3, seed=11)
    _, a = cbci.mask_dataset(case_encoded, spec)
    _, b = cbci.mask_dataset(case_encoded, spec)
    masked_c, c = cbci.mask_dataset(case_encoded[::-1], spec)
    assert a.cells == b.cells == c.cells
    assert masked_c.record_ids.tolist() == list(range(9, 0, -1))
    _, d = cbci.mask_dataset(case_encoded, cbci.MaskSpec(0.3, seed=12))
    assert d.cells != a.cells


def test_mask_shortfall(case_encoded):
    with pytest.warns(MaskShortfallWarning, match=r"Masked 9 of 31"):
        masked, truth = cbci.mask_dataset(case_encoded, cbci.MaskSpec(0.9, max_per_record=1))
    assert truth.shortfall == 22
    assert sorted(record_id for record_id, _ in truth.cells) == list(range(1, 10))


def test_mask_hide_labels(case_encoded):
    masked, truth = cbci.mask_dataset(case_encoded, cbci.MaskSpec(0.2, seed=5, hide_labels=True))
    touched = {record_id for record_id, _ in truth.cells}
    assert set(truth.labels) == touched
    for record_id in touched:
        assert masked.labels[masked.position(record_id)] is None


@pytest.mark.parametrize(
    "kwargs",
    [
        pytest.param(dict(fraction=0), id="zero"),
        pytest.param(dict(fraction=1), id="one"),
        pytest.param(dict(fraction=0.5, max_per_record=0), id="cap"),
    ],
)
def test_mask_spec_invalid(kwargs):
    with pytest.raises(ValueError):
        cbci.MaskSpec(**kwargs)


def test_score_imputation(case_encoded):
    X = np.array(case_encoded.X)
    X[1, 1] = 11
    X[2, 2] = 1
    X[4, 3] = 7
    imputed = case_encoded.with_values(X)
    truth = cbci.GroundTruth(
        cells={(1, "Z2"): 5.0, (2, "Z2"): 7.0, (3, "Z1"): 1.0, (4, "Z1"): 3.0},
        labels={5: "C-2", 6: "C-1"},
    )
    metrics = cbci.score_imputation(imputed, truth)
    assert metrics.numeric_mae == 2.0
    assert metrics.numeric_rmse == pytest.approx(2.828427, abs=1e-5)
    assert metrics.per_column["Z2"].n == 2
    assert metrics.categorical_accuracy == 0.5
    assert metrics.class_accuracy == 0.5
    assert (metrics.n_numeric, metrics.n_categorical, metrics.n_labels) == (2, 2, 2)
    d = metrics.as_dict()
    assert d["mae[Z2]"] == 2.0
    assert "rmse[Z4]" not in d


def test_score_without_numeric_cells(case_encoded):
    metrics = cbci.score_imputation(case_encoded, cbci.GroundTruth(cells={(1, "Z1"): 1.0}))
    assert metrics.numeric_rmse is None
    assert metrics.categorical_accuracy == 1.0
    assert metrics.class_accuracy is None


def test_score_unimputed_cell(case_encoded):
    with pytest.raises(cbci.PipelineError, match=r"not imputed"):
        cbci.score_imputation(case_encoded, cbci.GroundTruth(cells={(3, "Z3"): 1.0}))


def test_cell_errors(case_encoded):
    X = np.array(case_encoded.X)
    X[2, 2] = 2
    df = cell_errors(case_encoded.with_values(X), cbci.GroundTruth(cells={(3, "Z3"): 1.0}))
    assert df.to_dict("records") == [
        {"record": "MR3", "column": "Z3", "truth": "J31", "imputed": "J32", "abs_error": 1.0}
    ]


def test_global_mean_mode(case_encoded):
    out = cbci.run_baseline(case_encoded, cbci.GlobalMeanMode())
    assert out.X[4, 3] == pytest.approx(55 / 7)
    assert out.X[2, 2] == 1


def test_global_mean_of_z2(case_encoded):
    X = np.array(case_encoded.X)
    X[2, 1] = np.nan
    out = cbci.run_baseline(case_encoded.with_values(X), cbci.GlobalMeanMode())
    assert out.X[2, 1] == pytest.approx(43 / 7)


@pytest.mark.parametrize(
    ("k", "mr5_z4", "mr3_z3"),
    [
        pytest.param(1, 10.0, 2.0, id="k1"),
        pytest.param(2, 6.5, 2.0, id="k2"),
    ],
)
def test_raw_knn(case_encoded, k, mr5_z4, mr3_z3):
    out = cbci.run_baseline(case_encoded, cbci.RawKNN(k))
    assert out.X[4, 3] == mr5_z4
    assert out.X[2, 2] == mr3_z3


def test_baseline_assign_labels(case_encoded):
    ds = case_encoded.with_labels([None if i == 4 else lab for i, lab in enumerate(case_encoded.labels)])
    out = cbci.run_baseline(ds, cbci.RawKNN(1), assign_labels=True)
    assert out.labels[4] == "C-1"
    out = cbci.run_baseline(ds, cbci.GlobalMeanMode(), assign_labels=True)
    assert out.labels[4] == "C-2"


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        pytest.param("cbci", "cbci", id="cbci"),
        pytest.param("global-mean-mode", cbci.GlobalMeanMode(), id="global"),
        pytest.param("raw_knn", cbci.RawKNN(1), id="knn-default"),
        pytest.param(" raw_knn:5", cbci.RawKNN(5), id="knn-5"),
    ],
)
def test_parse_method(text, expected):
    assert parse_method(text) == expected


def test_parse_method_invalid():
    with pytest.raises(ValueError, match=r"Unknown method"):
        parse_method("mice")


def test_make_synthetic(synthetic):
    assert synthetic.shape == (60, 4)
    assert not synthetic.missing_mask.any()
    assert set(np.unique(synthetic.X[:, 3])) <= {1.0, 2.0, 3.0}
    assert set(synthetic.labels) <= {"C1", "C2"}
    b = cbci.make_synthetic(60, 4, 2, seed=0, n_categorical=1)
    np.testing.assert_array_equal(synthetic.X, b.X)


def test_evaluate_methods(synthetic):
    spec = cbci.MaskSpec(0.1, seed=1, hide_labels=True)
    result = cbci.evaluate_methods(synthetic, spec, ["cbci", "global_mean_mode", "raw_knn:3"])
    assert list(result.results) == ["cbci", "global_mean_mode", "raw_knn:3"]
    for method in result.results.values():
        m = method.metrics
        assert m.n_numeric + m.n_categorical == result.truth.n_masked == 24
        assert len(method.errors) == 24
        assert not method.imputed.missing_mask.any()
        assert m.n_labels == len(result.truth.labels)
    summary = summarize(result)
    assert summary["generator"] == "PCG64"
    assert summary["masked_cells"] == 24
    assert summary["max_per_record"] == 3


def test_evaluate_is_deterministic(synthetic):
    spec = cbci.MaskSpec(0.1, seed=1)
    a = cbci.evaluate_methods(synthetic, spec)
    b = cbci.evaluate_methods(synthetic, spec)
    assert a.results["cbci"].metrics == b.results["cbci"].metrics


@pytest.mark.slow
def test_evaluate_large_synthetic():
    ds = cbci.make_synthetic(10_000, 20, 3, seed=0, n_categorical=4)
    result = cbci.evaluate_methods(ds, cbci.MaskSpec(0.1, seed=0), ["cbci", "raw_knn:1"])
    assert result.truth.n_masked == 20_000
