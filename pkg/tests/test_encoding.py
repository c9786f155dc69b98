from __future__ import annotations

import numpy as np
import pytest

import cbcimpute as cbci
from cbcimpute import PipelineError, SchemaError
from cbcimpute._core.encoding import decode_matrix, resolve_levels
from cbcimpute.tests.helpers import CASE_STUDY_ENCODED


def test_encode_case_study(case_encoded):
    assert case_encoded.is_encoded
    expected = np.array(
        [[np.nan if v is None else v for v in row] for row in CASE_STUDY_ENCODED.values()]
    )
    np.testing.assert_array_equal(case_encoded.X, expected)
    assert case_encoded.schema["Z1"].levels == ("K11", "K12", "K13")
    assert case_encoded.schema["Z3"].levels == ("J31", "J32")


def test_encode_is_idempotent(case_encoded):
    assert cbci.encode(case_encoded) is case_encoded


def test_declared_levels_keep_their_order(case_study):
    attrs = [
        a.with_levels(("K13", "K12", "K11")) if a.name == "Z1" else a
        for a in case_study.schema.attributes
    ]
    ds = case_study._mutated_copy(schema=case_study.schema.replace_attributes(attrs))
    assert cbci.encode(ds).X[0, 0] == 3.0


def test_resolve_levels_ignores_missing(case_study):
    assert resolve_levels(case_study).schema["Z3"].levels == ("J31", "J32")


def test_encode_unknown_level(case_study):
    attrs = [a.with_levels(("J31",)) if a.name == "Z3" else a for a in case_study.schema.attributes]
    ds = case_study._mutated_copy(schema=case_study.schema.replace_attributes(attrs))
    with pytest.raises(SchemaError, match=r"'J32'") as exc_info:
        cbci.encode(ds)
    assert "while encoding record 'MR5'" in exc_info.value.__notes__


def test_decode_matrix(case_encoded):
    raw = decode_matrix(case_encoded)
    assert raw[0].tolist() == ["K11", 5.0, "J31", 10.0]
    assert raw[2, 2] is None


def test_minmax_scale(case_encoded):
    scaled = cbci.minmax_scale(case_encoded)
    assert np.nanmin(scaled.X, axis=0).tolist() == [0.0] * 4
    assert np.nanmax(scaled.X, axis=0).tolist() == [1.0] * 4
    assert np.isnan(scaled.X[2, 2])
    np.testing.assert_allclose(scaled.scaling.inverse(scaled.X), case_encoded.X)
    assert "scaled: min-max" in repr(scaled)


def test_minmax_constant_column(case_encoded):
    X = np.array(case_encoded.X)
    X[:, 1] = 4.0
    scaled = cbci.minmax_scale(case_encoded.with_values(X))
    assert scaled.X[:, 1].tolist() == [0.0] * 9
    np.testing.assert_array_equal(scaled.scaling.inverse(scaled.X)[:, 1], 4.0)


@pytest.mark.parametrize("twice", [True, False], ids=["scaled", "raw"])
def test_minmax_errors(case_study, twice):
    if twice:
        ds = cbci.minmax_scale(cbci.encode(case_study))
        match = r"already scaled"
    else:
        ds = case_study
        match = r"call `encode` first"
    with pytest.raises(PipelineError, match=match):
        cbci.minmax_scale(ds)
