from __future__ import annotations

import numpy as np
import pytest

import cbcimpute as cbci
from cbcimpute._core.pipeline import fit_pipeline
from cbcimpute.tests.helpers import brute_force_pipeline, gen_dataset


def _random_case(seed: int):
    rng = np.random.default_rng(seed)
    n_obs = int(rng.integers(4, 13))
    n_vars = int(rng.integers(1, 7))
    n_categorical = int(rng.integers(0, n_vars))
    ds = gen_dataset(rng, n_obs, n_vars, n_categorical=n_categorical, missing_rate=0.25)
    complete = ~ds.missing_mask.any(axis=1)
    k = int(rng.integers(1, min(3, complete.sum()) + 1))
    means = ds.X[complete][:k]
    config = cbci.ImputeConfig(
        k=k,
        init=cbci.FixedInit(means),
        neighbor_count=int(rng.integers(1, 4)),
    )
    return ds, config


def _rows(ds: cbci.Dataset) -> list[list[float | None]]:
    return [[None if np.isnan(v) else float(v) for v in row] for row in ds.X]


@pytest.mark.parametrize("seed", range(50))
def test_matches_brute_force(seed):
    ds, config = _random_case(seed)
    expected = brute_force_pipeline(
        _rows(ds),
        list(ds.labels),
        init_means=config.init.means.tolist(),
        neighbor_count=config.neighbor_count,
    )
    state = fit_pipeline(ds, config)
    assert state.model.assignment == expected["assignment"]
    for c, mean in expected["means"].items():
        np.testing.assert_allclose(state.model.means[c - 1], mean, rtol=1e-12)
    for record_id, entry in state.g1_entries.items():
        assert entry.total == pytest.approx(expected["totals"][record_id], rel=1e-9, abs=1e-9)

    out, report = cbci.impute_dataset(ds, config)
    assert {t.target_id for t in report.targets} == set(expected["donors"])
    for t in report.targets:
        assert t.entry.total == pytest.approx(expected["totals"][t.target_id], rel=1e-9, abs=1e-9)
        assert t.match.chosen.donor_id == expected["donors"][t.target_id]
        assert t.predicted_class == expected["classes"][t.target_id]
        np.testing.assert_array_equal(out.X[out.position(t.target_id)], expected["filled"][t.target_id])


@pytest.mark.parametrize("seed", range(10))
def test_record_order_does_not_matter(seed):
    ds, config = _random_case(seed)
    perm = np.random.default_rng(seed + 100).permutation(ds.n_obs)
    out_a, report_a = cbci.impute_dataset(ds, config)
    out_b, report_b = cbci.impute_dataset(ds[perm], config)
    assert [t.match.chosen for t in report_a.targets] == [t.match.chosen for t in report_b.targets]
    np.testing.assert_array_equal(out_a.X, out_b.sort_by_id().X)


@pytest.mark.parametrize("factor", [0.5, 3.0])
def test_uniform_rescaling_keeps_donors(factor):
    rng = np.random.default_rng(7)
    ds = gen_dataset(rng, 12, 4, missing_rate=0.2)
    means = ds.X[~ds.missing_mask.any(axis=1)][:2]
    config = cbci.ImputeConfig(k=2, init=cbci.FixedInit(means))
    _, base = cbci.impute_dataset(ds, config)
    scaled_config = cbci.ImputeConfig(k=2, init=cbci.FixedInit(means * factor))
    _, scaled = cbci.impute_dataset(ds.with_values(ds.X * factor), scaled_config)
    for a, b in zip(base.targets, scaled.targets, strict=True):
        assert a.match.chosen.donor_id == b.match.chosen.donor_id
        assert b.entry.total == pytest.approx(a.entry.total * factor, rel=1e-9)


def test_repeated_runs_are_identical():
    ds, config = _random_case(3)
    _, a = cbci.impute_dataset(ds, config)
    _, b = cbci.impute_dataset(ds, config)
    assert [(t.entry.total, t.match.chosen) for t in a.targets] == [
        (t.entry.total, t.match.chosen) for t in b.targets
    ]
