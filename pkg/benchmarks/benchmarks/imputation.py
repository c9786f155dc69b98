"""
Benchmarks of imputation runs on synthetic record tables.

Parameterized by:

* Number of records
* Number of attributes
* Share of masked cells
"""

from __future__ import annotations

import io

import cbcimpute
from cbcimpute import FixedInit, GlobalMeanMode, ImputeConfig, MaskSpec
from cbcimpute.tests.helpers import CASE_STUDY_MEANS, load_case_study


def masked_synthetic(n_obs: int, n_vars: int, fraction: float = 0.1):
    data = cbcimpute.make_synthetic(n_obs, n_vars, 3, seed=0, n_categorical=n_vars // 4)
    masked, _ = cbcimpute.mask_dataset(data, MaskSpec(fraction, seed=0))
    return data, masked


class CaseStudySuite:
    def setup(self):
        self.data = load_case_study()
        self.config = ImputeConfig(k=2, init=FixedInit(CASE_STUDY_MEANS))

    def time_impute(self):
        cbcimpute.impute_dataset(self.data, self.config)

    def time_trace(self):
        _, report = cbcimpute.impute_dataset(self.data, self.config)
        cbcimpute.build_trace(report)


class ImputeSuite:
    params = ([500, 2000], [8, 20])
    param_names = ["n_obs", "n_vars"]

    def setup(self, n_obs: int, n_vars: int):
        _, self.masked = masked_synthetic(n_obs, n_vars)
        self.config = ImputeConfig()

    def time_impute(self, *_):
        cbcimpute.impute_dataset(self.masked, self.config)

    def peakmem_impute(self, *_):
        cbcimpute.impute_dataset(self.masked, self.config)

    def time_baseline(self, *_):
        cbcimpute.run_baseline(self.masked, GlobalMeanMode())


class EvaluateSuite:
    params = [0.05, 0.2]
    param_names = ["fraction"]

    def setup(self, fraction: float):
        self.data = cbcimpute.make_synthetic(10_000, 20, 3, seed=0, n_categorical=4)

    def time_evaluate(self, fraction: float):
        cbcimpute.evaluate_methods(
            self.data, MaskSpec(fraction, seed=1), ["cbci", "global_mean_mode", "raw_knn:3"]
        )

    def track_rmse(self, fraction: float):
        result = cbcimpute.evaluate_methods(self.data, MaskSpec(fraction, seed=1), ["cbci"])
        return result.results["cbci"].metrics.numeric_rmse

    track_rmse.unit = "rmse"


class CSVSuite:
    params = [1000, 10000]
    param_names = ["n_obs"]

    def setup(self, n_obs: int):
        _, self.masked = masked_synthetic(n_obs, 10)
        buf = io.StringIO()
        cbcimpute.io.write_csv(self.masked, buf)
        self.text = buf.getvalue()

    def time_write_csv(self, *_):
        cbcimpute.io.write_csv(self.masked, io.StringIO())

    def time_read_csv(self, *_):
        cbcimpute.io.load_csv(io.StringIO(self.text), self.masked.schema)
