from __future__ import annotations

import io

import numpy as np
import pytest

import cbcimpute as cbci
from cbcimpute.tests.helpers import (
    CASE_STUDY_CSV,
    CASE_STUDY_MEANS,
    CASE_STUDY_MEANS_TXT,
    CASE_STUDY_SCHEMA_YAML,
    load_case_study,
)


@pytest.fixture
def case_study() -> cbci.Dataset:
    return load_case_study()


@pytest.fixture
def case_encoded(case_study) -> cbci.Dataset:
    return cbci.encode(case_study)


@pytest.fixture
def case_split(case_encoded) -> cbci.GroupSplit:
    return cbci.split_groups(case_encoded)


@pytest.fixture
def case_model(case_split) -> cbci.ClusterModel:
    return cbci.kmeans(case_split.complete, 2, cbci.FixedInit(CASE_STUDY_MEANS))


@pytest.fixture
def case_config() -> cbci.ImputeConfig:
    return cbci.ImputeConfig(k=2, init=cbci.FixedInit(CASE_STUDY_MEANS))


@pytest.fixture
def case_files(tmp_path) -> dict[str, str]:
    """Case study input, schema and initial means written to disk."""
    paths = {
        "input": tmp_path / "records.csv",
        "schema": tmp_path / "schema.yaml",
        "means": tmp_path / "means.txt",
    }
    paths["input"].write_text(CASE_STUDY_CSV, encoding="utf-8")
    paths["schema"].write_text(CASE_STUDY_SCHEMA_YAML, encoding="utf-8")
    paths["means"].write_text(CASE_STUDY_MEANS_TXT, encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def csv_stream():
    def make(text: str) -> io.StringIO:
        return io.StringIO(text)

    return make
