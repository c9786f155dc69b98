from __future__ import annotations

import io
import math
from typing import TYPE_CHECKING

import numpy as np

from cbcimpute import AttributeDescriptor, Dataset, Schema
from cbcimpute._core.dataset import _gen_obs

if TYPE_CHECKING:
    from collections.abc import Sequence


# Medical-record case study: four attributes, two classes, two missing cells.
CASE_STUDY_CSV = """\
Record,Z1,Z2,Z3,Z4,Class
MR1,K11,5,J31,10,C-1
MR2,K13,7,J31,5,C-1
MR3,K11,7,?,7,C-1
MR4,K12,5,J31,10,C-1
MR5,K13,3,J32,?,C-2
MR6,K12,9,J31,10,C-2
MR7,K11,5,J32,3,C-2
MR8,K13,6,J32,7,C-2
MR9,K12,6,J32,10,C-2
"""

CASE_STUDY_SCHEMA_YAML = """\
class_attribute: Class
id_attribute: Record
missing_tokens: ["?", ""]
attributes:
  - {name: Z1, kind: categorical}
  - Z2
  - {name: Z3, kind: categorical}
  - Z4
"""

# Cluster means the case study converges to, written as an initial means file.
CASE_STUDY_MEANS = np.array(
    [
        [1.75, 6.25, 1.25, 10.0],
        [7 / 3, 6.0, 5 / 3, 5.0],
    ]
)
CASE_STUDY_MEANS_TXT = """\
# cluster 1: MR1, MR4, MR6, MR9
1.75,6.25,1.25,10
# cluster 2: MR2, MR7, MR8
2.3333333333333335,6,1.6666666666666667,5
"""

CASE_STUDY_ENCODED = {
    "MR1": (1, 5, 1, 10),
    "MR2": (3, 7, 1, 5),
    "MR3": (1, 7, None, 7),
    "MR4": (2, 5, 1, 10),
    "MR5": (3, 3, 2, None),
    "MR6": (2, 9, 1, 10),
    "MR7": (1, 5, 2, 3),
    "MR8": (3, 6, 2, 7),
    "MR9": (2, 6, 2, 10),
}

CASE_STUDY_TYPE1 = {
    "MR1": 6.791479,
    "MR2": 6.588532,
    "MR4": 6.452246,
    "MR6": 8.651031,
    "MR7": 9.814071,
    "MR8": 5.479147,
    "MR9": 5.851329,
}

CASE_STUDY_MAPPING_G1 = {
    "MR1": 9.523530,
    "MR2": 12.643573,
    "MR4": 8.866460,
    "MR6": 15.813309,
    "MR7": 18.0022,
    "MR8": 12.511213,
    "MR9": 8.997594,
}


def case_study_schema() -> Schema:
    return Schema.from_dict(
        {
            "class_attribute": "Class",
            "id_attribute": "Record",
            "missing_tokens": ["?", ""],
            "attributes": [
                {"name": "Z1", "kind": "categorical"},
                "Z2",
                {"name": "Z3", "kind": "categorical"},
                "Z4",
            ],
        }
    )


def load_case_study(text: str = CASE_STUDY_CSV) -> Dataset:
    from cbcimpute.io import load_csv

    return load_csv(io.StringIO(text), case_study_schema())


def gen_dataset(
    rng: np.random.Generator,
    n_obs: int,
    n_vars: int,
    *,
    n_classes: int = 2,
    n_categorical: int = 0,
    missing_rate: float = 0.2,
    n_levels: int = 3,
) -> Dataset:
    """\
    Random encoded dataset with continuous numeric columns.

    At least one record is complete and no record is entirely missing.
    """
    X = rng.normal(size=(n_obs, n_vars)) * rng.uniform(0.5, 5, size=n_vars)
    first_cat = n_vars - n_categorical
    X[:, first_cat:] = rng.integers(1, n_levels + 1, size=(n_obs, n_categorical))
    holes = rng.random((n_obs, n_vars)) < missing_rate
    holes[0] = False
    for i in np.flatnonzero(holes.all(axis=1)):
        holes[i, rng.integers(n_vars)] = False
    X[holes] = np.nan
    levels = tuple(f"L{i}" for i in range(1, n_levels + 1))
    schema = Schema(
        [
            AttributeDescriptor(f"A{j}", "categorical", levels)
            if j >= first_cat
            else AttributeDescriptor(f"A{j}")
            for j in range(n_vars)
        ],
        class_attribute="label",
    )
    labels = [f"c{c}" for c in rng.integers(n_classes, size=n_obs)]
    return Dataset(X, schema=schema, obs=_gen_obs(n_obs, labels=labels), encoded=True)


def _dist(a: Sequence[float | None], b: Sequence[float]) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b) if x is not None))


def brute_force_pipeline(
    rows: Sequence[Sequence[float | None]],
    labels: Sequence[str | None],
    *,
    init_means: Sequence[Sequence[float]],
    neighbor_count: int,
    max_iter: int = 100,
) -> dict[str, dict]:
    """\
    Straight-line reference of the whole pipeline with copy-donor filling.

    Record ids are `1..len(rows)`; `None` marks a missing cell.
    """
    k = len(init_means)
    ids = list(range(1, len(rows) + 1))
    row = {i: list(rows[i - 1]) for i in ids}
    g1 = [i for i in ids if all(v is not None for v in row[i])]
    g2 = [i for i in ids if i not in g1]

    def nearest_mean(i, means):
        best, best_d = 0, _dist(row[i], means[0])
        for c in range(1, k):
            d = _dist(row[i], means[c])
            if d < best_d:
                best, best_d = c, d
        return best

    means = [list(m) for m in init_means]
    assign = {i: nearest_mean(i, means) for i in g1}
    n_iter = 0
    while True:
        for c in range(k):
            if c in assign.values():
                continue
            sizes = {c2: list(assign.values()).count(c2) for c2 in range(k)}
            pick, pick_d = None, -1.0
            for i in g1:
                if sizes[assign[i]] > 1 and _dist(row[i], means[assign[i]]) > pick_d:
                    pick, pick_d = i, _dist(row[i], means[assign[i]])
            assign[pick] = c
        new_means = []
        for c in range(k):
            members = [i for i in g1 if assign[i] == c]
            mean = []
            for j in range(len(row[g1[0]])):
                total = 0.0
                for i in members:
                    total += row[i][j]
                mean.append(total / len(members))
            new_means.append(mean)
        means = new_means
        n_iter += 1
        new_assign = {i: nearest_mean(i, means) for i in g1}
        if new_assign == assign or n_iter >= max_iter:
            break
        assign = new_assign

    totals = {}
    for i in g1:
        total = 0.0
        for c in range(k):
            total += _dist(row[i], means[c])
        others = sorted(
            (_dist(row[i], row[o]), o) for o in g1 if o != i and assign[o] == assign[i]
        )
        for d, _ in others[:neighbor_count]:
            total += d
        totals[i] = total
    donors, filled, classes = {}, {}, {}
    for i in g2:
        total = 0.0
        for c in range(k):
            total += _dist(row[i], means[c])
        near = sorted((_dist(row[i], row[o]), o) for o in g1)
        for d, _ in near[:neighbor_count]:
            total += d
        totals[i] = total
        _, donor = min((abs(totals[o] - total), o) for o in g1)
        donors[i] = donor
        filled[i] = [row[donor][j] if v is None else v for j, v in enumerate(row[i])]
        classes[i] = labels[donor - 1]
    return {
        "assignment": {i: assign[i] + 1 for i in g1},
        "means": {c + 1: means[c] for c in range(k)},
        "totals": totals,
        "donors": donors,
        "filled": filled,
        "classes": classes,
    }


def assert_dataset_equal(a: Dataset, b: Dataset, *, exact: bool = True) -> None:
    assert a.schema == b.schema
    np.testing.assert_array_equal(a.record_ids, b.record_ids)
    assert list(a.labels) == list(b.labels)
    assert list(a.obs_names) == list(b.obs_names)
    if exact:
        np.testing.assert_array_equal(a.X, b.X)
    else:
        np.testing.assert_allclose(a.X, b.X, rtol=1e-12)
