"""\
Intermediate tables of a pipeline run, in the order the pipeline produces them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from .errors import PipelineError
from .imputation import DonorPool, match_nearest
from .mapping import _ordered_sum
from .pipeline import _aligned_type1

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

    from .._io.report import ReportDocument
    from .mapping import MappingEntry
    from .pipeline import ImputationReport, PipelineState, TargetReport


@dataclass(frozen=True)
class TraceBundle:
    """Named tables and notes, see :func:`build_trace`."""

    tables: dict[str, pd.DataFrame] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, name: str) -> pd.DataFrame:
        return self.tables[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tables)

    def __len__(self) -> int:
        return len(self.tables)

    def add_to(self, doc: ReportDocument) -> None:
        if self.notes:
            doc.add_mapping("notes", self.notes)
        for name, table in self.tables.items():
            doc.add_table(name, table)


def _cluster_columns(k: int) -> list[str]:
    return [f"cluster_{c}" for c in range(1, k + 1)]


def _distance_table(entries: Iterable[MappingEntry], names: dict[int, str], k: int) -> pd.DataFrame:
    return pd.DataFrame(
        [[names[e.record_id], *e.cluster_distances] for e in entries],
        columns=["record", *_cluster_columns(k)],
    )


def _neighbor_table(entries: Iterable[MappingEntry], names: dict[int, str]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            [names[e.record_id], rank, names[n.record_id], n.distance]
            for e in entries
            for rank, n in enumerate(e.neighbors, start=1)
        ],
        columns=["record", "rank", "neighbor", "distance"],
    )


def _mapping_table(entries: Iterable[MappingEntry], names: dict[int, str]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            [names[e.record_id], e.cluster_sum, e.total - e.cluster_sum, e.total]
            for e in entries
        ],
        columns=["record", "cluster_sum", "neighbor_sum", "total"],
    )


def _pairwise(state: PipelineState, members: tuple[int, ...], names: dict[int, str]) -> pd.DataFrame:
    rows = state.g1.X[np.searchsorted(state.g1.record_ids, members)]
    labels = [names[i] for i in members]
    df = pd.DataFrame(cdist(rows, rows), columns=labels)
    df.insert(0, "record", labels)
    return df


def _with_cluster_sum(entry: MappingEntry, cluster_sum: float) -> MappingEntry:
    return replace(
        entry,
        cluster_sum=cluster_sum,
        total=_ordered_sum(cluster_sum, entry.neighbor_distances),
    )


def _type2_modes(
    state: PipelineState, targets: list[TargetReport], names: dict[int, str]
) -> tuple[pd.DataFrame, dict[str, str]]:
    try:
        aligned = _aligned_type1(state.split, state.g1_entries)
    except PipelineError:
        aligned = None
    notes: dict[str, str] = {}
    if aligned is None:
        notes["aligned_type1"] = "unavailable, there are more incomplete than complete records"
    rows = []
    for t in targets:
        pool = DonorPool.from_entries([state.g1_entries[int(i)] for i in t.match.donor_ids])
        masked = _with_cluster_sum(t.entry, _ordered_sum(0.0, t.entry.cluster_distances))
        masked_donor = names[match_nearest(masked, pool).chosen.donor_id]
        if aligned is None:
            rows.append([t.name, masked.cluster_sum, None, masked.total, None, masked_donor, None])
            continue
        other = _with_cluster_sum(t.entry, aligned[t.target_id])
        aligned_donor = names[match_nearest(other, pool).chosen.donor_id]
        rows.append(
            [t.name, masked.cluster_sum, other.cluster_sum, masked.total, other.total, masked_donor, aligned_donor]
        )
        if aligned_donor != masked_donor:
            notes[f"donor_{t.name}"] = (
                f"{masked_donor} with masked type-2 sums, {aligned_donor} with aligned-type1 sums"
            )
    table = pd.DataFrame(
        rows,
        columns=[
            "record",
            "masked_sum",
            "aligned_sum",
            "masked_total",
            "aligned_total",
            "masked_donor",
            "aligned_donor",
        ],
    )
    return table, notes


def build_trace(report: ImputationReport) -> TraceBundle:
    """\
    Tables for every stage of the run behind `report`.

    Tables: `group_split`, `clusters`, `cluster_means`, `cluster_distances_g1`,
    `type1`, `cluster_distances_g2`, `type2`, `type2_modes`,
    `pairwise_cluster_<c>` (one per cluster), `neighbors_g1`, `neighbors_g2`,
    `final_mapping_g1`, `final_mapping_g2`, `donor_ranking_<record>` (one per
    target) and `imputed`.
    Rows are in ascending record id order.

    `notes` states how clusters are numbered and names every incomplete
    record whose donor depends on the :class:`~cbcimpute.Type2Mode`.
    """
    state = report.state
    if state is None:
        msg = "The run did not fit a pipeline, there is nothing to trace."
        raise ValueError(msg)
    dataset = state.dataset
    names = dict(zip(dataset.record_ids.tolist(), dataset.obs_names))
    k = state.k
    g1_entries = [state.g1_entries[i] for i in sorted(state.g1_entries)]
    targets = list(report.targets)
    g2_entries = [t.entry for t in targets if t.entry.record_id not in state.g1_entries]
    incomplete = set(state.split.incomplete.record_ids.tolist())

    tables: dict[str, pd.DataFrame] = {}
    tables["group_split"] = pd.DataFrame(
        [
            [names[i], "G2" if i in incomplete else "G1"]
            for i in sorted(names)
        ],
        columns=["record", "group"],
    )
    tables["clusters"] = pd.DataFrame(
        [
            [c, len(members), ",".join(names[i] for i in members)]
            for c, members in enumerate(state.model.members, start=1)
        ],
        columns=["cluster", "size", "members"],
    )
    means = pd.DataFrame(state.model.means, columns=list(dataset.var_names))
    means.insert(0, "cluster", range(1, k + 1))
    tables["cluster_means"] = means
    tables["cluster_distances_g1"] = _distance_table(g1_entries, names, k)
    tables["type1"] = pd.DataFrame(
        [[names[e.record_id], state.model.cluster_of(e.record_id), e.cluster_sum] for e in g1_entries],
        columns=["record", "cluster", "type1_sum"],
    )
    tables["cluster_distances_g2"] = _distance_table(g2_entries, names, k)
    tables["type2"] = pd.DataFrame(
        [[names[e.record_id], sum(e.cluster_distances), e.cluster_sum] for e in g2_entries],
        columns=["record", "masked_sum", "type2_sum"],
    )
    g2_targets = [t for t in targets if t.entry.record_id not in state.g1_entries]
    tables["type2_modes"], mode_notes = _type2_modes(state, g2_targets, names)
    for c, members in enumerate(state.model.members, start=1):
        tables[f"pairwise_cluster_{c}"] = _pairwise(state, members, names)
    tables["neighbors_g1"] = _neighbor_table(g1_entries, names)
    tables["neighbors_g2"] = _neighbor_table(g2_entries, names)
    tables["final_mapping_g1"] = _mapping_table(g1_entries, names)
    tables["final_mapping_g2"] = _mapping_table(g2_entries, names)
    totals = {e.record_id: e.total for e in g1_entries}
    for t in targets:
        tables[f"donor_ranking_{t.name}"] = pd.DataFrame(
            [
                [rank, names[r.donor_id], totals[r.donor_id], r.difference]
                for rank, r in enumerate(t.match.ranked_donors, start=1)
            ],
            columns=["rank", "donor", "donor_mapping", "difference"],
        )
    tables["imputed"] = pd.DataFrame(
        [
            [
                t.name,
                names[t.match.chosen.donor_id],
                cell.column,
                cell.encoded,
                cell.decoded,
                t.predicted_class,
            ]
            for t in targets
            for cell in t.filled
        ],
        columns=["record", "donor", "column", "encoded", "value", "predicted_class"],
    )
    notes = {
        "cluster_numbering": f"cluster c is the one grown from initial mean c ({state.model.k} clusters, init {report.config['init']})",
        **mode_notes,
    }
    return TraceBundle(tables, notes)
