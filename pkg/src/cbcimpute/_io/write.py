from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

from ..logging import get_logger
from .utils import format_cell

if TYPE_CHECKING:
    from os import PathLike
    from typing import IO

    import pandas as pd

    from .._core.dataset import Dataset

logger = get_logger(__name__)


def _cell_table(dataset: Dataset, missing_token: str) -> pd.DataFrame:
    df = dataset.to_df(decode=True)
    return df.map(lambda v: missing_token if v is None else format_cell(v))


def write_csv(
    dataset: Dataset,
    target: PathLike | str | IO[str],
    *,
    missing_token: str = "?",
) -> None:
    """\
    Write a dataset as CSV in its source column order.

    Categorical cells are written as level names and scaled values in
    original units. Cells that are still missing (and absent labels) are
    written as `missing_token`.

    Parameters
    ----------
    dataset
        Raw or encoded dataset.
    target
        Path or open text stream.
    missing_token
        Text for missing cells.
    """
    table = _cell_table(dataset, missing_token)
    if hasattr(target, "write"):
        table.to_csv(target, index=False, lineterminator="\n")
        return
    path = Path(target)
    logger.info(f"writing {dataset.n_obs} records to {path}")
    with path.open("w", encoding="utf-8", newline="") as f:
        table.to_csv(f, index=False, lineterminator="\n")
