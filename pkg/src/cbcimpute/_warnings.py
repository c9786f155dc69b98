from __future__ import annotations


class ConvergenceWarning(UserWarning):
    """Raised when Lloyd iterations stop at `max_iter` without a fixed point."""

    pass


class NeighborCountWarning(UserWarning):
    """\
    Raised when a record has fewer neighbors available than requested.

    Examples
    ========
    A record alone in its cluster has no intra-cluster neighbors,
    so its mapping distance is its type-1 sum.
    """

    pass


class MaskShortfallWarning(UserWarning):
    """Raised when `max_per_record` prevents masking the requested number of cells."""

    pass


class UnlabeledRecordWarning(UserWarning):
    """Raised when unlabeled records are skipped where labels are required."""

    pass
