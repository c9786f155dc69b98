from __future__ import annotations


class SchemaError(ValueError):
    """The schema is malformed or does not match the data."""

    pass


class CSVFormatError(ValueError):
    """Error caused while trying to parse a record table."""

    pass


class PipelineError(ValueError):
    """A pipeline precondition does not hold (e.g. no complete records)."""

    pass


class RecordImputationError(PipelineError):
    """A single record cannot be processed; other records are unaffected."""

    def __init__(self, record_id: int, msg: str):
        super().__init__(msg)
        self.record_id = record_id
