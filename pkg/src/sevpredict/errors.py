"""Exception types shared across the package."""


class SevpredictError(Exception):
    """Domain error. The CLI maps these to exit code 1."""


class SchemaError(SevpredictError):
    """The input file's header does not match the expected schema."""


class RowError(SevpredictError):
    """A single data row is malformed. Carries the 1-based file line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"row {line}: {message}")
        self.line = line
