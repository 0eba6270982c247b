class SubspaceGapError(Exception):
    pass


class PreconditionError(SubspaceGapError, ValueError):
    pass


class DegenerateInputError(SubspaceGapError, ValueError):
    def __init__(self, message: str, columnIndex: int | None = None):
        super().__init__(message)
        self.columnIndex = columnIndex


class ConfigError(SubspaceGapError):
    pass


class UsageError(SubspaceGapError):
    pass
