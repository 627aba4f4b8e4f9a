"""Exception hierarchy shared by all pipeline phases."""


class OntoforgeError(Exception):
    """Base class for every error raised by this package."""


class IngestError(OntoforgeError):
    pass


class EmptyCorpusError(IngestError):
    pass


class SnapshotParseError(OntoforgeError):
    pass


class SnapshotValidationError(OntoforgeError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class ConlluError(OntoforgeError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UndefinedEvidenceError(OntoforgeError):
    """Unithood evidence is undefined because a constituent never occurs."""


class InconsistentTotalsError(OntoforgeError):
    pass


class UsageError(OntoforgeError, ValueError):
    pass


class ProviderInconsistencyError(OntoforgeError):
    pass


class EmptyInputError(OntoforgeError, ValueError):
    pass


class MetricUnavailableError(OntoforgeError):
    pass


class ConfigError(OntoforgeError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config: " + "; ".join(self.problems))


class DependencyError(OntoforgeError):
    def __init__(self, missing):
        self.missing = missing
        super().__init__(f"missing upstream artifact: {missing}")
