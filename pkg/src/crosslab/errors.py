class CrosslabError(Exception):
    pass


class ZeroVector(CrosslabError, ValueError):
    """Operation undefined at the origin."""


class DomainError(CrosslabError, ValueError):
    pass


class InvalidState(CrosslabError, ValueError):
    pass


class InvalidTarget(CrosslabError, ValueError):
    pass


class EmptySample(CrosslabError, ValueError):
    pass


class InsufficientConditionedSample(CrosslabError):
    def __init__(self, found: int, required: int):
        super().__init__(f"only {found} conditioned excursions (need {required})")
        self.found = found
        self.required = required


class ConfigError(CrosslabError, ValueError):
    pass


class TruncationWarning(UserWarning):
    """Unassigned tail mass exceeded the warning threshold."""


class AuditViolation(CrosslabError):
    """A returned excursion broke an exact per-path identity."""

    def __init__(self, report):
        super().__init__(f"path audit failed: {report.summary()}")
        self.report = report
