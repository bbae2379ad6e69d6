"""Exception types shared across the solver modules."""


class HammersteinError(Exception):
    """Base class for all solver-specific failures."""


class InvalidSpecError(HammersteinError):
    """A nonlinearity violates its shape conditions (e.g. no positive fixed point)."""


class SpecRejectedError(HammersteinError):
    """A kernel spec failed its numerical condition checks."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class DomainViolationError(HammersteinError):
    """An iterate left the admissible range [0, eta]."""


class NonConvergenceError(HammersteinError):
    """The iteration hit max_iter before the stopping tolerance; carries the partial report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NumericalBreakdownError(HammersteinError):
    """A theorem-level inequality (monotonicity, envelope, positivity) was violated beyond noise."""


class HypothesisNotMetError(HammersteinError):
    """A certificate was requested for inputs that do not satisfy its hypotheses."""


class InconsistentReportError(HammersteinError):
    """A solve report contradicts itself (e.g. unit ratio floor with nonzero differences)."""


class ConfigError(HammersteinError):
    """A run configuration is malformed; names the offending key path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
