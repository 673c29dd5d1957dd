"""Exception hierarchy shared by all modules.

Every error that carries a counterexample exposes it on the ``witness``
attribute so callers (and the CLI) can print exactly what went wrong.
"""


class CoarsedimError(Exception):
    """Base class for all library errors."""


class InputError(CoarsedimError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class MetricAxiomError(InputError):
    """A distance table violates a metric axiom; ``witness`` holds the
    offending pair or triple of point indices together with the values."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InvariantViolation(CoarsedimError):
    """A construction failed one of its self-checks (CLI exit code 1)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CapExceeded(CoarsedimError):
    """A resource cap (ball size, cluster count, word count) was hit
    (CLI exit code 3)."""


class StageFailure(CoarsedimError):
    """A multi-stage pipeline failed; ``stage`` names the failing step and
    ``details`` holds the numbers that made it fail."""

    def __init__(self, stage, message, details=None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.details = details or {}
