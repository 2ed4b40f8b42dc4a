class StepcheckError(Exception):
    """Base class for errors raised by this package."""


class ConstraintError(StepcheckError, ValueError):
    """Malformed constraint set or violated precondition."""


class ResourceLimitError(StepcheckError):
    """A configured work cap (terms, search nodes, time) was exceeded."""
