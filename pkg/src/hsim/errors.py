class HsimError(Exception):
    """Base class for all library errors."""


class NumericalError(HsimError):
    """A solver could not produce a result (singular shift, rank collapse, no convergence)."""
