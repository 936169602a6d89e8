"""Exception hierarchy shared by the solver, the oracle and the CLI."""


class KerrMagError(Exception):
    """Base class for all package errors."""


class InvalidInputError(KerrMagError, ValueError):
    """A configuration or argument violates its documented invariants."""


class NumericalFailure(KerrMagError, RuntimeError):
    """A numerical routine failed to reach its tolerance.

    ``diagnostics`` carries whatever the routine knew when it gave up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NoThresholdError(NumericalFailure):
    """No sign change of the bistability condition inside the search interval."""


class InvalidFixedPointError(NumericalFailure):
    """Stability was requested for a state that is not a fixed point."""


class DivergenceError(NumericalFailure):
    """Time integration blew up."""


class SweepError(NumericalFailure):
    """Branch tracking found no stable root at some sample."""
