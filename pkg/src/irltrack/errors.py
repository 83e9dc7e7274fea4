"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A config file, catalog lookup, or constructor argument is invalid."""


class NumericFault(RuntimeError):
    """A computation produced NaN/Inf.

    Carries enough context (time, offending component, partial telemetry)
    for post-mortem analysis.
    """

    def __init__(self, message, t=None, component=None, telemetry=None):
        super().__init__(message)
        self.t = t
        self.component = component
        self.telemetry = telemetry


class OracleFailure(RuntimeError):
    """A ground-truth solver (e.g. the Riccati oracle) did not converge."""


class NotReady(RuntimeError):
    """The reinforcement buffer does not yet span a full window."""
