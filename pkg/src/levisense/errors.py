"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: config parse errors -> 2,
physics/validity errors -> 3, numerical divergence -> 4.
"""


class LevisenseError(Exception):
    """Base class for all package errors."""


class InvalidConfigurationError(LevisenseError):
    """A parameter combination is physically or structurally inconsistent."""


class OutOfValidityError(InvalidConfigurationError):
    """Inputs fall outside the validity region of an analytic approximation."""


class CalibrationFailedError(LevisenseError):
    """Displacement calibration could not resolve the thermal peak."""


class IntegrationDivergedError(LevisenseError):
    """The stochastic integrator produced a non-finite state."""

    def __init__(self, step_index: int, message: str | None = None):
        self.step_index = step_index
        super().__init__(message or f"integration diverged at step {step_index}")


class ConfigParseError(LevisenseError):
    """A scenario config file could not be parsed or validated."""

    def __init__(self, message: str, *, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
