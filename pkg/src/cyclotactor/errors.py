"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so every failure a user can trigger
should surface as one of the classes below.
"""


class CyclotactorError(Exception):
    """Base class for all package errors."""


class ParameterError(CyclotactorError, ValueError):
    """Invalid model parameters or arguments."""


class RangeError(CyclotactorError, ValueError):
    """A query fell outside a table's axis range."""

    def __init__(self, axis: str, value: float, lo: float, hi: float):
        self.axis = axis
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(f"{axis} {value!r} outside [{lo!r}, {hi!r}]")


class SaturationError(CyclotactorError, ValueError):
    """Requested force is not achievable at the given distance.

    Carries the boundary current the request was clamped to and the force
    actually achievable there, so callers can degrade instead of crashing.
    """

    def __init__(self, requested: float, current: float, force: float):
        self.requested = requested
        self.current = current
        self.force = force
        side = "above" if requested > force else "below"
        super().__init__(
            f"saturation: force {requested!r} N is {side} achievable range; "
            f"clamped to I={current!r} A giving {force!r} N"
        )


class FormatError(CyclotactorError, ValueError):
    """A text file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ConfigError(CyclotactorError, ValueError):
    """Scenario configuration failed to parse or validate.

    ``problems`` lists every offending key so users can fix them in one pass.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class SimulationAbort(CyclotactorError, RuntimeError):
    """The simulation diverged or hit an inconsistent state."""
