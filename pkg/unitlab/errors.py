"""Exception hierarchy shared by the lab.

Every error carries the process exit code the command line reports for it.
"""


class LabError(Exception):
    """Base class for all errors raised by unitlab."""

    exit_code = 1


class DimensionMismatchError(LabError, ValueError):
    """Two geometric values of different dimension were combined."""


class NotLatticeError(LabError, ValueError):
    """A point with a non-integer coordinate was given where Z^d is required."""


class InstanceFormatError(LabError, ValueError):
    """An instance file could not be parsed."""


class ReportFormatError(LabError, ValueError):
    """A CSV report could not be parsed."""


class ConfigError(LabError, ValueError):
    """A configuration file could not be loaded."""


class UnknownFamilyError(LabError, KeyError):
    """An algorithm, instance family or adversary name is not registered."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep messages readable.
        return str(self.args[0]) if self.args else ""


class ProtocolViolation(LabError):
    """An online algorithm broke the rules of the online model."""

    exit_code = 2


class InvariantViolation(LabError, AssertionError):
    """A property guaranteed by the analysis failed to hold during a run."""

    exit_code = 2


class OracleLimitError(LabError):
    """The instance is too large for the exact offline oracle."""

    exit_code = 3
