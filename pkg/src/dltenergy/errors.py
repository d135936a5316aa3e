"""Exception hierarchy.

Input errors (bad files, bad configs, unit mismatches) and data-invariant
violations are kept apart so the CLI can map them to distinct exit codes.
"""


class DltEnergyError(ValueError):
    pass


class InputError(DltEnergyError):
    """Malformed or inconsistent input: files, configs, arguments."""


class TraceParseError(InputError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        self.reason = message
        super().__init__(self._format())

    def _format(self) -> str:
        where = self.source or "<trace>"
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.reason}"

    def with_source(self, source: str) -> "TraceParseError":
        return TraceParseError(self.reason, self.line, source)


class ConfigError(InputError):
    """A configuration document violates its schema."""


class UnitMismatchError(InputError):
    """Quantities of different dimensions were combined."""


class InvariantViolation(DltEnergyError):
    """Measured data contradicts a model invariant."""


class NegativeNormalizationError(InvariantViolation):
    def __init__(self, what: str, value_w: float, floor_w: float):
        self.what = what
        self.value_w = value_w
        self.floor_w = floor_w
        super().__init__(
            f"{what}: {value_w!r} W is below its baseline {floor_w!r} W"
        )


class NonUniformError(InvariantViolation):
    """Per-node division attempted without a passing uniformity check."""
