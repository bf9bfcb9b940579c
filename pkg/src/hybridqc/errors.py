"""Exception types shared across the simulator."""


class InvalidArgument(ValueError):
    """An argument is outside the domain an operation accepts."""


class UndefinedPhase(ArithmeticError):
    """The overlap whose argument was requested is numerically zero."""


class NoSignal(RuntimeError):
    """Correlators carry no detectable coherence; the phase cannot be estimated."""


class EmptyBatch(RuntimeError):
    """Every pair in a measurement batch was discarded as a no-detection."""


class ConfigError(ValueError):
    """A scenario configuration is malformed or violates an invariant.

    ``field`` names the offending key so the CLI can report it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ReportParseError(ValueError):
    def __init__(self, offset: int, field: str, message: str):
        super().__init__(f"byte {offset}, field {field!r}: {message}")
        self.offset = offset
        self.field = field


class UnsupportedVersion(ReportParseError):
    pass
