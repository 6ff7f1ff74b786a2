"""Exception types shared across the package."""


class FlapescError(Exception):
    """Base class for all package errors."""


class ConfigError(FlapescError):
    """Scenario configuration is missing, malformed, or violates an invariant."""


class DivergenceError(FlapescError):
    """Simulation state became non-finite.

    Carries the name of the offending field and, when raised from a run,
    the index of the last valid telemetry frame.
    """

    def __init__(self, field: str, last_valid_frame: int | None = None):
        self.field = field
        self.last_valid_frame = last_valid_frame
        msg = f"non-finite value in field '{field}'"
        if last_valid_frame is not None:
            msg += f" (last valid frame: {last_valid_frame})"
        super().__init__(msg)


class MeasurementFaultError(FlapescError):
    """Controller received a non-finite objective measurement."""


class LogFormatError(FlapescError):
    """Telemetry CSV is malformed (bad header, ragged rows, non-finite values)."""
