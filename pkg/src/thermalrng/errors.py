"""Exception types shared across the toolkit."""


class ThermalRngError(ValueError):
    """Base class for all toolkit errors."""


class DomainError(ThermalRngError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigurationError(ThermalRngError):
    """A parameter combination is invalid or unsupported."""


class ContractError(ThermalRngError):
    """Caller violated an interface contract (e.g. mismatched lengths)."""


class FormatError(ThermalRngError):
    """A byte stream does not conform to the expected file format."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class CalibrationError(ThermalRngError):
    """Reference noise measurements cannot support a calibration."""


class SecurityError(ThermalRngError):
    """Requested extraction parameters are unsound at any failure bound."""


class ApplicabilityError(ThermalRngError):
    """Input data is too small for the requested statistical procedure."""
