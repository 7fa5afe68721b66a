"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where a formula is defined."""


class IonizationError(DomainError):
    """Photon energy reaches the ionization threshold; the bound-orbit model no longer applies."""


class ConvergenceError(ArithmeticError):
    """An iterative solver did not reach its tolerance."""


class CalibrationError(RuntimeError):
    """Parameter calibration could not produce a finite objective."""
