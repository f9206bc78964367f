"""Exception hierarchy.

Input problems derive from ``ValueError``; numerical breakdowns derive from
``ArithmeticError``. The CLI maps the two families to exit codes 2 and 1.
"""


class ParameterError(ValueError):
    """Invalid physical parameters."""


class GridError(ValueError):
    """Spectral or time grid that cannot resolve the problem."""


class InsufficientSpanError(GridError):
    """Time grid too short for the requested metrics."""


class ConfigError(ValueError):
    """Malformed run configuration."""


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class SingularSystemError(NumericalError):
    """Rank-deficient Bloch/Floquet linear system."""


class GainDivergenceError(NumericalError):
    """Transfer denominator D vanished (parametric oscillation threshold)."""


class ConvergenceError(NumericalError):
    """Spectral quadrature failed its refinement or truncation check."""


class RegimeError(NumericalError):
    """Approximation regime violated while running in strict mode."""
