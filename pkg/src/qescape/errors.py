class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class QuadratureError(RuntimeError):
    """A quadrature failed its refinement check."""

    def __init__(self, message, t=None, estimate=None):
        super().__init__(message)
        self.t = t
        self.estimate = estimate


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
