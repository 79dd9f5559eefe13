"""
Custom exceptions for the discount term-structure engine.

Every error carries a short code so the CLI can map it to an
exit status and a one-line message.
"""


class DiscountTSError(Exception):
    """Base exception for all engine errors."""

    def __init__(self, message: str, code: str = "UNKNOWN_ERROR"):
        self.message = message
        self.code = code
        super().__init__(self.message)

    def __str__(self):
        return f"[{self.code}] {self.message}"


class ConfigError(DiscountTSError):
    """Model configuration or settings are invalid."""

    def __init__(self, message: str):
        super().__init__(message, code="CONFIG_ERROR")


class InvalidArgumentError(DiscountTSError):
    """Non-finite input, negative time or an invalid parameter."""

    def __init__(self, message: str):
        super().__init__(message, code="INVALID_ARGUMENT")


class DimensionError(DiscountTSError):
    """Array shapes do not agree."""

    def __init__(self, message: str):
        super().__init__(message, code="DIMENSION_ERROR")


class DomainError(DiscountTSError):
    """Point lies outside the domain an operation is defined on."""

    def __init__(self, message: str):
        super().__init__(message, code="DOMAIN_ERROR")


class DegenerateCurveError(DiscountTSError):
    """Bond price is not positive where a ratio by it is needed."""

    def __init__(self, message: str):
        super().__init__(message, code="DEGENERATE_CURVE")


class GridError(DiscountTSError):
    """Maturity grid does not fit the simulation lattice."""

    def __init__(self, message: str):
        super().__init__(message, code="GRID_ERROR")


class SimulationError(DiscountTSError):
    """A simulation block failed."""

    def __init__(self, simulator_name: str, message: str):
        self.simulator_name = simulator_name
        super().__init__(
            f"Simulator '{simulator_name}': {message}",
            code="SIMULATION_ERROR",
        )


class ExplosionError(DiscountTSError):
    """
    Finite-time blow-up of the quadratic-drift dynamics.

    `time` is the blow-up (or critical) time, `path` the first path
    that exploded (None for deterministic flows), `ensemble` the
    partial trajectory when a simulation produced one.
    """

    def __init__(self, message: str, time: float, path: int | None = None, ensemble=None):
        self.time = time
        self.path = path
        self.ensemble = ensemble
        super().__init__(message, code="EXPLOSION")
