"""Exception types shared across the package."""


class MazerError(Exception):
    """Base class for every error raised deliberately by this package."""


class InvalidParameterError(MazerError, ValueError):
    """A physical parameter is outside its allowed domain."""


class DegenerateThresholdError(MazerError, ValueError):
    """A channel wavenumber is exactly zero, so channel coefficients are undefined.

    These are measure-zero parameter coincidences; sweep around them instead.
    """


class OutOfValidityError(MazerError, ValueError):
    """An operation restricted to resonance (delta = 0) was called off resonance."""


class NumericalDegeneracyError(MazerError, ArithmeticError):
    """A linear system is too ill-conditioned to trust."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class StabilityError(MazerError, ArithmeticError):
    """Propagation lost unitarity beyond the accepted drift budget."""


class PacketSpecError(MazerError, ValueError):
    """A wave-packet specification overlaps the cavity or does not fit the grid."""


class GridMismatchError(MazerError, ValueError):
    """Operands live on different grids or time axes."""


class ConfigError(MazerError, ValueError):
    """A run configuration file is malformed or inconsistent."""
