"""Exception hierarchy shared by all modules."""


class DiamondCavityError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(DiamondCavityError, ValueError):
    """Operator, state, or space shapes do not match."""


class SectorError(DiamondCavityError, ValueError):
    """Operator does not conserve the excitation number of a restricted space."""


class SingularityError(DiamondCavityError, ZeroDivisionError):
    """A closed-form expression was evaluated at one of its poles."""


class SingularSystemError(DiamondCavityError, ArithmeticError):
    """A linear system (e.g. the Sylvester system) is singular or nearly so."""


class MatrixOverflowError(DiamondCavityError, OverflowError):
    """A matrix function produced non-finite entries."""


class EvolutionError(DiamondCavityError, RuntimeError):
    """Time integration failed (step underflow, non-finite state, ...)."""


class UnstableDriftError(DiamondCavityError, ValueError):
    """The Langevin drift matrix has an eigenvalue with non-positive real part."""


class SearchWindowError(DiamondCavityError, ValueError):
    """An optimum was found at the edge of the search window."""


class ConfigError(DiamondCavityError, ValueError):
    """A run configuration is malformed or inconsistent."""
