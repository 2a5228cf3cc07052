"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: :class:`InvalidInput` is a usage
error (2), :class:`ResourceLimit` is a resource error (3) and every other
:class:`CantorDensityError` is a domain error (4).
"""


class CantorDensityError(Exception):
    """Base class for all package errors."""


class InvalidInput(CantorDensityError, ValueError):
    pass


class ResourceLimit(CantorDensityError):
    pass


class NotInCantorSet(CantorDensityError):
    def __init__(self, x, level):
        super().__init__(f"{x} falls in a gap of the Cantor set at level {level}")
        self.x = x
        self.level = level


class OutsideDomain(CantorDensityError):
    pass


class NotInGamma(CantorDensityError):
    pass


class NotQuasiGreedy(CantorDensityError):
    pass


class NotInImage(CantorDensityError):
    pass


class Undecided(CantorDensityError):
    """A depth-bounded check could not reach a verdict."""


class SpectralNonConvergence(CantorDensityError):
    def __init__(self, lower, upper, iterations):
        super().__init__(
            f"power iteration did not converge after {iterations} steps; "
            f"Perron root in [{lower}, {upper}]"
        )
        self.lower = lower
        self.upper = upper
        self.iterations = iterations
