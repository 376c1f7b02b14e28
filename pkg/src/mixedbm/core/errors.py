# mixedbm.core.errors

from typing import Optional, Sequence


class MixedBMError(Exception):
    """Base class of every error raised by mixedbm"""


class DomainError(MixedBMError, ValueError):
    """An argument lies outside the declared domain of an operation"""


class SingularityError(DomainError):
    """Evaluation at a singular point (Y_n and H_n at the origin)"""


class SpecialFunctionOverflow(DomainError):
    """A cylinder function is not representable in double precision"""


class UnsupportedShapeError(DomainError):
    """The requested computation only exists for circular boundaries"""


class NearFieldError(DomainError):
    """Targets too close to the boundary for plain trapezoid evaluation"""

    def __init__(self, message: str, indices: Sequence[int]):
        super().__init__(message)
        self.indices = list(indices)


class ConfigError(MixedBMError, ValueError):
    """Invalid or unreadable run configuration"""


class NumericalFailure(MixedBMError, RuntimeError):
    """A numerical procedure failed on valid input"""


class SolverError(NumericalFailure):
    """The block system is singular to working precision"""

    def __init__(self, message: str, condition_estimate: float):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class ContourHitError(NumericalFailure):
    """A contour quadrature node sits on (or numerically at) an eigenvalue"""

    def __init__(self, message: str, node: complex, tile: Optional[int] = None):
        super().__init__(message)
        self.node = node
        self.tile = tile
