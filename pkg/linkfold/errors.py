"""Exception hierarchy. `exit_code` is what the CLI returns for each family."""
from typing import Optional


class LinkfoldError(Exception):
    exit_code = 1


# --- input (exit 2) ---

class InputError(LinkfoldError, ValueError):
    exit_code = 2


class MalformedInput(InputError):
    pass


class NonPositiveLength(InputError):
    pass


class TooFewBars(InputError):
    pass


class LinkageMismatch(InputError):
    pass


class InvalidFoldLengths(InputError):
    pass


class ConstraintViolation(InputError):
    pass


# --- geometry (exit 2: the inputs were degenerate) ---

class GeometryError(LinkfoldError, ValueError):
    exit_code = 2


class DegenerateFrame(GeometryError):
    pass


class DegenerateAngle(GeometryError):
    pass


class DegenerateSegment(GeometryError):
    pass


class NoSolution(GeometryError):
    pass


class Coincident(GeometryError):
    pass


# --- construction (exit 3) ---

class LayoutFailure(LinkfoldError):
    exit_code = 3


# --- certificates (exit 4) ---

class CertificateError(LinkfoldError):
    exit_code = 4


class UndersampledLoop(CertificateError):
    pass


class NonIntegralWinding(CertificateError):
    pass


class ProjectionError(LinkfoldError):
    exit_code = 4


class NoConvergence(ProjectionError):
    pass


class SingularGeometry(ProjectionError):
    pass


class InitialResidualTooLarge(ProjectionError, ValueError):
    pass


# --- resources (exit 5) ---

class TooLarge(LinkfoldError):
    exit_code = 5

    def __init__(self, count: int, budget: int, dimension: Optional[int] = None):
        self.count = count
        self.budget = budget
        self.dimension = dimension
        super().__init__(f"Filtration exceeds the simplex budget: {count} > {budget}")
