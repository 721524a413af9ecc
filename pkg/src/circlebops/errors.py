"""Exception hierarchy.

Structural failures (validation, missing moments, vanishing Toeplitz
determinants) are kept distinct from identity failures: the CLI maps the
former to exit code 2 and the latter to exit code 1.
"""


class CircleBopsError(Exception):
    """Base class for all structural errors raised by this package."""


class WeightValidationError(CircleBopsError):
    """Weight specification violates a hard invariant (duplicate locations,
    missing origin singularity, strict-mode condition failure)."""


class BranchCutError(CircleBopsError):
    """Evaluation point sits exactly on a declared branch cut."""


class PoleError(CircleBopsError):
    """Weight evaluated at a singular location with negative real exponent."""


class NearCircleError(CircleBopsError):
    """Series evaluation requested inside the exclusion band around |z| = 1
    without an explicit side."""


class WindowError(CircleBopsError):
    """Moment table window too small for the requested operation."""

    def __init__(self, required: int, available: int, what: str = ""):
        self.required = required
        self.available = available
        suffix = f" for {what}" if what else ""
        super().__init__(
            f"moment window K >= {required} required{suffix}, table has K = {available}"
        )


class QuadratureError(CircleBopsError):
    """Adaptive quadrature failed to converge; carries the last residual."""

    def __init__(self, residual: float, points: int):
        self.residual = residual
        self.points = points
        super().__init__(
            f"quadrature did not converge: residual {residual:.3e} at {points} points"
        )


class ExistenceError(CircleBopsError):
    """A Toeplitz determinant I^0_n is numerically zero, so the bi-orthogonal
    system fails to exist at that level."""

    def __init__(self, n: int, value: complex, floor: float):
        self.n = n
        self.value = value
        self.floor = floor
        super().__init__(
            f"bi-orthogonal system does not exist at level {n}: "
            f"|I0_{n}| = {abs(value):.3e} below existence floor {floor:.3e}"
        )


class ConsistencyError(CircleBopsError):
    """Two independent construction routes disagree beyond tolerance."""

    def __init__(self, what: str, deviation: float, tol: float):
        self.deviation = deviation
        super().__init__(f"{what}: max deviation {deviation:.3e} exceeds {tol:.3e}")


class NotSemiClassicalError(CircleBopsError):
    """Operation requires a strict (regular semi-classical) weight."""


class DegenerateLevelError(CircleBopsError):
    """A reflection coefficient needed as a prefactor vanishes at this level."""


class SingularResidueError(CircleBopsError):
    """V(z_j) = 0 (or z_j = 0 where forbidden) in a residue formula."""


class GeometryError(CircleBopsError):
    """A sampling ring or circle intersects the unit circle or a singularity."""
