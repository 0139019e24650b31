"""Exception types raised by the library.

Every error that signals a geometric or numerical precondition failure
derives from RiemcondError so callers (and the CLI) can distinguish
domain problems (exit 1) from I/O problems (exit 2).
"""


class RiemcondError(Exception):
    """Base class for all library-level errors."""


class RankDeficient(RiemcondError):
    """Jacobian loses full column rank: the point is outside the smooth locus."""


class InvalidGeometry(RiemcondError):
    """Construction parameters do not describe a valid geometric object."""


class NotNormal(RiemcondError):
    """A vector claimed to be normal has a tangential component above tolerance."""


class SingularR(RiemcondError):
    """Triangular change-of-basis factor is numerically singular."""


class ZeroNormal(RiemcondError):
    """Principal curvatures are undefined in the direction of a zero normal."""


class NotSPD(RiemcondError):
    """A metric matrix is not symmetric positive definite."""


class ZeroOutput(RiemcondError):
    """Relative condition number is undefined for zero output norm."""


class OutsideDomain(RiemcondError):
    """Point lies outside the admissible domain of a parametrization."""


class DegenerateKernel(RiemcondError):
    """Linear triangulation system has an ambiguous (near two-dimensional) kernel."""


class AtInfinity(RiemcondError):
    """Homogeneous solution cannot be dehomogenized (point at infinity)."""


class DomainEscape(RiemcondError):
    """Solver iterates left the admissible domain and damping retries failed."""


class EmptyInput(RiemcondError):
    """An aggregate was requested over an empty collection."""
