"""Error hierarchy shared by every module in the package."""


class MksysError(Exception):
    """Base class for all toolkit errors."""


class ObjectMismatch(MksysError):
    """Domain/codomain objects of two morphisms do not line up."""


class InstanceMismatch(MksysError):
    """Stochastic and possibilistic kernels were mixed in one composite."""


class BadFactorSelection(MksysError):
    """A factor-index selection is out of range, duplicated, or overlapping."""


class MarginalMismatch(MksysError):
    """Two morphisms that must share a marginal do not."""


class BoundaryMismatch(MksysError):
    """Cells being pasted do not share the required boundary data."""


class PreconditionViolation(MksysError):
    """A construction's hypothesis fails; the message names which one."""


class ShapeMismatch(MksysError):
    """Indexed data has the wrong length or sits over the wrong objects."""


class NaturalityViolation(MksysError):
    """A family of maps fails to commute with the restriction maps."""


class ParseError(MksysError):
    """A model file is syntactically bad or contains dangling references."""


class ValidationError(MksysError):
    """Data parsed fine but violates a structural invariant."""


class UnknownSuite(MksysError):
    """The requested law suite does not exist."""
