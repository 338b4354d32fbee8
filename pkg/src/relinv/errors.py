"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operator or factor dimensions do not agree."""


class KinematicsError(ValueError):
    """A four-momentum or Lorentz matrix violates its kinematic preconditions."""


class NumericalFailure(ArithmeticError):
    """A decomposition residual exceeded its tolerance."""


class SuperselectionError(ValueError):
    """A state superposes sectors that a superselection rule forbids mixing."""


class InvarianceWarning(UserWarning):
    """An encoding was built but is not invariant under the collective action."""
