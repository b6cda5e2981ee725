"""Exception hierarchy.

Every numerical failure derives from :class:`NumericalContractError` so the
CLI can map the whole family onto a single exit code.
"""


class PluriSchwarzError(Exception):
    pass


class MapParseError(PluriSchwarzError, ValueError):
    """A map file or point string could not be parsed."""


class NumericalContractError(PluriSchwarzError, ArithmeticError):
    pass


class SingularMatrixError(NumericalContractError):
    """LU pivot fell below the relative singularity threshold."""


class SingularDerivative(NumericalContractError):
    """Jacobian matrix of a holomorphic map is singular at the point."""


class PoleAtPoint(NumericalContractError):
    """Point lies on the polar hyperplane of a linear fractional map."""


class DegenerateDilatation(NumericalContractError):
    """``I - conj(w) w`` is singular: the map leaves the locally univalent class."""


class SingularTwistedDerivative(NumericalContractError):
    """``I + A w`` is singular, so the twisted map has no dilatation."""


class ContractViolation(NumericalContractError):
    """Norm preconditions of a contractive-twist check are not met."""


class NotUnitary(NumericalContractError):
    pass


class RejectionExhausted(NumericalContractError):
    """Random instance generator ran out of attempts."""
