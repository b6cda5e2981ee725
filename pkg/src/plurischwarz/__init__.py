"""Pre-Schwarzian and Schwarzian derivatives of pluriharmonic mappings in C^n."""

from .errors import (
    ContractViolation,
    DegenerateDilatation,
    MapParseError,
    NotUnitary,
    NumericalContractError,
    PoleAtPoint,
    RejectionExhausted,
    SingularDerivative,
    SingularMatrixError,
    SingularTwistedDerivative,
)
from .holomap import Jet2, MapCombination, MobiusMap, PolyMap, jet_compose, oda_components, schwarzian_holo
from .lincomplex import BilinearOp, mat_inverse, op_norm_bilinear, op_norm_linear
from .plurimap import PluriJet, PluriMap, jacobian, pre_schwarzian, schwarzian

__version__ = "0.1.0"
