"""Pluriharmonic maps ``f = h + conj(g)`` and their pre-Schwarzian and Schwarzian.

All operators are evaluated pointwise from the order-two jets of ``h`` and
``g``.  Membership in the locally univalent class (``det Dh != 0`` and
``det(I - conj(w) w) != 0``) is checked at the evaluation point only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDilatation, NumericalContractError, SingularDerivative, SingularMatrixError
from .holomap import (
    HoloMap,
    Jet2,
    combine,
    derivative_inverse,
    jet_compose,
    pre_schwarzian_holo,
    schwarzian_holo,
)
from .lincomplex import (
    BilinearOp,
    as_matrix,
    as_vector,
    left_mat_apply,
    mat_inverse,
    max_coeff_diff,
    op_norm_linear,
    right_slot_compose,
    slot_compose,
    trace_correction,
    trace_vector,
)
from .wirtinger import wirtinger_diff, wirtinger_gradient

CLASS_RTOL = 1e-10


@dataclass(frozen=True)
class PluriMap:
    h: HoloMap
    g: HoloMap

    def __post_init__(self):
        if self.h.n != self.g.n:
            raise ValueError(f"h and g have different dimensions ({self.h.n} vs {self.g.n})")

    @property
    def n(self) -> int:
        return self.h.n

    def value(self, z) -> np.ndarray:
        return self.h.value(z) + np.conj(self.g.value(z))

    def jet(self, z) -> "PluriJet":
        return pluri_jet(self, z)

    def left_mul(self, b) -> "PluriMap":
        """``B f = B h + conj(conj(B) g)``."""
        b = as_matrix(b, self.n)
        return PluriMap(combine((b, self.h)), combine((b.conj(), self.g)))

    def twist_antiholomorphic(self, a) -> "PluriMap":
        """``h + A conj(g)``, i.e. ``g -> conj(A) g``."""
        a = as_matrix(a, self.n)
        return PluriMap(self.h, combine((a.conj(), self.g)))


@dataclass(frozen=True)
class PluriJet:
    """Jets of ``h`` and ``g`` at one point plus the dilatation and its derivative.

    ``domega<u, v>`` is the derivative of ``w`` in direction ``u`` applied to
    ``v``; it is not symmetric in general.
    """

    point: np.ndarray
    h_jet: Jet2
    g_jet: Jet2
    dh_inv: np.ndarray
    omega: np.ndarray
    domega: BilinearOp

    @property
    def n(self) -> int:
        return self.point.size

    @classmethod
    def from_jets(cls, h_jet: Jet2, g_jet: Jet2) -> "PluriJet":
        if h_jet.n != g_jet.n or np.any(h_jet.point != g_jet.point):
            raise ValueError("h and g jets must be taken at the same point")
        dh = h_jet.d1
        hadamard = float(np.prod(np.linalg.norm(dh, axis=0)))
        if hadamard == 0.0 or abs(np.linalg.det(dh)) <= CLASS_RTOL * hadamard:
            raise SingularDerivative(f"det Dh vanishes numerically at {h_jet.point}")
        dh_inv = derivative_inverse(h_jet)
        omega = g_jet.d1 @ dh_inv
        # product rule on w Dh = Dg
        dw = right_slot_compose(g_jet.d2 - left_mat_apply(omega, h_jet.d2), dh_inv)
        return cls(h_jet.point, h_jet, g_jet, dh_inv, omega, dw)


def pluri_jet(f: PluriMap, z) -> PluriJet:
    z = as_vector(z, f.n)
    return PluriJet.from_jets(f.h.jet(z), f.g.jet(z))


def _as_pjet(f, z=None) -> PluriJet:
    if isinstance(f, PluriJet):
        return f
    if z is None:
        raise TypeError("a point is required when passing a map")
    return pluri_jet(f, z)


def _resolvent(omega: np.ndarray) -> np.ndarray:
    """``(I - conj(w) w)^{-1}``, refusing points outside the class."""
    n = omega.shape[0]
    m = np.eye(n) - omega.conj() @ omega
    if abs(np.linalg.det(m)) <= CLASS_RTOL * max(1.0, float(np.prod(np.linalg.norm(m, axis=0)))):
        raise DegenerateDilatation("det(I - conj(w) w) vanishes numerically")
    try:
        return mat_inverse(m)
    except SingularMatrixError as exc:
        raise DegenerateDilatation(str(exc)) from None


def dilatation(f, z=None) -> np.ndarray:
    return _as_pjet(f, z).omega


def jacobian(f, z=None) -> float:
    """Real Jacobian ``|det Dh|^2 det(I - w conj(w))``."""
    pj = _as_pjet(f, z)
    n = pj.n
    det = np.linalg.det(np.eye(n) - pj.omega @ pj.omega.conj())
    if abs(det.imag) > 1e-10 * max(1.0, abs(det)):
        raise NumericalContractError(f"det(I - w conj(w)) has imaginary part {det.imag:.3e}")
    return float(abs(np.linalg.det(pj.h_jet.d1)) ** 2 * det.real)


@dataclass(frozen=True)
class SenseReport:
    norm: float
    jacobian: float
    certified: bool


def sense_preserving_bound(f, z=None) -> SenseReport:
    """Norm test ``||w|| < 1`` for sense preservation.

    A certified point must have positive Jacobian; an uncertified one
    reports the Jacobian without any claim, since large dilatations can
    still give ``J > 0``.
    """
    pj = _as_pjet(f, z)
    norm = op_norm_linear(pj.omega)
    jac = jacobian(pj)
    certified = norm < 1.0
    if certified and not jac > 0:
        raise NumericalContractError(f"||w|| = {norm:.6g} < 1 but J = {jac:.6g}")
    return SenseReport(norm, jac, certified)


def u_operator(f, z=None) -> np.ndarray:
    """``U = (I - conj(w) w) Dh``."""
    pj = _as_pjet(f, z)
    n = pj.n
    return (np.eye(n) - pj.omega.conj() @ pj.omega) @ pj.h_jet.d1


def pre_schwarzian(f, z=None) -> BilinearOp:
    """``Ph<.,.> - Dh^{-1} (I - conj(w) w)^{-1} conj(w) Dw<., Dh .>``."""
    pj = _as_pjet(f, z)
    ph = pre_schwarzian_holo(pj.h_jet)
    k = pj.dh_inv @ _resolvent(pj.omega) @ pj.omega.conj()
    corr = left_mat_apply(k, right_slot_compose(pj.domega, pj.h_jet.d1))
    return BilinearOp.symmetrized((ph - corr).coeffs)


def frozen_jet(f, z0=None) -> Jet2:
    """Jet at ``z0`` of the holomorphic map ``h - conj(w(z0)) g``."""
    pj = _as_pjet(f, z0)
    return pj.h_jet - pj.g_jet.left_mul(pj.omega.conj())


def pre_schwarzian_frozen(f, z0=None) -> BilinearOp:
    """Pre-Schwarzian through the holomorphic map ``h - conj(w(z0)) g`` frozen at ``z0``."""
    pj = _as_pjet(f, z0)
    _resolvent(pj.omega)
    return pre_schwarzian_holo(frozen_jet(pj))


def schwarzian(f, z=None) -> BilinearOp:
    """Schwarzian from the pre-Schwarzian alone.

    ``S<u,v> = P<u,v> - ((tau.u) v + (tau.v) u)/(n+1)`` with
    ``tau_k = Tr P<e_k, .>``, the holomorphic gradient of ``log J_f``.
    """
    p = pre_schwarzian(f, z)
    return trace_correction(p, trace_vector(p))


def schwarzian_frozen(f, z0=None) -> BilinearOp:
    return schwarzian_holo(frozen_jet(_as_pjet(f, z0)))


def log_det_gradient(f, z, step: float = 1e-5) -> np.ndarray:
    """Holomorphic gradient of ``log det(I - w conj(w))`` by central differences.

    The determinant is real and positive inside the class, so the real
    logarithm is used and no branch issue arises.
    """
    n = f.n

    def logdet(x):
        w = pluri_jet(f, x).omega
        return np.log(abs(np.linalg.det(np.eye(n) - w @ w.conj()).real))

    return wirtinger_gradient(logdet, z, "holo", step)


def schwarzian_logdet(f: PluriMap, z, step: float = 1e-5) -> BilinearOp:
    """Cross-check of :func:`schwarzian` through ``Sh`` and ``grad log det(I - w conj(w))``.

    Needs a derivative of a real-analytic function, taken by finite
    differences; accurate to roughly ``step**2``.
    """
    pj = pluri_jet(f, z)
    sh = schwarzian_holo(pj.h_jet)
    k = pj.dh_inv @ _resolvent(pj.omega) @ pj.omega.conj()
    mid = left_mat_apply(k, right_slot_compose(pj.domega, pj.h_jet.d1))
    zero = BilinearOp.zeros(pj.n)
    corr = trace_correction(zero, log_det_gradient(f, z, step))
    return BilinearOp((sh - mid + corr).coeffs)


def dbar_pre_schwarzian_norm(f: PluriMap, z, step: float = 1e-4) -> float:
    """Largest coefficient of ``d/dzbar_k P_f`` over ``k``, by central differences.

    One Richardson step on steps ``step`` and ``2 step`` removes the
    ``O(step^2)`` truncation term, which for a holomorphic ``P_f`` with large
    third derivatives would otherwise dominate.  Zero up to ``O(step^4)``
    exactly when ``P_f`` is holomorphic near ``z``.
    """
    z = as_vector(z, f.n)

    def coeffs(x):
        return pre_schwarzian(f, x).coeffs

    best = 0.0
    for k in range(f.n):
        fine = wirtinger_diff(coeffs, z, k, "antiholo", step)
        coarse = wirtinger_diff(coeffs, z, k, "antiholo", 2 * step)
        best = max(best, float(np.max(np.abs((4 * fine - coarse) / 3))))
    return best


def omega_conj_product_norm(f: PluriMap, points) -> float:
    """``max ||w conj(w)||`` over sample points; zero certifies a holomorphic ``P_f``."""
    best = 0.0
    for p in points:
        w = pluri_jet(f, p).omega
        best = max(best, op_norm_linear(w @ w.conj()))
    return best


def transport(t: BilinearOp, m) -> BilinearOp:
    """``m^{-1} T<m ., m .>``."""
    m = as_matrix(m, t.n)
    return left_mat_apply(mat_inverse(m), slot_compose(t, m))


@dataclass(frozen=True)
class ChainRuleReport:
    lhs: BilinearOp
    rhs: BilinearOp
    defect: float
    s_lhs: BilinearOp
    s_rhs: BilinearOp
    s_defect: float


def composite_jet(f: PluriMap, phi: HoloMap, z) -> PluriJet:
    """Jets of ``h o phi`` and ``g o phi`` at ``z``, assembled by the jet chain rule."""
    phi_jet = phi.jet(z)
    w = phi_jet.value
    return PluriJet.from_jets(jet_compose(f.h.jet(w), phi_jet), jet_compose(f.g.jet(w), phi_jet))


def chain_rule_check(f: PluriMap, phi: HoloMap, z) -> ChainRuleReport:
    """Compare ``P_{f o phi}`` with ``Dphi^{-1} P_f(phi)<Dphi ., Dphi .> + P phi``.

    The same is done for the Schwarzian with ``S phi`` in place of ``P phi``.
    """
    z = as_vector(z, f.n)
    phi_jet = phi.jet(z)
    w = phi_jet.value
    comp = composite_jet(f, phi, z)
    lhs = pre_schwarzian(comp)
    rhs = transport(pre_schwarzian(f, w), phi_jet.d1) + pre_schwarzian_holo(phi_jet)
    s_lhs = schwarzian(comp)
    s_rhs = transport(schwarzian(f, w), phi_jet.d1) + schwarzian_holo(phi_jet)
    return ChainRuleReport(
        lhs, rhs, max_coeff_diff(lhs, rhs), s_lhs, s_rhs, max_coeff_diff(s_lhs, s_rhs)
    )


def log_jacobian_gradient(f, z=None) -> np.ndarray:
    """Holomorphic gradient of ``log J_f``: the trace vector of ``P_f``."""
    return trace_vector(pre_schwarzian(f, z))


__all__ = [
    "ChainRuleReport",
    "PluriJet",
    "PluriMap",
    "SenseReport",
    "chain_rule_check",
    "composite_jet",
    "dbar_pre_schwarzian_norm",
    "dilatation",
    "frozen_jet",
    "jacobian",
    "log_det_gradient",
    "log_jacobian_gradient",
    "omega_conj_product_norm",
    "pluri_jet",
    "pre_schwarzian",
    "pre_schwarzian_frozen",
    "schwarzian",
    "schwarzian_frozen",
    "schwarzian_logdet",
    "sense_preserving_bound",
    "transport",
    "u_operator",
]
