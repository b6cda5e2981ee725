"""Affine twists ``F = f + A conj(f)`` and the matrix identities around them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.optimize

from .errors import ContractViolation, NotUnitary, SingularMatrixError, SingularTwistedDerivative
from .holomap import Jet2, combine
from .lincomplex import (
    BilinearOp,
    as_matrix,
    left_mat_apply,
    mat_inverse,
    max_coeff_diff,
    op_norm_linear,
)
from .plurimap import PluriJet, PluriMap, _as_pjet, _resolvent, pluri_jet, pre_schwarzian, schwarzian

NORM_MARGIN = 1e-12


@dataclass(frozen=True)
class AffineTwist:
    """The matrix ``A`` of ``z -> z + A conj(z)``.

    The strict constructor insists on ``||A|| < 1``.  ``AffineTwist.relaxed``
    accepts any matrix and only records in ``contract_ok`` whether the norm
    bound holds, so counterexamples can still be reproduced.
    """

    a: np.ndarray
    strict: bool = True
    norm: float = field(init=False)
    contract_ok: bool = field(init=False)

    def __post_init__(self):
        a = as_matrix(self.a).copy()
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        norm = op_norm_linear(a)
        object.__setattr__(self, "norm", norm)
        object.__setattr__(self, "contract_ok", norm < 1.0 - NORM_MARGIN)
        if self.strict and not self.contract_ok:
            raise ContractViolation(f"||A|| = {norm:.15g} is not < 1")

    @classmethod
    def relaxed(cls, a) -> "AffineTwist":
        return cls(a, strict=False)


def _matrix(a) -> np.ndarray:
    return a.a if isinstance(a, AffineTwist) else as_matrix(a)


def _twist_denominator_inverse(omega: np.ndarray, a: np.ndarray) -> np.ndarray:
    try:
        return mat_inverse(np.eye(omega.shape[0]) + a @ omega)
    except SingularMatrixError as exc:
        raise SingularTwistedDerivative(f"I + A w is singular: {exc}") from None


def affine_transform(f, a, z=None) -> PluriJet:
    """Jets of ``H = h + A g`` and ``G = g + conj(A) h``; ``DH = (I + A w) Dh``."""
    pj = _as_pjet(f, z)
    a = _matrix(a)
    _twist_denominator_inverse(pj.omega, a)
    hj = pj.h_jet + pj.g_jet.left_mul(a)
    gj = pj.g_jet + pj.h_jet.left_mul(a.conj())
    return PluriJet.from_jets(hj, gj)


def affine_transform_map(f: PluriMap, a) -> PluriMap:
    a = _matrix(a)
    eye = np.eye(f.n)
    return PluriMap(combine((eye, f.h), (a, f.g)), combine((eye, f.g), (a.conj(), f.h)))


def dilatation_affine(omega, a) -> np.ndarray:
    """``(w + conj(A)) (I + A w)^{-1}``."""
    omega, a = as_matrix(omega), _matrix(a)
    return (omega + a.conj()) @ _twist_denominator_inverse(omega, a)


def dilatation_recover(omega_f, a) -> np.ndarray:
    """``(I - w_F A)^{-1} (w_F - conj(A))``, the inverse of :func:`dilatation_affine`."""
    omega_f, a = as_matrix(omega_f), _matrix(a)
    return mat_inverse(np.eye(omega_f.shape[0]) - omega_f @ a) @ (omega_f - a.conj())


@dataclass(frozen=True)
class FactorizationReport:
    lhs: np.ndarray
    rhs: np.ndarray
    det: float
    residual: float


def factorization_check(omega, a, strict: bool = True) -> FactorizationReport:
    """Both sides of the factorization of ``I - w_F conj(w_F)``.

        I - w_F conj(w_F) = (I - conj(A) A) (I + w A)^{-1} (I - w conj(w)) (I + conj(A) conj(w))^{-1}

    With ``strict`` the norm contract ``||A||, ||w|| < 1`` is enforced and a
    non-positive determinant is an error.
    """
    omega, a = as_matrix(omega), _matrix(a)
    n = omega.shape[0]
    if strict:
        for name, m in (("A", a), ("w", omega)):
            norm = op_norm_linear(m)
            if not norm < 1.0 - NORM_MARGIN:
                raise ContractViolation(f"||{name}|| = {norm:.15g} is not < 1")
    eye = np.eye(n)
    wf = dilatation_affine(omega, a)
    lhs = eye - wf @ wf.conj()
    rhs = (
        (eye - a.conj() @ a)
        @ mat_inverse(eye + omega @ a)
        @ (eye - omega @ omega.conj())
        @ mat_inverse(eye + a.conj() @ omega.conj())
    )
    det = np.linalg.det(lhs)
    report = FactorizationReport(lhs, rhs, float(det.real), float(np.max(np.abs(lhs - rhs))))
    if strict and not report.det > 0:
        raise ContractViolation(f"det(I - w_F conj(w_F)) = {report.det:.6g} is not positive")
    return report


@dataclass(frozen=True)
class InvarianceReport:
    p_defect: float
    s_defect: float
    omega_twisted: np.ndarray


def affine_invariance_check(f, a, z=None) -> InvarianceReport:
    """Coefficient-wise distance between ``P_F, S_F`` and ``P_f, S_f`` for ``F = f + A conj(f)``."""
    pj = _as_pjet(f, z)
    fj = affine_transform(pj, a)
    p_defect = max_coeff_diff(pre_schwarzian(fj), pre_schwarzian(pj))
    s_defect = max_coeff_diff(schwarzian(fj), schwarzian(pj))
    return InvarianceReport(p_defect, s_defect, fj.omega)


@dataclass(frozen=True)
class AffineDeviation:
    h_jet: Jet2
    p_check: BilinearOp


def best_affine_deviation(f: PluriMap, a) -> AffineDeviation:
    """Analytic part of the affine deviation of ``f`` at ``a``, as a jet at the origin.

    ``H_a(z) = Dh(a)^{-1} (I - conj(w(a)) w(a))^{-1} (h(z+a) - conj(w(a)) g(z+a))``
    has ``DH_a(0) = I``, and ``D^2 H_a(0)`` is returned as ``p_check``.
    """
    pj = pluri_jet(f, a)
    m = pj.dh_inv @ _resolvent(pj.omega)
    base = pj.h_jet - pj.g_jet.left_mul(pj.omega.conj())
    hj = base.left_mul(m).moved_to(np.zeros(pj.n))
    return AffineDeviation(hj, BilinearOp.symmetrized(hj.d2.coeffs))


def is_unitary(a, tol: float = 1e-10) -> bool:
    a = as_matrix(a)
    return float(np.max(np.abs(a @ a.conj().T - np.eye(a.shape[0])))) <= tol


def stability_defect(omega, domega: BilinearOp, a) -> BilinearOp:
    """``(A conj(w) conj(A) - conj(w)) (I - w conj(w))^{-1} Dw<., .>``.

    Vanishes exactly when ``h + A conj(g)`` has the same pre-Schwarzian as
    ``h + conj(g)`` at the point.
    """
    omega, a = as_matrix(omega), _matrix(a)
    if not is_unitary(a):
        raise NotUnitary(f"||A A* - I|| = {np.max(np.abs(a @ a.conj().T - np.eye(a.shape[0]))):.3e}")
    n = omega.shape[0]
    wc = omega.conj()
    m = (a @ wc @ a.conj() - wc) @ mat_inverse(np.eye(n) - omega @ wc)
    return left_mat_apply(m, domega)


# --------------------------------------------------------------------------
# sup of the twisted dilatation norm over the unit disk


@dataclass(frozen=True)
class SupNormResult:
    value: float
    argmax: complex
    grid_value: float


def sup_norm_on_disk(
    omega_of: Callable[[complex], np.ndarray],
    a,
    radial: int = 100,
    angular: int = 100,
) -> SupNormResult:
    """``sup ||dilatation_affine(omega_of(z), A)||`` over the closed unit disk.

    A polar grid of ``radial x angular`` points (``10^4`` by default) is
    scanned, then the best boundary angle is refined by golden-section
    search.
    """
    a = _matrix(a)

    def norm_at(z: complex) -> float:
        return op_norm_linear(dilatation_affine(omega_of(z), a))

    radii = np.linspace(0.0, 1.0, radial)
    thetas = np.linspace(-np.pi, np.pi, angular, endpoint=False)
    best, best_z = -np.inf, 0j
    for r in radii:
        for t in thetas:
            z = r * np.exp(1j * t)
            v = norm_at(z)
            if v > best:
                best, best_z = v, z
    grid_best = best
    step = 2 * np.pi / angular
    t0 = float(np.angle(best_z))
    try:
        res = scipy.optimize.minimize_scalar(
            lambda t: -norm_at(np.exp(1j * t)),
            bracket=(t0 - step, t0, t0 + step),
            method="golden",
            tol=1e-10,
        )
    except ValueError:
        # interior maximum: the boundary bracket is not valid
        res = None
    if res is not None and -res.fun > best:
        best, best_z = float(-res.fun), complex(np.exp(1j * res.x))
    return SupNormResult(float(best), complex(best_z), float(grid_best))
