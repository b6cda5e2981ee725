"""Holomorphic maps ``C^n -> C^n`` with exact jets up to order two.

Two concrete representations are supported: polynomial maps
(:class:`PolyMap`) and linear fractional maps (:class:`MobiusMap`).  Both
expose ``value(z)`` and ``jet(z)``; everything downstream works on
:class:`Jet2` objects, so jets can also be combined or composed directly
without building a new map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import PoleAtPoint, SingularDerivative, SingularMatrixError
from .lincomplex import (
    BilinearOp,
    as_matrix,
    as_vector,
    left_mat_apply,
    mat_inverse,
    slot_compose,
    trace_correction,
    trace_vector,
)

POLE_RTOL = 1e-13
POINT_TOL = 1e-12


# --------------------------------------------------------------------------
# jets


@dataclass(frozen=True)
class Jet2:
    """Value, Jacobian matrix and second derivative of a map at ``point``."""

    point: np.ndarray
    value: np.ndarray
    d1: np.ndarray
    d2: BilinearOp

    @property
    def n(self) -> int:
        return self.point.size

    def left_mul(self, m) -> "Jet2":
        """Jet of ``z -> m f(z)`` for a constant matrix ``m``."""
        m = as_matrix(m, self.n)
        return Jet2(self.point, m @ self.value, m @ self.d1, left_mat_apply(m, self.d2))

    def __add__(self, other: "Jet2") -> "Jet2":
        _check_same_point(self, other)
        return Jet2(self.point, self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)

    def __sub__(self, other: "Jet2") -> "Jet2":
        _check_same_point(self, other)
        return Jet2(self.point, self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)

    def moved_to(self, point) -> "Jet2":
        """Same derivatives, relabelled base point (jet of a translate)."""
        return Jet2(as_vector(point, self.n), self.value, self.d1, self.d2)


def _check_same_point(a: Jet2, b: Jet2) -> None:
    if a.n != b.n or np.max(np.abs(a.point - b.point)) > POINT_TOL * max(1.0, np.max(np.abs(a.point))):
        raise ValueError("jets are taken at different points")


def identity_jet(z) -> Jet2:
    z = as_vector(z)
    n = z.size
    return Jet2(z, z.copy(), np.eye(n, dtype=complex), BilinearOp.zeros(n))


def jet_compose(outer: Jet2, inner: Jet2) -> Jet2:
    """Second-order chain rule: the jet of ``outer o inner`` at ``inner.point``.

    ``outer`` must be taken at ``inner.value``.
    """
    if outer.n != inner.n:
        raise ValueError("dimension mismatch")
    gap = np.max(np.abs(outer.point - inner.value))
    if gap > POINT_TOL * max(1.0, float(np.max(np.abs(inner.value)))):
        raise ValueError(f"outer jet taken at the wrong point (gap {gap:.3e})")
    d1 = outer.d1 @ inner.d1
    d2 = slot_compose(outer.d2, inner.d1) + left_mat_apply(outer.d1, inner.d2)
    return Jet2(inner.point, outer.value, d1, BilinearOp.symmetrized(d2.coeffs))


# --------------------------------------------------------------------------
# polynomial maps

Poly = dict  # scalar polynomial: exponent tuple -> complex coefficient


def _poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for a, ca in p.items():
        for b, cb in q.items():
            k = tuple(x + y for x, y in zip(a, b))
            out[k] = out.get(k, 0j) + ca * cb
    return out


class PolyMap:
    """Polynomial map ``z -> sum_alpha c_alpha z^alpha`` with vector coefficients.

    ``terms`` maps multi-indices (length ``n`` tuples of non-negative ints)
    to coefficient vectors of length ``n``.  Repeated multi-indices are
    merged on construction and exact-zero coefficients are dropped.
    """

    def __init__(self, n: int, terms: Union[Mapping, Iterable] = ()):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = int(n)
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[tuple[int, ...], np.ndarray] = {}
        for alpha, coeff in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or any(a < 0 for a in alpha):
                raise ValueError(f"bad multi-index {alpha} for n={n}")
            coeff = as_vector(coeff, n)
            merged[alpha] = merged.get(alpha, np.zeros(n, dtype=complex)) + coeff
        self.terms = {a: c for a, c in sorted(merged.items()) if np.any(c != 0)}
        if self.terms:
            self._exps = np.array(list(self.terms), dtype=int)
            self._coeffs = np.array(list(self.terms.values()), dtype=complex)
        else:
            self._exps = np.zeros((0, n), dtype=int)
            self._coeffs = np.zeros((0, n), dtype=complex)

    def __repr__(self) -> str:
        return f"PolyMap(n={self.n}, terms={len(self.terms)}, degree={self.degree})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMap) or other.n != self.n or other.terms.keys() != self.terms.keys():
            return False
        return all(np.array_equal(self.terms[a], other.terms[a]) for a in self.terms)

    @property
    def degree(self) -> int:
        return int(self._exps.sum(axis=1).max()) if self.terms else 0

    @classmethod
    def identity(cls, n: int) -> "PolyMap":
        return cls.linear(np.eye(n))

    @classmethod
    def linear(cls, a, b=None) -> "PolyMap":
        """``z -> a z + b``."""
        a = as_matrix(a)
        n = a.shape[0]
        terms = [(tuple(int(i == j) for i in range(n)), a[:, j]) for j in range(n)]
        if b is not None:
            terms.append(((0,) * n, as_vector(b, n)))
        return cls(n, terms)

    @classmethod
    def from_components(cls, comps: list[Poly]) -> "PolyMap":
        n = len(comps)
        terms = []
        for k, p in enumerate(comps):
            for alpha, c in p.items():
                v = np.zeros(n, dtype=complex)
                v[k] = c
                terms.append((alpha, v))
        return cls(n, terms)

    def components(self) -> list[Poly]:
        comps: list[Poly] = [{} for _ in range(self.n)]
        for alpha, c in self.terms.items():
            for k in range(self.n):
                if c[k] != 0:
                    comps[k][alpha] = complex(c[k])
        return comps

    def __add__(self, other: "PolyMap") -> "PolyMap":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return PolyMap(self.n, list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other: "PolyMap") -> "PolyMap":
        return self + other.left_mul(-np.eye(self.n))

    def left_mul(self, m) -> "PolyMap":
        """``z -> m f(z)``."""
        m = as_matrix(m, self.n)
        return PolyMap(self.n, [(a, m @ c) for a, c in self.terms.items()])

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """``z -> self(inner(z))`` by explicit polynomial arithmetic."""
        if inner.n != self.n:
            raise ValueError("dimension mismatch")
        n = self.n
        comps = inner.components()
        one: Poly = {(0,) * n: 1 + 0j}
        powers = [[one] for _ in range(n)]
        out = [dict() for _ in range(n)]
        for alpha, c in self.terms.items():
            mono = one
            for i, a in enumerate(alpha):
                while len(powers[i]) <= a:
                    powers[i].append(_poly_mul(powers[i][-1], comps[i]))
                mono = _poly_mul(mono, powers[i][a])
            for k in range(n):
                if c[k] == 0:
                    continue
                for beta, cb in mono.items():
                    out[k][beta] = out[k].get(beta, 0j) + c[k] * cb
        return PolyMap.from_components(out)

    def value(self, z) -> np.ndarray:
        z = as_vector(z, self.n)
        if not self.terms:
            return np.zeros(self.n, dtype=complex)
        mono = np.prod(z[None, :] ** self._exps, axis=1)
        return mono @ self._coeffs

    def jet(self, z) -> Jet2:
        return poly_jet(self, z)


def poly_jet(f: PolyMap, z) -> Jet2:
    """Exact jet by term-wise differentiation of the monomials."""
    z = as_vector(z, f.n)
    n = f.n
    E, C = f._exps, f._coeffs
    if E.shape[0] == 0:
        return Jet2(z, np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex), BilinearOp.zeros(n))

    def mono(exps: np.ndarray) -> np.ndarray:
        return np.prod(z ** np.maximum(exps, 0), axis=-1)

    value = mono(E) @ C
    eye = np.eye(n, dtype=int)
    # first derivatives: d/dz_i z^a = a_i z^(a - e_i)
    Ei = E[:, None, :] - eye[None, :, :]
    dm = E * mono(Ei)  # (T, n)
    d1 = C.T @ dm
    # second derivatives: a_i (a_j - delta_ij) z^(a - e_i - e_j)
    Eij = E[:, None, None, :] - eye[None, :, None, :] - eye[None, None, :, :]
    fac = E[:, :, None] * (E[:, None, :] - eye[None, :, :])
    ddm = fac * mono(Eij)  # (T, n, n)
    d2 = np.einsum("tk,tij->kij", C, ddm)
    return Jet2(z, value, d1, BilinearOp.symmetrized(d2))


# --------------------------------------------------------------------------
# linear fractional maps


class MobiusMap:
    """``z -> (l_1(z)/l_0(z), ..., l_n(z)/l_0(z))`` with ``l_i(z) = a[i,0] + sum_j a[i,j] z_j``.

    ``a`` is the invertible ``(n+1) x (n+1)`` coefficient matrix.
    """

    def __init__(self, a):
        a = as_matrix(a)
        if a.shape[0] < 2:
            raise ValueError("coefficient matrix must be at least 2 x 2")
        try:
            mat_inverse(a)
        except SingularMatrixError as exc:
            raise ValueError(f"linear fractional map has singular coefficient matrix: {exc}") from None
        self.a = a.copy()
        self.a.setflags(write=False)
        self.n = a.shape[0] - 1

    def __repr__(self) -> str:
        return f"MobiusMap(n={self.n})"

    def __eq__(self, other) -> bool:
        return isinstance(other, MobiusMap) and np.array_equal(self.a, other.a)

    @classmethod
    def identity(cls, n: int) -> "MobiusMap":
        return cls(np.eye(n + 1))

    def _linear_forms(self, z: np.ndarray) -> np.ndarray:
        return self.a[:, 0] + self.a[:, 1:] @ z

    def _denominator(self, z: np.ndarray) -> complex:
        ell0 = self.a[0, 0] + self.a[0, 1:] @ z
        scale = max(abs(self.a[0, 0]), float(np.max(np.abs(self.a[0, 1:] * z))), 1e-300)
        if abs(ell0) <= POLE_RTOL * scale:
            raise PoleAtPoint(f"l_0(z) = {ell0:.3e} vanishes at z = {z}")
        return complex(ell0)

    def value(self, z) -> np.ndarray:
        z = as_vector(z, self.n)
        ell0 = self._denominator(z)
        return self._linear_forms(z)[1:] / ell0

    def jet(self, z) -> Jet2:
        return mobius_jet(self, z)


def mobius_jet(t: MobiusMap, z) -> Jet2:
    """Closed quotient-rule formulas.

    With ``T_i = l_i / l_0`` and ``b = grad l_0``:

        dT_i/dz_j        = (a_ij - T_i b_j) / l_0
        d2T_i/dz_j dz_k  = -(dT_i/dz_j b_k + dT_i/dz_k b_j) / l_0
    """
    z = as_vector(z, t.n)
    ell0 = t._denominator(z)
    ell = t._linear_forms(z)
    value = ell[1:] / ell0
    b = t.a[0, 1:]
    d1 = (t.a[1:, 1:] - np.outer(value, b)) / ell0
    d2 = -(np.einsum("ij,k->ijk", d1, b) + np.einsum("ik,j->ijk", d1, b)) / ell0
    return Jet2(z, value, d1, BilinearOp.symmetrized(d2))


HoloMap = Union[PolyMap, MobiusMap, "MapCombination"]


# --------------------------------------------------------------------------
# holomorphic pre-Schwarzian and Schwarzian


def _as_jet(f, z=None) -> Jet2:
    if isinstance(f, Jet2):
        return f
    if z is None:
        raise TypeError("a point is required when passing a map")
    return f.jet(z)


def derivative_inverse(j: Jet2) -> np.ndarray:
    try:
        return mat_inverse(j.d1)
    except SingularMatrixError as exc:
        raise SingularDerivative(f"Jacobian matrix is singular at {j.point}: {exc}") from None


def pre_schwarzian_holo(j: Jet2) -> BilinearOp:
    """``Df^{-1} D^2 f``."""
    p = left_mat_apply(derivative_inverse(j), j.d2)
    return BilinearOp.symmetrized(p.coeffs)


def grad_log_jacobian(f, z=None) -> np.ndarray:
    """Holomorphic gradient of ``log det Df`` by Jacobi's formula.

    Component ``k`` is ``Tr(Df^{-1} D^2f<e_k, .>)``.  The logarithm itself is
    never formed, so no branch has to be chosen.
    """
    j = _as_jet(f, z)
    inv = derivative_inverse(j)
    return np.einsum("jl,lkj->k", inv, j.d2.coeffs)


def schwarzian_holo(f, z=None) -> BilinearOp:
    """``Pf<u,v> - ((grad log J . u) v + (grad log J . v) u) / (n+1)``.

    The pairing with the gradient is bilinear (no conjugation); this is what
    makes the operator agree with the componentwise definition on basis
    vectors.
    """
    j = _as_jet(f, z)
    p = pre_schwarzian_holo(j)
    return trace_correction(p, trace_vector(p))


def oda_components(f, z=None) -> np.ndarray:
    """Array ``S[k, i, j]`` of the componentwise Schwarzians, by explicit loops.

    Deliberately written index-by-index, independent of the vectorised
    operator code, so the two can check each other.
    """
    j = _as_jet(f, z)
    n = j.n
    inv = derivative_inverse(j)
    d2 = j.d2.coeffs
    grad = grad_log_jacobian(j)
    s = np.zeros((n, n, n), dtype=complex)
    for k in range(n):
        for i in range(n):
            for jj in range(n):
                acc = 0j
                for ell in range(n):
                    acc += d2[ell, i, jj] * inv[k, ell]
                corr = (grad[jj] if i == k else 0) + (grad[i] if jj == k else 0)
                s[k, i, jj] = acc - corr / (n + 1)
    return s


class MapCombination:
    """``z -> sum_r m_r f_r(z)`` for constant matrices ``m_r`` and holomorphic ``f_r``.

    Used when a linear combination of maps cannot be represented as a
    single polynomial, e.g. when a linear fractional part is involved.
    """

    def __init__(self, parts: Iterable[tuple]):
        self.parts = [(as_matrix(m), f) for m, f in parts]
        if not self.parts:
            raise ValueError("empty combination")
        dims = {f.n for _, f in self.parts} | {m.shape[0] for m, _ in self.parts}
        if len(dims) != 1:
            raise ValueError("dimension mismatch")
        self.n = dims.pop()

    def __repr__(self) -> str:
        return f"MapCombination(n={self.n}, parts={len(self.parts)})"

    def value(self, z) -> np.ndarray:
        return sum(m @ f.value(z) for m, f in self.parts)

    def jet(self, z) -> Jet2:
        jets = [f.jet(z).left_mul(m) for m, f in self.parts]
        out = jets[0]
        for j in jets[1:]:
            out = out + j
        return out


def combine(*parts) -> "HoloMap":
    """``sum m_r f_r`` as a :class:`PolyMap` when possible, else a :class:`MapCombination`.

    Each part is a ``(matrix, map)`` pair.
    """
    flat = []
    for m, f in parts:
        if isinstance(f, MapCombination):
            flat.extend((as_matrix(m) @ mm, ff) for mm, ff in f.parts)
        else:
            flat.append((as_matrix(m), f))
    if all(isinstance(f, PolyMap) for _, f in flat):
        out = flat[0][1].left_mul(flat[0][0])
        for m, f in flat[1:]:
            out = out + f.left_mul(m)
        return out
    return MapCombination(flat)
