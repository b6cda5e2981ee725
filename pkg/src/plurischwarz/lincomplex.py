"""Dense complex linear algebra and the symmetric bilinear operators built on it.

Vectors and matrices are plain ``numpy`` complex arrays.  Bilinear maps
``C^n x C^n -> C^n`` are wrapped in :class:`BilinearOp`, whose coefficient
array is laid out as ``c[k, i, j]`` so that

    T<u, v>_k = sum_{i,j} c[k, i, j] u_i v_j.

Every array handed out by this module is marked read-only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError

SINGULAR_RTOL = 1e-13
SYMMETRY_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=complex).reshape(-1)
    if v.size == 0:
        raise ValueError("empty vector")
    if n is not None and v.size != n:
        raise ValueError(f"expected a vector of length {n}, got {v.size}")
    return v


def as_matrix(a, n: int | None = None) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        raise ValueError(f"expected dimension {n}, got {m.shape[0]}")
    return m


def basis(n: int, k: int) -> np.ndarray:
    e = np.zeros(n, dtype=complex)
    e[k] = 1.0
    return e


@dataclass(frozen=True)
class BilinearOp:
    """Bilinear map ``C^n x C^n -> C^n`` stored as ``c[k, i, j]``.

    ``symmetric`` records whether the operator is known to be symmetric in
    its two slots.  Use :meth:`symmetrized` for operators that arise as
    second derivatives; it enforces the symmetry and refuses inputs whose
    asymmetry exceeds round-off.
    """

    coeffs: np.ndarray
    symmetric: bool = field(default=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise ValueError(f"bilinear coefficients must be n x n x n, got {c.shape}")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def zeros(cls, n: int) -> "BilinearOp":
        return cls(np.zeros((n, n, n), dtype=complex), symmetric=True)

    @classmethod
    def symmetrized(cls, coeffs, tol: float = SYMMETRY_TOL) -> "BilinearOp":
        c = np.asarray(coeffs, dtype=complex)
        ct = np.swapaxes(c, 1, 2)
        scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
        asym = float(np.max(np.abs(c - ct), initial=0.0))
        if asym > tol * scale:
            raise ValueError(f"operator asymmetry {asym:.3e} exceeds {tol:g} (scale {scale:.3g})")
        return cls(0.5 * (c + ct), symmetric=True)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, u, v) -> np.ndarray:
        return apply_bilinear(self, u, v)

    def __add__(self, other: "BilinearOp") -> "BilinearOp":
        _check_dims(self.n, other.n)
        return BilinearOp(self.coeffs + other.coeffs, self.symmetric and other.symmetric)

    def __sub__(self, other: "BilinearOp") -> "BilinearOp":
        _check_dims(self.n, other.n)
        return BilinearOp(self.coeffs - other.coeffs, self.symmetric and other.symmetric)

    def __neg__(self) -> "BilinearOp":
        return BilinearOp(-self.coeffs, self.symmetric)

    def scale(self, c: complex) -> "BilinearOp":
        return BilinearOp(complex(c) * self.coeffs, self.symmetric)

    def slot_matrix(self, u) -> np.ndarray:
        """Matrix of ``v -> T<u, v>``."""
        u = as_vector(u, self.n)
        return np.einsum("kij,i->kj", self.coeffs, u)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.coeffs - np.swapaxes(self.coeffs, 1, 2)), initial=0.0))


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise ValueError(f"dimension mismatch: {dims}")


def max_coeff_diff(a: BilinearOp, b: BilinearOp) -> float:
    _check_dims(a.n, b.n)
    return float(np.max(np.abs(a.coeffs - b.coeffs), initial=0.0))


def mat_mul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _check_dims(a.shape[0], b.shape[0])
    return a @ b


def mat_inverse(a, rtol: float = SINGULAR_RTOL) -> np.ndarray:
    """Inverse by partial-pivot LU.

    Raises :class:`SingularMatrixError` when some pivot of ``U`` is below
    ``rtol`` times the largest entry magnitude of ``a``.
    """
    a = as_matrix(a)
    if not np.all(np.isfinite(a)):
        raise SingularMatrixError("matrix has non-finite entries")
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        raise SingularMatrixError("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < rtol * scale:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below {rtol:g} x max entry {scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), np.eye(a.shape[0], dtype=complex), check_finite=False)


def op_norm_linear(a) -> float:
    """Operator norm for the Hermitian vector norm, i.e. the largest singular value."""
    a = as_matrix(a)
    return float(np.linalg.svd(a, compute_uv=False)[0])


def _top_right_singular(m: np.ndarray) -> tuple[float, np.ndarray]:
    _, s, vh = np.linalg.svd(m)
    return float(s[0]), vh[0].conj()


def op_norm_bilinear(
    t: BilinearOp,
    restarts: int = 16,
    tol: float = 1e-10,
    max_iter: int = 500,
    rng: np.random.Generator | None = None,
) -> float:
    """Lower bound on ``max |T<u, v>|`` over unit ``u, v`` by alternating maximization.

    With ``u`` fixed the best ``v`` is the top right singular vector of the
    matrix ``T<u, .>``; the roles are then swapped.  Each sweep can only
    increase the objective, so the value returned is a genuine lower bound
    on the norm, and in practice it is the norm itself.  It is not a
    certificate.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    c = t.coeffs
    n = t.n
    if not np.any(c):
        return 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    best = 0.0
    for r in range(restarts):
        if r < n:
            u = basis(n, r)
        else:
            u = rng.normal(size=n) + 1j * rng.normal(size=n)
            u /= np.linalg.norm(u)
        val = 0.0
        for _ in range(max_iter):
            _, v = _top_right_singular(np.einsum("kij,i->kj", c, u))
            new, u = _top_right_singular(np.einsum("kij,j->ki", c, v))
            if new - val <= tol * max(new, 1.0):
                val = max(val, new)
                break
            val = new
        best = max(best, val)
    return best


def apply_bilinear(t: BilinearOp, u, v) -> np.ndarray:
    u = as_vector(u, t.n)
    v = as_vector(v, t.n)
    return np.einsum("kij,i,j->k", t.coeffs, u, v)


def left_mat_apply(m, t: BilinearOp) -> BilinearOp:
    """``<u, v> -> m . T<u, v>``."""
    m = as_matrix(m, t.n)
    return BilinearOp(np.einsum("lk,kij->lij", m, t.coeffs), t.symmetric)


def right_slot_compose(t: BilinearOp, m) -> BilinearOp:
    """``<u, v> -> T<u, m v>``."""
    m = as_matrix(m, t.n)
    return BilinearOp(np.einsum("kil,lj->kij", t.coeffs, m))


def slot_compose(t: BilinearOp, m) -> BilinearOp:
    """``<u, v> -> T<m u, m v>``; preserves symmetry."""
    m = as_matrix(m, t.n)
    return BilinearOp(np.einsum("kab,ai,bj->kij", t.coeffs, m, m), t.symmetric)


def trace_slot(t: BilinearOp, k: int) -> complex:
    """Trace of ``v -> T<e_k, v>`` (``k`` is zero-based)."""
    if not 0 <= k < t.n:
        raise IndexError(f"slot index {k} out of range for n={t.n}")
    acc = 0j
    for i in range(t.n):
        acc += complex(t.coeffs[i, k, i])
    return acc


def trace_vector(t: BilinearOp) -> np.ndarray:
    """All ``trace_slot(t, k)`` at once."""
    return np.einsum("iki->k", t.coeffs)


def trace_correction(t: BilinearOp, tau) -> BilinearOp:
    """``T<u,v> - ((tau.u) v + (tau.v) u)/(n+1)`` with the unconjugated pairing."""
    n = t.n
    tau = as_vector(tau, n)
    eye = np.eye(n)
    corr = np.einsum("i,mj->mij", tau, eye) + np.einsum("j,mi->mij", tau, eye)
    return BilinearOp(t.coeffs - corr / (n + 1), t.symmetric)
