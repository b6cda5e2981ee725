"""Independent verification machinery.

Finite-difference derivatives, brute-force norm sampling, seeded random
instance generators and the named example fixtures.  Nothing here reuses the
closed-form jet code it is meant to check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RejectionExhausted
from .holomap import MobiusMap, PolyMap
from .lincomplex import BilinearOp, as_vector, mat_inverse, op_norm_linear
from .plurimap import PluriMap, pluri_jet, u_operator
from .wirtinger import FiniteDiffConfig, wirtinger_diff, wirtinger_gradient

__all__ = [
    "FiniteDiffConfig",
    "RandomInstanceConfig",
    "wirtinger_diff",
    "wirtinger_gradient",
]


# --------------------------------------------------------------------------
# finite-difference oracles


def fd_first(func: Callable, z, step: float = 1e-5) -> np.ndarray:
    """Jacobian ``[:, k]`` of a holomorphic vector function by central differences."""
    z = as_vector(z)
    cols = []
    for k in range(z.size):
        e = np.zeros_like(z)
        e[k] = step
        cols.append((np.asarray(func(z + e)) - np.asarray(func(z - e))) / (2 * step))
    return np.stack(cols, axis=-1)


def fd_second(func: Callable, z, step: float = 1e-3) -> np.ndarray:
    """``out[k, i, j]`` = mixed second derivative of component ``k`` by a four-point stencil."""
    z = as_vector(z)
    n = z.size
    out = None
    for i in range(n):
        for j in range(n):
            ei = np.zeros_like(z)
            ej = np.zeros_like(z)
            ei[i] = step
            ej[j] = step
            d = (
                np.asarray(func(z + ei + ej))
                - np.asarray(func(z + ei - ej))
                - np.asarray(func(z - ei + ej))
                + np.asarray(func(z - ei - ej))
            ) / (4 * step * step)
            if out is None:
                out = np.zeros((d.size, n, n), dtype=complex)
            out[:, i, j] = d
    return out


def fd_domega(f: PluriMap, z, step: float = 1e-5) -> np.ndarray:
    """``out[i, k, j] = d w_ij / dz_k`` from differences of ``z -> Dg(z) Dh(z)^{-1}``."""

    def omega(x):
        pj = pluri_jet(f, x)
        return pj.g_jet.d1 @ np.linalg.inv(pj.h_jet.d1)

    grad = wirtinger_gradient(omega, z, "holo", step)  # (k, i, j)
    return np.transpose(grad, (1, 0, 2))


def fd_pre_schwarzian(f: PluriMap, z, step: float = 1e-5) -> BilinearOp:
    """``U^{-1} DU`` with ``DU`` taken by holomorphic Wirtinger differences of ``U``."""
    z = as_vector(z, f.n)
    u_inv = np.linalg.inv(u_operator(f, z))
    grad = wirtinger_gradient(lambda x: u_operator(f, x), z, "holo", step)  # (k, m, l)
    return BilinearOp(np.einsum("am,kml->akl", u_inv, grad))


def block_jacobian(f: PluriMap, z) -> float:
    """Determinant of ``[[Dh, conj(Dg)], [Dg, conj(Dh)]]`` (real for any ``f``)."""
    pj = pluri_jet(f, z)
    dh, dg = pj.h_jet.d1, pj.g_jet.d1
    block = np.block([[dh, dg.conj()], [dg, dh.conj()]])
    return float(np.linalg.det(block).real)


def planar_pre_schwarzian(f: PluriMap, z: complex) -> complex:
    """One-variable formula ``h''/h' - conj(w) w' / (1 - |w|^2)`` with ``w = g'/h'``."""
    z = as_vector(z, 1)
    hj, gj = f.h.jet(z), f.g.jet(z)
    h1, h2 = hj.d1[0, 0], hj.d2.coeffs[0, 0, 0]
    g1, g2 = gj.d1[0, 0], gj.d2.coeffs[0, 0, 0]
    w = g1 / h1
    dw = (g2 * h1 - g1 * h2) / h1**2
    return complex(h2 / h1 - np.conj(w) * dw / (1 - abs(w) ** 2))


def planar_u(f: PluriMap, z: complex) -> complex:
    """``(1 - |w|^2) h'`` in one variable."""
    z = as_vector(z, 1)
    h1 = f.h.jet(z).d1[0, 0]
    w = f.g.jet(z).d1[0, 0] / h1
    return complex((1 - abs(w) ** 2) * h1)


# --------------------------------------------------------------------------
# brute-force norm sampling


def _unit_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    v = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_norm_linear(a, samples: int = 100_000, rng: np.random.Generator | None = None) -> float:
    rng = np.random.default_rng(0) if rng is None else rng
    a = np.asarray(a, dtype=complex)
    u = _unit_vectors(rng, samples, a.shape[0])
    return float(np.max(np.linalg.norm(u @ a.T, axis=1)))


def sample_norm_bilinear(t: BilinearOp, samples: int = 100_000, rng: np.random.Generator | None = None) -> float:
    rng = np.random.default_rng(0) if rng is None else rng
    u = _unit_vectors(rng, samples, t.n)
    v = _unit_vectors(rng, samples, t.n)
    vals = np.einsum("kij,si,sj->sk", t.coeffs, u, v)
    return float(np.max(np.linalg.norm(vals, axis=1)))


# --------------------------------------------------------------------------
# random instances


@dataclass(frozen=True)
class RandomInstanceConfig:
    seed: int = 0
    n: int = 2
    degree: int = 3
    magnitude: float = 1.0
    rho: float = 0.9
    g_scale: float = 0.5
    probe_radius: float = 0.5
    max_cond: float = 100.0
    max_attempts: int = 10_000

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent generators, one per trial, reproducible regardless of execution order."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def random_complex(rng: np.random.Generator, shape, radius: float = 1.0) -> np.ndarray:
    """Uniform on the complex disk of the given radius."""
    r = radius * np.sqrt(rng.random(shape))
    return r * np.exp(2j * np.pi * rng.random(shape))


def random_point(rng: np.random.Generator, n: int, radius: float = 0.5) -> np.ndarray:
    """Uniform in the Euclidean ball of ``C^n``."""
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    return v * radius * rng.random() ** (1 / (2 * n))


def multi_indices(n: int, degree: int) -> list[tuple[int, ...]]:
    return [a for d in range(degree + 1) for a in itertools.product(range(d + 1), repeat=n) if sum(a) == d]


def gen_polymap(rng: np.random.Generator, n: int, degree: int, magnitude: float = 1.0, min_degree: int = 0) -> PolyMap:
    """Random polynomial map; coefficients of total degree ``|a|`` are damped by ``1/(1+|a|)``."""
    terms = []
    for alpha in multi_indices(n, degree):
        d = sum(alpha)
        if d < min_degree:
            continue
        terms.append((alpha, random_complex(rng, n, magnitude / (1 + d))))
    return PolyMap(n, terms)


def random_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_contraction(rng: np.random.Generator, n: int, max_norm: float = 0.9) -> np.ndarray:
    """Random matrix with operator norm uniform in ``(0, max_norm)``."""
    m = random_matrix(rng, n)
    return m * (max_norm * rng.uniform(0.05, 1.0) / op_norm_linear(m))


def random_invertible(rng: np.random.Generator, n: int, max_cond: float = 100.0) -> np.ndarray:
    while True:
        m = random_matrix(rng, n)
        if np.linalg.cond(m) < max_cond:
            return m


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(random_matrix(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def gen_plurimap(cfg: RandomInstanceConfig, rng: np.random.Generator | None = None):
    """Random ``(PluriMap, probe point)`` in the class at the probe point.

    Rejection-samples until ``cond(Dh(z)) < max_cond`` and ``||w(z)|| < rho``.
    """
    rng = cfg.rng() if rng is None else rng
    for _ in range(cfg.max_attempts):
        h = gen_polymap(rng, cfg.n, cfg.degree, cfg.magnitude)
        g = gen_polymap(rng, cfg.n, cfg.degree, cfg.magnitude * cfg.g_scale)
        z = random_point(rng, cfg.n, cfg.probe_radius)
        dh = h.jet(z).d1
        if not np.linalg.cond(dh) < cfg.max_cond:
            continue
        f = PluriMap(h, g)
        if op_norm_linear(pluri_jet(f, z).omega) < cfg.rho:
            return f, z
    raise RejectionExhausted(f"no admissible instance after {cfg.max_attempts} attempts")


def gen_local_biholomorphism(rng: np.random.Generator, n: int, base, target, quad: float = 0.3, max_cond: float = 20.0) -> PolyMap:
    """Degree-two map ``phi`` with ``phi(base) = target`` and well-conditioned ``Dphi(base)``."""
    base = as_vector(base, n)
    b = random_invertible(rng, n, max_cond)
    b /= op_norm_linear(b)
    local = PolyMap(
        n,
        [(a, b[:, a.index(1)]) for a in multi_indices(n, 1) if sum(a) == 1]
        + [(a, random_complex(rng, n, quad)) for a in multi_indices(n, 2) if sum(a) == 2]
        + [((0,) * n, as_vector(target, n))],
    )
    return local.compose(PolyMap.linear(np.eye(n), -base))


def gen_mobius(rng: np.random.Generator, n: int, spread: float = 0.5) -> MobiusMap:
    while True:
        a = np.eye(n + 1) + spread * random_matrix(rng, n + 1)
        if np.linalg.cond(a) < 50:
            return MobiusMap(a)


def mobius_probe(
    rng: np.random.Generator,
    t: MobiusMap,
    radius: float = 0.5,
    min_denominator: float = 0.3,
    max_attempts: int = 1000,
):
    """Random point of the ball where the denominator of ``t`` exceeds ``min_denominator``."""
    for _ in range(max_attempts):
        z = random_point(rng, t.n, radius)
        if abs(t.a[0, 0] + t.a[0, 1:] @ z) > min_denominator:
            return z
    raise RejectionExhausted(f"no probe point with |l0| > {min_denominator} after {max_attempts} attempts")


def gen_mobius_probe(rng: np.random.Generator, n: int, spread: float = 0.5, radius: float = 0.5):
    """Random Moebius map together with a probe point well away from its pole."""
    while True:
        t = gen_mobius(rng, n, spread)
        try:
            return t, mobius_probe(rng, t, radius, max_attempts=100)
        except RejectionExhausted:
            continue


# --------------------------------------------------------------------------
# named fixtures


@dataclass
class Fixture:
    name: str
    anchor: str
    params: dict
    plurimap: PluriMap | None = None
    twist: np.ndarray | None = None
    omega_of: Callable | None = None
    extra: dict = field(default_factory=dict)


def _poly1(coeffs) -> PolyMap:
    """One-variable polynomial from ascending coefficients."""
    return PolyMap(1, [((k,), [c]) for k, c in enumerate(coeffs)])


def _example_25(phi=(0, 0, 1)) -> Fixture:
    phi = [complex(c) for c in phi]
    terms = [((k, 0), [0, c]) for k, c in enumerate(phi)]
    f = PluriMap(PolyMap.identity(2), PolyMap(2, terms))
    return Fixture(
        "example-2.5",
        "vanishing pre-Schwarzian with non-constant dilatation",
        {"phi": phi},
        plurimap=f,
        extra={"phi": _poly1(phi)},
    )


def _example_41(t=2.0, h: PolyMap | None = None) -> Fixture:
    t = float(t)
    h = PolyMap(2, [((1, 0), [1, 0]), ((0, 1), [0, 1]), ((0, 2), [0.25, 0])]) if h is None else h
    omega = np.array([[0, t], [-1, 0]], dtype=complex)
    g = h.left_mul(omega)  # g = (t h_2, -h_1)
    return Fixture(
        "example-4.1",
        "positive Jacobian with dilatation of arbitrarily large norm",
        {"t": t},
        plurimap=PluriMap(h, g),
        extra={"omega": omega},
    )


def _counter_omega(alpha=0.5, n=2) -> Fixture:
    alpha, n = float(alpha), int(n)
    b = np.zeros((n, n), dtype=complex)
    b[0, :] = 1.0

    def phi(z):
        return (alpha + z) / (1 + alpha * z)

    def omega_of(z):
        return phi(z) / np.sqrt(n) * b

    return Fixture(
        "counter-omega",
        "contractive dilatation whose affine twist is not contractive",
        {"alpha": alpha, "n": n},
        twist=-omega_of(0).conj(),
        omega_of=omega_of,
        extra={"expected_sup": n * (alpha + 1) / (alpha + n), "phi": phi},
    )


def _counter_det(t=0.5) -> Fixture:
    t = float(t)
    f = PluriMap(PolyMap.identity(2), PolyMap(2, [((0, 1), [1 / t**2, 0]), ((1, 0), [0, -1])]))
    return Fixture(
        "counter-det",
        "positive det(I - w conj(w)) with undefined twisted dilatation",
        {"t": t},
        plurimap=f,
        twist=np.diag([t, -t]).astype(complex),
    )


def _stable_offdiag(n=2, i=0, j=1, a=None) -> Fixture:
    n, i, j = int(n), int(i), int(j)
    alpha = [0] * n
    alpha[i] = 2
    e = np.zeros(n, dtype=complex)
    e[j] = 0.5
    f = PluriMap(PolyMap.identity(n), PolyMap(n, [(alpha, e)]))
    if a is None:
        c, s = np.cos(np.pi / 5), np.sin(np.pi / 5)
        a = np.eye(n, dtype=complex)
        a[[i, i, j, j], [i, j, i, j]] = [c, -s, s, c]
    return Fixture(
        "stable-offdiag",
        "pre-Schwarzian not stable under a non-diagonal unitary",
        {"n": n, "i": i, "j": j},
        plurimap=f,
        twist=np.asarray(a, dtype=complex),
    )


def _stable_diag(n=2, i=0, j=1, lambdas=None) -> Fixture:
    n, i, j = int(n), int(i), int(j)
    if lambdas is None:
        lambdas = np.ones(n, dtype=complex)
        lambdas[j] = np.exp(1j * np.pi / 3)
    lambdas = np.asarray(lambdas, dtype=complex)
    ai = [0] * n
    ai[i] = 2
    aj = [0] * n
    aj[j] = 2
    ei = np.zeros(n, dtype=complex)
    ej = np.zeros(n, dtype=complex)
    ei[i] = ej[j] = 0.5
    f = PluriMap(PolyMap.identity(n), PolyMap(n, [(ai, ej), (aj, ei)]))
    return Fixture(
        "stable-diag",
        "pre-Schwarzian not stable under a diagonal unitary other than a rotation",
        {"n": n, "i": i, "j": j, "lambdas": [complex(x) for x in lambdas]},
        plurimap=f,
        twist=np.diag(lambdas),
    )


def _shear(eps=0.1) -> Fixture:
    return Fixture(
        "shear",
        "locally univalent shear of a convex domain that is not univalent",
        {"eps": float(eps)},
        extra={"demo": shear_demo(float(eps))},
    )


FIXTURES: dict[str, Callable[..., Fixture]] = {
    "example-2.5": _example_25,
    "example-4.1": _example_41,
    "counter-omega": _counter_omega,
    "counter-det": _counter_det,
    "stable-offdiag": _stable_offdiag,
    "stable-diag": _stable_diag,
    "shear": _shear,
}


def fixture(name: str, **params) -> Fixture:
    try:
        build = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
    return build(**params)


# --------------------------------------------------------------------------
# shear counterexample in R^4


def shear_map(w) -> np.ndarray:
    """``q(x1, y1, x2, y2) = (e^x1 cos x2, y1, e^x1 sin x2, y2)``."""
    x1, y1, x2, y2 = np.asarray(w, dtype=float)
    return np.array([np.exp(x1) * np.cos(x2), y1, np.exp(x1) * np.sin(x2), y2])


@dataclass(frozen=True)
class ShearDemo:
    eps: float
    collision: tuple
    grid_min_jacobian: float
    grid_points: int
    max_fd_error: float

    @staticmethod
    def jacobian_at(w) -> float:
        return float(np.exp(2 * w[0]))

    @staticmethod
    def fd_jacobian_at(w, step: float = 1e-6) -> float:
        w = np.asarray(w, dtype=float)
        cols = []
        for k in range(4):
            e = np.zeros(4)
            e[k] = step
            cols.append((shear_map(w + e) - shear_map(w - e)) / (2 * step))
        return float(np.linalg.det(np.stack(cols, axis=1)))


def shear_demo(eps: float = 0.1, grid: int = 10) -> ShearDemo:
    """Positive Jacobian on a ``grid^3`` scan of the domain, yet two points share an image."""
    p, q = np.array([0.0, 0.0, -np.pi, 0.0]), np.array([0.0, 0.0, np.pi, 0.0])
    image_p, image_q = shear_map(p), shear_map(q)
    xs1 = np.linspace(-1, 1, grid + 2)[1:-1]
    xs2 = np.linspace(-(np.pi + eps), np.pi + eps, grid + 2)[1:-1]
    ys = np.linspace(-1, 1, grid)
    jmin, err, count = np.inf, 0.0, 0
    for x1, x2, y in itertools.product(xs1, xs2, ys):
        w = np.array([x1, y, x2, -y])
        exact = ShearDemo.jacobian_at(w)
        jmin = min(jmin, ShearDemo.fd_jacobian_at(w))
        err = max(err, abs(ShearDemo.fd_jacobian_at(w) - exact) / exact)
        count += 1
    return ShearDemo(eps, (p, q, image_p, image_q), float(jmin), count, float(err))
