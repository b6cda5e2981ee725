"""Property suites run by ``plurischwarz verify``.

Each suite draws seeded random instances, evaluates one identity per check
and records the defect against a fixed tolerance.  A check with
``expect="nonzero"`` passes when the defect is *above* its tolerance; those
are the counterexample rows.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np

from .affine import (
    affine_invariance_check,
    best_affine_deviation,
    dilatation_affine,
    dilatation_recover,
    factorization_check,
    stability_defect,
)
from .errors import NumericalContractError, SingularTwistedDerivative
from .holomap import PolyMap, combine, jet_compose, oda_components, pre_schwarzian_holo, schwarzian_holo
from .lincomplex import max_coeff_diff
from .oracles import (
    RandomInstanceConfig,
    block_jacobian,
    fd_pre_schwarzian,
    fixture,
    gen_local_biholomorphism,
    gen_mobius,
    gen_mobius_probe,
    gen_plurimap,
    gen_polymap,
    planar_pre_schwarzian,
    planar_u,
    random_contraction,
    random_invertible,
    random_point,
    spawn_rngs,
)
from .plurimap import (
    PluriMap,
    chain_rule_check,
    jacobian,
    pluri_jet,
    pre_schwarzian,
    pre_schwarzian_frozen,
    schwarzian,
    schwarzian_frozen,
    schwarzian_logdet,
    transport,
    u_operator,
)
from .wirtinger import wirtinger_diff

SUITES = ("pre", "schwarzian", "affine", "stability", "holo")
ROTATIONS = (1.0, 1j, np.exp(1j * np.pi / 5))


@dataclass
class Record:
    suite: str
    name: str
    anchor: str
    n: int
    trial: int
    status: str
    defect: float
    tolerance: float
    expect: str = "zero"
    runtime_ms: float | None = None
    detail: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("runtime_ms")
        if d["detail"] is None:
            d.pop("detail")
        return d


class _Recorder:
    def __init__(self, suite: str, n: int, trial: int, out: list[Record]):
        self.suite, self.n, self.trial, self.out = suite, n, trial, out

    def check(self, name: str, anchor: str, tol: float, fn: Callable[[], float], expect: str = "zero") -> None:
        t0 = time.perf_counter()
        detail = None
        try:
            defect = float(fn())
            ok = defect < tol if expect == "zero" else defect > tol
            status = "pass" if ok else "fail"
        except NumericalContractError as exc:
            defect, status, detail = float("nan"), "error", f"{type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - t0) * 1e3
        self.out.append(Record(self.suite, name, anchor, self.n, self.trial, status, defect, tol, expect, ms, detail))


def _config(n: int) -> RandomInstanceConfig:
    return RandomInstanceConfig(n=n, degree=3)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# --------------------------------------------------------------------------
# suites


def suite_pre(rec: _Recorder, rng: np.random.Generator) -> None:
    n = rec.n
    f, z = gen_plurimap(_config(n), rng)
    p = pre_schwarzian(f, z)
    b = random_invertible(rng, n)
    a = random_contraction(rng, n)
    base = random_point(rng, n, 0.5)
    phi = gen_local_biholomorphism(rng, n, base, z)

    rec.check("frozen-point", "P_f(z0) equals the holomorphic pre-Schwarzian of h - conj(w(z0)) g",
              1e-10, lambda: max_coeff_diff(p, pre_schwarzian_frozen(f, z)))
    rec.check("multiplicative", "multiplicative invariance P_{Bf} = P_f", 1e-10,
              lambda: max_coeff_diff(pre_schwarzian(f.left_mul(b), z), p))
    rec.check("affine", "affine invariance P_{f + A conj(f)} = P_f", 1e-10,
              lambda: affine_invariance_check(f, a, z).p_defect)
    rec.check("chain-rule", "chain rule for P_f", 1e-9,
              lambda: chain_rule_check(f, phi, base).defect)
    rec.check("u-operator", "P_f = U^{-1} DU with U = (I - conj(w) w) Dh, by finite differences", 1e-6,
              lambda: max_coeff_diff(p, fd_pre_schwarzian(f, z)) / max(1.0, p.max_abs()))
    rec.check("best-affine", "P_f(a) = D^2 H_a(0) for the best affine deviation", 1e-10,
              lambda: max_coeff_diff(best_affine_deviation(f, z).p_check, p))
    rec.check("jacobian-block", "|det Dh|^2 det(I - w conj(w)) equals the real block determinant", 1e-9,
              lambda: _rel(jacobian(f, z), block_jacobian(f, z)))
    for k, lam in enumerate(ROTATIONS):
        rec.check(f"rotation-{k}", "P_{h + lambda conj(g)} = P_f for |lambda| = 1", 1e-11,
                  lambda lam=lam: max_coeff_diff(pre_schwarzian(f.twist_antiholomorphic(lam * np.eye(n)), z), p))
    if n == 1:
        rec.check("planar-pre", "planar formula h''/h' - conj(w) w'/(1 - |w|^2)", 1e-12,
                  lambda: abs(p.coeffs[0, 0, 0] - planar_pre_schwarzian(f, z)))
        rec.check("planar-u", "planar U = (1 - |w|^2) h'", 1e-12,
                  lambda: abs(u_operator(f, z)[0, 0] - planar_u(f, z)))


def _mobius_plus_conj(rng: np.random.Generator, n: int):
    """``T + A conj(T)`` for a random Moebius ``T`` and contraction ``A``."""
    t, z = gen_mobius_probe(rng, n)
    a = random_contraction(rng, n, 0.5)
    return PluriMap(t, combine((a.conj(), t))), z


def _conditioned_poly(rng: np.random.Generator, n: int, z, max_cond: float = 100.0) -> PolyMap:
    """Random cubic map whose derivative at ``z`` has condition number below ``max_cond``."""
    while True:
        h = gen_polymap(rng, n, 3)
        if np.linalg.cond(h.jet(z).d1) < max_cond:
            return h


def _finite_order_pair(rng: np.random.Generator, n: int):
    """``f`` with ``w(z0) = 0``: ``g`` vanishes to second order at ``z0``."""
    z0 = random_point(rng, n, 0.3)
    h = _conditioned_poly(rng, n, z0, max_cond=30.0)
    q = gen_polymap(rng, n, 3, 0.5, min_degree=2)
    g = q.compose(PolyMap.linear(np.eye(n), -z0))
    return PluriMap(h, g), z0


def _finite_order_defect(f: PluriMap, z0) -> float:
    sh = schwarzian_holo(f.h, z0)
    d0 = max_coeff_diff(schwarzian(f, z0), sh)
    d1 = 0.0
    for k in range(f.n):
        ds = wirtinger_diff(lambda x: schwarzian(f, x).coeffs, z0, k, "holo", 1e-6)
        dh = wirtinger_diff(lambda x: schwarzian_holo(f.h, x).coeffs, z0, k, "holo", 1e-6)
        d1 = max(d1, float(np.max(np.abs(ds - dh))))
    return max(d0, d1)


def suite_schwarzian(rec: _Recorder, rng: np.random.Generator) -> None:
    n = rec.n
    f, z = gen_plurimap(_config(n), rng)
    s = schwarzian(f, z)
    a = random_contraction(rng, n)
    b = random_invertible(rng, n)
    lam = np.exp(2j * np.pi * rng.random())
    base = random_point(rng, n, 0.5)
    phi = gen_local_biholomorphism(rng, n, base, z)
    c = random_contraction(rng, n, 0.8)
    h_const = _conditioned_poly(rng, n, z)
    fm, zm = _mobius_plus_conj(rng, n)
    ff, z0 = _finite_order_pair(rng, n)

    rec.check("affine", "S_{f + A conj(f)} = S_f", 1e-10, lambda: affine_invariance_check(f, a, z).s_defect)
    rec.check("multiplicative", "S_{Bf} = S_f", 1e-10, lambda: max_coeff_diff(schwarzian(f.left_mul(b), z), s))
    rec.check("rotation", "S_{h + lambda conj(g)} = S_f for |lambda| = 1", 1e-10,
              lambda: max_coeff_diff(schwarzian(f.twist_antiholomorphic(lam * np.eye(n)), z), s))
    rec.check("frozen-point", "S_f(z0) = S(h - conj(w(z0)) g)(z0)", 1e-10,
              lambda: max_coeff_diff(s, schwarzian_frozen(f, z)))
    rec.check("chain-rule", "chain rule for S_f", 1e-9, lambda: chain_rule_check(f, phi, base).s_defect)
    rec.check("log-det-form", "trace form of S_f agrees with the grad log det(I - w conj(w)) form", 1e-6,
              lambda: max_coeff_diff(s, schwarzian_logdet(f, z)) / max(1.0, s.max_abs()))
    rec.check("mobius", "S_f = 0 for f = T + A conj(T) with T Moebius", 1e-9,
              lambda: schwarzian(fm, zm).max_abs())

    def const_dilatation() -> float:
        g = h_const.left_mul(c)
        fc = PluriMap(h_const, g)
        return max_coeff_diff(schwarzian(fc, z), schwarzian_holo(h_const, z))

    rec.check("constant-dilatation", "constant dilatation gives S_f = Sh", 1e-9, const_dilatation)
    rec.check("finite-order", "w(z0) = 0: S_f and Sh agree at z0 to first order", 1e-5,
              lambda: _finite_order_defect(ff, z0))


def suite_affine(rec: _Recorder, rng: np.random.Generator) -> None:
    n = rec.n
    w = random_contraction(rng, n, 0.99)
    a = random_contraction(rng, n, 0.99)
    # factorization_check raises on a non-positive determinant, which is recorded as an error
    rec.check("factorization", "factorization of I - w_F conj(w_F) with positive determinant", 1e-12,
              lambda: factorization_check(w, a).residual)
    rec.check("round-trip", "recovering w from w_F", 1e-12,
              lambda: float(np.max(np.abs(dilatation_recover(dilatation_affine(w, a), a) - w))))
    if n == 2:
        t = float(rng.uniform(0.1, 0.9))
        fx = fixture("counter-det", t=t)

        def singular() -> float:
            try:
                pj = pluri_jet(fx.plurimap, rng.normal(size=2) * 0.3)
                dilatation_affine(pj.omega, fx.twist)
            except SingularTwistedDerivative:
                return 0.0
            return 1.0

        rec.check("counter-det", "twist with det(I + A w) = 0 has undefined dilatation", 0.5, singular)


def suite_stability(rec: _Recorder, rng: np.random.Generator) -> None:
    n = rec.n
    f, z = gen_plurimap(_config(n), rng)
    pj = pluri_jet(f, z)
    for k, lam in enumerate(ROTATIONS):
        rec.check(f"rotation-{k}", "stability defect vanishes for A = lambda I", 1e-12,
                  lambda lam=lam: stability_defect(pj.omega, pj.domega, lam * np.eye(n)).max_abs())
    if n < 2:
        return
    i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
    zc = random_point(rng, n, 0.8)
    off = fixture("stable-offdiag", n=n, i=i, j=j)
    dia = fixture("stable-diag", n=n, i=i, j=j)

    def defect(fx) -> float:
        q = pluri_jet(fx.plurimap, zc)
        return stability_defect(q.omega, q.domega, fx.twist).max_abs()

    def closed_form() -> float:
        q = pluri_jet(dia.plurimap, zc)
        lam = np.diag(dia.twist)
        u = random_point(rng, n, 1.0)
        m = stability_defect(q.omega, q.domega, dia.twist).slot_matrix(u)
        zi, zj = zc[i], zc[j]
        want_ii = (lam[i] * np.conj(lam[j]) - 1) * u[i] * np.conj(zj) / (1 - zi * np.conj(zj))
        want_jj = (np.conj(lam[i]) * lam[j] - 1) * u[j] * np.conj(zi) / (1 - np.conj(zi) * zj)
        return max(abs(m[i, i] - want_ii), abs(m[j, j] - want_jj))

    rec.check("offdiag-counterexample", "non-diagonal unitary: stability defect is nonzero", 1e-6,
              lambda: defect(off), expect="nonzero")
    rec.check("diag-counterexample", "diagonal non-scalar unitary: stability defect is nonzero", 1e-6,
              lambda: defect(dia), expect="nonzero")
    rec.check("diag-closed-form", "diagonal counterexample matches the closed-form entries", 1e-12, closed_form)


def suite_holo(rec: _Recorder, rng: np.random.Generator) -> None:
    n = rec.n
    z = random_point(rng, n, 0.5)
    h = _conditioned_poly(rng, n, z)
    t, zt = gen_mobius_probe(rng, n)
    oda = oda_components(h, z)
    sh = schwarzian_holo(h, z)
    b = random_invertible(rng, n)
    base = random_point(rng, n, 0.5)
    inner = gen_local_biholomorphism(rng, n, base, z)
    w = h.value(z)
    while True:
        outer = gen_mobius(rng, n, 0.3)
        if abs(outer.a[0, 0] + outer.a[0, 1:] @ w) > 0.3:
            break

    rec.check("oda-symmetry", "S^k_ij = S^k_ji", 1e-15,
              lambda: float(np.max(np.abs(oda - np.swapaxes(oda, 1, 2)))))
    rec.check("oda-trace", "sum_j S^j_ij = 0", 1e-11, lambda: float(np.max(np.abs(np.einsum("jij->i", oda)))))
    rec.check("oda-operator", "operator Schwarzian equals the Oda components on basis pairs", 1e-11,
              lambda: float(np.max(np.abs(sh.coeffs - oda))))
    rec.check("oda-mobius", "Oda components vanish for Moebius maps", 1e-10,
              lambda: float(np.max(np.abs(oda_components(t, zt)))))
    rec.check("mobius", "Schwarzian vanishes for Moebius maps", 1e-10, lambda: schwarzian_holo(t, zt).max_abs())
    rec.check("multiplicative", "P(Bh) = Ph", 1e-12,
              lambda: max_coeff_diff(pre_schwarzian_holo(h.left_mul(b).jet(z)), pre_schwarzian_holo(h.jet(z))))

    def holo_chain() -> float:
        ij = inner.jet(base)
        lhs = pre_schwarzian_holo(h.compose(inner).jet(base))
        rhs = transport(pre_schwarzian_holo(h.jet(z)), ij.d1) + pre_schwarzian_holo(ij)
        return max_coeff_diff(lhs, rhs)

    rec.check("chain-rule", "P(h o phi) = Dphi^{-1} Ph(phi)<Dphi ., Dphi .> + P phi", 1e-10, holo_chain)

    rec.check("mobius-post", "S(T o h) = Sh for Moebius T", 1e-9,
              lambda: max_coeff_diff(schwarzian_holo(jet_compose(outer.jet(w), h.jet(z))), sh))


SUITE_FUNCS: dict[str, Callable[[_Recorder, np.random.Generator], None]] = {
    "pre": suite_pre,
    "schwarzian": suite_schwarzian,
    "affine": suite_affine,
    "stability": suite_stability,
    "holo": suite_holo,
}


def run_suites(
    suites: Iterable[str],
    trials: int,
    seed: int,
    dims: Iterable[int] = (1, 2, 3),
) -> list[Record]:
    """Run each suite for every dimension and trial; records come back sorted."""
    records: list[Record] = []
    suites = list(suites)
    dims = list(dims)
    for s_idx, name in enumerate(suites):
        if name not in SUITE_FUNCS:
            raise ValueError(f"unknown suite {name!r}")
        rngs = spawn_rngs(seed + 1_000_003 * SUITES.index(name), trials * len(dims))
        for d_idx, n in enumerate(dims):
            for trial in range(trials):
                rec = _Recorder(name, n, trial, records)
                SUITE_FUNCS[name](rec, rngs[d_idx * trials + trial])
    order = {s: i for i, s in enumerate(suites)}
    records.sort(key=lambda r: (order[r.suite], r.n, r.trial))
    return records
