"""Quantitative claims of the worked examples, recomputed.

Each ``reproduce_*`` function returns a list of :class:`Claim` rows holding
the expected value, the computed value and the resulting status.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np

from .affine import dilatation_affine, factorization_check, sup_norm_on_disk, stability_defect
from .errors import NumericalContractError, SingularTwistedDerivative
from .lincomplex import op_norm_linear
from .oracles import fixture, random_point, shear_map
from .plurimap import (
    dbar_pre_schwarzian_norm,
    jacobian,
    omega_conj_product_norm,
    pluri_jet,
    pre_schwarzian,
    sense_preserving_bound,
    u_operator,
)


@dataclass
class Claim:
    name: str
    anchor: str
    expected: Any
    computed: Any
    status: str
    defect: float
    tolerance: float
    runtime_ms: float | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("runtime_ms")
        return d


def jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    return x


class _Claims:
    def __init__(self):
        self.rows: list[Claim] = []

    def add(
        self,
        name: str,
        anchor: str,
        expected,
        compute: Callable[[], tuple[Any, float]],
        tol: float,
        expect: str = "zero",
    ) -> None:
        """``compute`` returns ``(computed value, defect)``."""
        t0 = time.perf_counter()
        try:
            computed, defect = compute()
            defect = float(defect)
            ok = defect <= tol if expect == "zero" else defect > tol
            status = "pass" if ok else "fail"
        except NumericalContractError as exc:
            computed, defect, status = f"{type(exc).__name__}: {exc}", float("nan"), "error"
        ms = (time.perf_counter() - t0) * 1e3
        self.rows.append(Claim(name, anchor, jsonable(expected), jsonable(computed), status, defect, tol, ms))


def _sample_points(n: int, count: int, radius: float = 0.5, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [random_point(rng, n, radius) for _ in range(count)]


def reproduce_example_25(phi=(0, 0, 1)) -> list[Claim]:
    """``h = id``, ``g = (0, phi(z1))``: non-constant dilatation, zero pre-Schwarzian."""
    fx = fixture("example-2.5", phi=phi)
    f, p1 = fx.plurimap, fx.extra["phi"]
    pts = _sample_points(2, 32)
    c = _Claims()

    def omega_shape():
        d = 0.0
        for z in pts:
            want = np.zeros((2, 2), dtype=complex)
            want[1, 0] = p1.jet(z[:1]).d1[0, 0]
            d = max(d, float(np.max(np.abs(pluri_jet(f, z).omega - want))))
        return d, d

    def u_identity():
        d = max(float(np.max(np.abs(u_operator(f, z) - np.eye(2)))) for z in pts)
        return d, d

    def p_zero():
        d = max(pre_schwarzian(f, z).max_abs() for z in pts)
        return d, d

    def nonconstant():
        ws = [pluri_jet(f, z).omega for z in pts]
        d = max(float(np.max(np.abs(w - ws[0]))) for w in ws)
        return d, d

    def dbar():
        d = max(dbar_pre_schwarzian_norm(f, z) for z in pts[:4])
        return d, d

    c.add("dilatation", "w = phi'(z1) E_21", "phi'(z1) E_21", omega_shape, 1e-13)
    c.add("dilatation-varies", "the dilatation is not constant", "> 1e-6", nonconstant, 1e-6, expect="nonzero")
    c.add("u-operator", "U = (I - conj(w) w) Dh = I", "I", u_identity, 1e-13)
    c.add("pre-schwarzian", "P_f = 0", 0.0, p_zero, 1e-13)
    c.add("w-conj-w", "w conj(w) = 0 at 32 points", 0.0,
          lambda: (omega_conj_product_norm(f, pts),) * 2, 1e-12)
    c.add("dbar-probe", "P_f is holomorphic: dbar probe below 1e-6", 0.0, dbar, 1e-6)
    return c.rows


def reproduce_example_41(t=2.0) -> list[Claim]:
    """``w = [[0, t], [-1, 0]]``: ``||w|| = t`` yet ``J_f > 0``."""
    t = float(t)
    fx = fixture("example-4.1", t=t)
    f, omega = fx.plurimap, fx.extra["omega"]
    z = np.array([0.2 + 0.1j, -0.3 + 0.05j])
    c = _Claims()

    # the singular values of [[0, t], [-1, 0]] are t and 1
    want_norm = max(t, 1.0)

    def norm():
        v = op_norm_linear(omega)
        return v, abs(v - want_norm)

    def det_factor():
        v = np.linalg.det(np.eye(2) - omega @ omega.conj())
        return v, abs(v - (1 + t) ** 2)

    def dilatation_at_point():
        w = pluri_jet(f, z).omega
        return w, float(np.max(np.abs(w - omega)))

    def jac():
        v = jacobian(f, z)
        want = abs(np.linalg.det(f.h.jet(z).d1)) ** 2 * (1 + t) ** 2
        return v, abs(v - want) / want

    def sense():
        r = sense_preserving_bound(f, z)
        return {"norm": r.norm, "jacobian": r.jacobian, "certified": r.certified}, float(r.jacobian <= 0)

    c.add("omega-norm", "||w|| = max(t, 1)", want_norm, norm, 1e-10)
    c.add("det-factor", "det(I - w conj(w)) = (1+t)^2", (1 + t) ** 2, det_factor, 1e-10 * (1 + t) ** 2)
    c.add("dilatation", "w(z) is the constant matrix [[0, t], [-1, 0]]", omega, dilatation_at_point, 1e-13)
    c.add("jacobian", "J_f = |det Dh|^2 (1+t)^2 > 0", "|det Dh|^2 (1+t)^2", jac, 1e-12)
    c.add("sense", "J_f > 0 without the norm certificate", {"certified": False}, sense, 0.0)
    return c.rows


def reproduce_counter_omega(alpha=0.5, n=2) -> list[Claim]:
    """Contractive ``w`` whose normalizing affine twist has ``||w_F||_inf = n(alpha+1)/(alpha+n) > 1``."""
    fx = fixture("counter-omega", alpha=alpha, n=n)
    alpha, n = fx.params["alpha"], fx.params["n"]
    a = fx.twist
    expected = fx.extra["expected_sup"]
    c = _Claims()
    res = {}

    def sup():
        res["r"] = sup_norm_on_disk(fx.omega_of, a)
        return {"sup": res["r"].value, "argmax": res["r"].argmax}, abs(res["r"].value - expected)

    disk = [r * np.exp(1j * th) for r in (0.0, 0.3, 0.6, 0.9, 0.99) for th in np.linspace(0, 2 * np.pi, 12, endpoint=False)]

    def omega_contractive():
        v = max(op_norm_linear(fx.omega_of(z)) for z in disk)
        return v, v

    def det_positive():
        dmin = min(factorization_check(fx.omega_of(z), a).det for z in disk)
        return dmin, dmin

    c.add("sup-norm", "sup ||w_F|| = n(alpha+1)/(alpha+n) over the disk", expected, sup, 1e-3)
    c.add("omega-contractive", "||w|| < 1 inside the disk", "< 1", omega_contractive, 1.0)
    c.add("twist-not-contractive", "||w_F|| exceeds 1 somewhere", "> 1",
          lambda: (res["r"].value, res["r"].value) if "r" in res else (None, float("nan")), 1.0, expect="nonzero")
    c.add("det-positive", "det(I - w_F conj(w_F)) > 0 although ||w_F|| > 1", "> 0", det_positive, 0.0,
          expect="nonzero")
    if n == 2:
        def closed_form():
            d = 0.0
            for z in disk:
                got = op_norm_linear(dilatation_affine(fx.omega_of(z), a))
                want = 2 * (1 - alpha**2) * abs(z) / abs(2 - alpha**2 + alpha * z)
                d = max(d, abs(got - want))
            return d, d

        c.add("pointwise-norm", "||w_F(z)|| = 2(1-alpha^2)|z| / |2-alpha^2+alpha z|", "closed form", closed_form, 1e-12)
    return c.rows


def reproduce_counter_det(t=0.5) -> list[Claim]:
    """``det(I - w conj(w)) > 0`` but ``I + A w`` singular: the twisted dilatation is undefined."""
    fx = fixture("counter-det", t=t)
    t = fx.params["t"]
    f, a = fx.plurimap, fx.twist
    z = np.array([0.1 + 0.2j, -0.25j])
    pj = pluri_jet(f, z)
    c = _Claims()

    def a_norm():
        v = op_norm_linear(a)
        return v, abs(v - t)

    def det():
        v = np.linalg.det(np.eye(2) - pj.omega @ pj.omega.conj())
        want = (1 + 1 / t**2) ** 2
        return v, abs(v - want) / want

    def singular():
        try:
            dilatation_affine(pj.omega, a)
        except SingularTwistedDerivative as exc:
            return f"undefined dilatation ({exc})", 0.0
        return "twisted dilatation computed", 1.0

    c.add("twist-norm", "||A|| = t < 1", t, a_norm, 1e-12)
    c.add("det-positive", "det(I - w conj(w)) = (1 + 1/t^2)^2 > 0", (1 + 1 / t**2) ** 2, det, 1e-12)
    c.add("undefined-dilatation", "I + A w is singular, so w_F is undefined", "SingularTwistedDerivative",
          singular, 0.0)
    return c.rows


def reproduce_stable(n=2, i=0, j=1, lambdas=None, points=20) -> list[Claim]:
    """Only rotations ``lambda I`` preserve the pre-Schwarzian under ``g -> A g``.

    ``lambdas`` is the diagonal of the unitary twist; it needs
    ``lambda_i != lambda_j`` for the defect to be nonzero.
    """
    n, i, j, points = int(n), int(i), int(j), int(points)
    if lambdas is not None:
        lambdas = np.atleast_1d(np.asarray(lambdas, dtype=complex))
        if lambdas.size != n:
            raise ValueError(f"lambdas needs {n} entries, got {lambdas.size}")
        lambdas = lambdas / np.abs(lambdas)
    off = fixture("stable-offdiag", n=n, i=i, j=j)
    dia = fixture("stable-diag", n=n, i=i, j=j, lambdas=lambdas)
    lam = np.diag(dia.twist)
    pts = _sample_points(n, points, 0.8)
    rng = np.random.default_rng(1)
    c = _Claims()

    def defect(fx):
        v = 0.0
        for z in pts:
            q = pluri_jet(fx.plurimap, z)
            v = max(v, stability_defect(q.omega, q.domega, fx.twist).max_abs())
        return v, v

    def min_defect(fx):
        v = np.inf
        for z in pts:
            q = pluri_jet(fx.plurimap, z)
            v = min(v, stability_defect(q.omega, q.domega, fx.twist).max_abs())
        return v, v

    def rotations():
        v = 0.0
        for z in pts:
            q = pluri_jet(dia.plurimap, z)
            for r in (1.0, 1j, np.exp(1j * np.pi / 5)):
                v = max(v, stability_defect(q.omega, q.domega, r * np.eye(n)).max_abs())
        return v, v

    def closed_form():
        d = 0.0
        for z in pts:
            q = pluri_jet(dia.plurimap, z)
            u = random_point(rng, n, 1.0)
            m = stability_defect(q.omega, q.domega, dia.twist).slot_matrix(u)
            zi, zj = z[i], z[j]
            want_ii = (lam[i] * np.conj(lam[j]) - 1) * u[i] * np.conj(zj) / (1 - zi * np.conj(zj))
            want_jj = (np.conj(lam[i]) * lam[j] - 1) * u[j] * np.conj(zi) / (1 - np.conj(zi) * zj)
            d = max(d, abs(m[i, i] - want_ii), abs(m[j, j] - want_jj))
        return d, d

    def dbar():
        twisted = dia.plurimap.twist_antiholomorphic(dia.twist)
        v = min(dbar_pre_schwarzian_norm(twisted, z) for z in pts[:4])
        return v, v

    c.add("rotations", "defect vanishes for A = lambda I", 0.0, rotations, 1e-12)
    c.add("offdiag", "non-diagonal unitary gives a nonzero defect", "> 1e-6", lambda: min_defect(off), 1e-6,
          expect="nonzero")
    c.add("diag", "diagonal non-scalar unitary gives a nonzero defect", "> 1e-6", lambda: min_defect(dia), 1e-6,
          expect="nonzero")
    c.add("diag-closed-form", "entries (i,i) and (j,j) match the closed form", "closed form", closed_form, 1e-12)
    c.add("dbar-probe", "pre-Schwarzian of the twisted map is not holomorphic", "> 1e-3", dbar, 1e-3,
          expect="nonzero")
    return c.rows


def reproduce_shear(eps=0.1) -> list[Claim]:
    """Shear of a convex domain: positive Jacobian everywhere, yet not injective."""
    fx = fixture("shear", eps=eps)
    demo = fx.extra["demo"]
    p, q, image_p, image_q = demo.collision
    target = np.array([-1.0, 0.0, 0.0, 0.0])
    c = _Claims()
    c.add("collision", "q(0,0,-pi,0) = q(0,0,pi,0) = (-1,0,0,0)", target,
          lambda: ([image_p, image_q], max(np.max(np.abs(image_p - target)), np.max(np.abs(image_q - target)))),
          1e-15)
    c.add("distinct-points", "the two preimages differ", "> 0",
          lambda: (float(np.linalg.norm(p - q)),) * 2, 0.0, expect="nonzero")
    c.add("jacobian-origin", "J_q(0) = 1", 1.0,
          lambda: (demo.fd_jacobian_at(np.zeros(4)), abs(demo.fd_jacobian_at(np.zeros(4)) - 1.0)), 1e-6)
    c.add("jacobian-grid", f"J_q > 0 on {demo.grid_points} grid points", "> 0",
          lambda: (demo.grid_min_jacobian,) * 2, 0.0, expect="nonzero")
    c.add("jacobian-formula", "J_q = exp(2 x1) against finite differences", "exp(2 x1)",
          lambda: (demo.max_fd_error,) * 2, 1e-6)
    c.add("map-values", "q matches its defining formula at the collision points", "exact",
          lambda: (0.0, float(np.max(np.abs(shear_map(p) - image_p)))), 0.0)
    return c.rows


EXAMPLES: dict[str, Callable[..., list[Claim]]] = {
    "2.5": reproduce_example_25,
    "4.1": reproduce_example_41,
    "counter-omega": reproduce_counter_omega,
    "counter-det": reproduce_counter_det,
    "stable": reproduce_stable,
    "shear": reproduce_shear,
}


def reproduce(name: str, **params) -> list[Claim]:
    try:
        fn = EXAMPLES[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; known: {', '.join(EXAMPLES)}") from None
    return fn(**params)
