import numpy as np
import pytest

from plurischwarz.errors import RejectionExhausted
from plurischwarz.holomap import MobiusMap, PolyMap
from plurischwarz.lincomplex import BilinearOp, op_norm_bilinear, op_norm_linear
from plurischwarz.oracles import (
    FIXTURES,
    RandomInstanceConfig,
    fd_first,
    fd_second,
    fixture,
    gen_local_biholomorphism,
    gen_mobius,
    gen_mobius_probe,
    gen_plurimap,
    gen_polymap,
    mobius_probe,
    multi_indices,
    random_contraction,
    random_invertible,
    random_point,
    random_unitary,
    sample_norm_bilinear,
    sample_norm_linear,
    shear_demo,
    shear_map,
    spawn_rngs,
)
from plurischwarz.plurimap import pluri_jet, pre_schwarzian
from plurischwarz.serialize import dumps_plurimap, loads_plurimap, plurimap_to_dict
from plurischwarz.wirtinger import FiniteDiffConfig, wirtinger_diff, wirtinger_gradient

# --- Wirtinger differences -------------------------------------------------


def test_wirtinger_square_holo():
    d = wirtinger_diff(lambda z: z[0] ** 2, np.array([1.0 + 0j]), 0, "holo")
    assert abs(d - 2) < 1e-8


def test_wirtinger_square_antiholo():
    d = wirtinger_diff(lambda z: z[0] ** 2, np.array([1.0 + 0j]), 0, "antiholo")
    assert abs(d) < 1e-8


def test_wirtinger_conjugate():
    z = np.array([0.3 - 0.4j])
    assert abs(wirtinger_diff(lambda x: np.conj(x[0]), z, 0, "antiholo") - 1) < 1e-8
    assert abs(wirtinger_diff(lambda x: np.conj(x[0]), z, 0, "holo")) < 1e-8


def test_wirtinger_modulus_squared():
    z = np.array([0.2 + 0.5j, -0.1j])
    g = wirtinger_gradient(lambda x: np.vdot(x, x).real, z, "holo")
    np.testing.assert_allclose(g, np.conj(z), atol=1e-9)


def test_wirtinger_bad_kind():
    with pytest.raises(ValueError):
        wirtinger_diff(lambda x: x, np.zeros(1), 0, "mixed")


def test_finite_diff_config():
    cfg = FiniteDiffConfig()
    assert (cfg.step, cfg.dbar_step, cfg.scheme) == (1e-5, 1e-4, "central")
    with pytest.raises(ValueError):
        FiniteDiffConfig(step=0)
    with pytest.raises(ValueError):
        FiniteDiffConfig(scheme="forward")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polymap_antiholomorphic_derivative_vanishes(n):
    for rng in spawn_rngs(400 + n, 10):
        f = gen_polymap(rng, n, 4)
        z = random_point(rng, n)
        for k in range(n):
            assert np.max(np.abs(wirtinger_diff(f.value, z, k, "antiholo", 1e-5))) < 1e-7


def test_fd_first_and_second_match_jet():
    rng = np.random.default_rng(0)
    f = gen_polymap(rng, 2, 3)
    z = random_point(rng, 2)
    j = f.jet(z)
    np.testing.assert_allclose(fd_first(f.value, z), j.d1, atol=1e-8)
    np.testing.assert_allclose(fd_second(f.value, z), j.d2.coeffs, atol=1e-5)


# --- norm sampling ---------------------------------------------------------


def test_sample_norm_linear_lower_bound():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    s = sample_norm_linear(a, 20_000, rng)
    exact = op_norm_linear(a)
    assert s <= exact * (1 + 1e-12) and s > 0.95 * exact


def test_sample_norm_bilinear_below_operator_norm():
    rng = np.random.default_rng(2)
    c = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
    t = BilinearOp.symmetrized(c + np.swapaxes(c, 1, 2))
    s = sample_norm_bilinear(t, 20_000, rng)
    assert s <= op_norm_bilinear(t) * (1 + 1e-9)


# --- random generators -----------------------------------------------------


def test_spawn_rngs_independent_and_reproducible():
    a = [r.random() for r in spawn_rngs(7, 4)]
    b = [r.random() for r in spawn_rngs(7, 4)]
    assert a == b and len(set(a)) == 4


def test_multi_indices_count():
    assert len(multi_indices(2, 3)) == 10
    assert len(multi_indices(3, 2)) == 10
    assert all(sum(a) <= 2 for a in multi_indices(3, 2))


def test_gen_polymap_min_degree():
    f = gen_polymap(np.random.default_rng(3), 3, 4, min_degree=2)
    assert all(sum(a) >= 2 for a in f.terms)
    assert f.degree <= 4


def test_random_matrices():
    rng = np.random.default_rng(4)
    assert op_norm_linear(random_contraction(rng, 3, 0.7)) <= 0.7 + 1e-12
    assert np.linalg.cond(random_invertible(rng, 3, 10.0)) < 10.0
    u = random_unitary(rng, 3)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(3), atol=1e-14)


def test_gen_plurimap_deterministic_bytes():
    cfg = RandomInstanceConfig(seed=42, n=2, degree=3)
    (f1, z1), (f2, z2) = gen_plurimap(cfg), gen_plurimap(cfg)
    assert dumps_plurimap(f1).encode() == dumps_plurimap(f2).encode()
    assert np.array_equal(z1, z2)


def test_gen_plurimap_seeds_differ():
    f1, _ = gen_plurimap(RandomInstanceConfig(seed=1))
    f2, _ = gen_plurimap(RandomInstanceConfig(seed=2))
    assert dumps_plurimap(f1) != dumps_plurimap(f2)


def test_gen_plurimap_class_membership():
    for rng in spawn_rngs(410, 100):
        f, z = gen_plurimap(RandomInstanceConfig(n=2), rng)
        pj = pluri_jet(f, z)
        assert np.linalg.cond(pj.h_jet.d1) < 100
        assert op_norm_linear(pj.omega) < 0.9


def test_gen_plurimap_linear_degree():
    rng = np.random.default_rng(5)
    f, z = gen_plurimap(RandomInstanceConfig(n=2, degree=1), rng)
    assert f.h.degree <= 1 and f.g.degree <= 1
    # constant dilatation and no second derivatives: P_f vanishes
    assert pre_schwarzian(f, z).max_abs() == 0


def test_gen_plurimap_rejection_exhausted():
    with pytest.raises(RejectionExhausted):
        gen_plurimap(RandomInstanceConfig(rho=0.0, max_attempts=5), np.random.default_rng(6))


def test_gen_local_biholomorphism_maps_base_to_target():
    rng = np.random.default_rng(7)
    base, target = random_point(rng, 3), random_point(rng, 3)
    phi = gen_local_biholomorphism(rng, 3, base, target)
    np.testing.assert_allclose(phi.value(base), target, atol=1e-14)
    assert np.linalg.cond(phi.jet(base).d1) < 20
    assert phi.degree == 2


def test_gen_mobius_and_probe():
    rng = np.random.default_rng(8)
    assert isinstance(gen_mobius(rng, 2), MobiusMap)
    t, z = gen_mobius_probe(rng, 2)
    assert np.all(np.isfinite(t.value(z)))


def test_mobius_probe_gives_up():
    # the denominator is the constant 1e-3, below the default threshold everywhere
    a = np.eye(3, dtype=complex)
    a[0, 0] = 1e-3
    with pytest.raises(RejectionExhausted):
        mobius_probe(np.random.default_rng(9), MobiusMap(a), max_attempts=5)


# --- fixtures --------------------------------------------------------------


def test_fixture_example_25():
    fx = fixture("example-2.5")
    f = fx.plurimap
    assert f.h == PolyMap.identity(2)
    z = np.array([0.5 + 0.1j, 0.3j])
    np.testing.assert_allclose(f.g.value(z), [0, z[0] ** 2])
    w = pluri_jet(f, z).omega
    np.testing.assert_allclose(w, [[0, 0], [2 * z[0], 0]])


def test_fixture_counter_det():
    fx = fixture("counter-det", t=0.5)
    np.testing.assert_array_equal(fx.twist, np.diag([0.5, -0.5]))
    np.testing.assert_allclose(pluri_jet(fx.plurimap, np.zeros(2)).omega, [[0, 4], [-1, 0]])


def test_fixture_example_41():
    fx = fixture("example-4.1", t=3)
    z = np.array([0.2, -0.1j])
    np.testing.assert_allclose(pluri_jet(fx.plurimap, z).omega, [[0, 3], [-1, 0]], atol=1e-15)


def test_fixture_counter_omega():
    fx = fixture("counter-omega", alpha=0.5, n=3)
    assert fx.extra["expected_sup"] == pytest.approx(1.2857142857142858)
    assert op_norm_linear(fx.omega_of(0.4j)) < 1


def test_fixture_shear():
    demo = fixture("shear").extra["demo"]
    assert demo.eps == 0.1


def test_fixture_unknown():
    with pytest.raises(KeyError, match="unknown fixture"):
        fixture("example-9.9")


@pytest.mark.parametrize("name", [k for k in FIXTURES if fixture(k).plurimap is not None])
def test_fixture_serialization_round_trip(name):
    f = fixture(name).plurimap
    back = loads_plurimap(dumps_plurimap(f))
    assert back.h == f.h and back.g == f.g
    assert plurimap_to_dict(back) == plurimap_to_dict(f)


# --- shear -----------------------------------------------------------------


def test_shear_collision():
    p, q = shear_map([0, 0, -np.pi, 0]), shear_map([0, 0, np.pi, 0])
    np.testing.assert_allclose(p, [-1, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(q, [-1, 0, 0, 0], atol=1e-15)


def test_shear_demo():
    demo = shear_demo(0.1)
    assert demo.jacobian_at(np.zeros(4)) == 1.0
    assert demo.grid_points == 1000 and demo.grid_min_jacobian > 0
    assert demo.max_fd_error < 1e-6
    w = np.array([0.3, -0.2, 1.0, 0.5])
    assert demo.fd_jacobian_at(w) == pytest.approx(np.exp(0.6), abs=1e-6)
    a, b, image_a, image_b = demo.collision
    assert not np.array_equal(a, b)
    np.testing.assert_allclose(image_a, [-1, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(image_b, [-1, 0, 0, 0], atol=1e-15)
