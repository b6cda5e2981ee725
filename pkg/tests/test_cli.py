import json
import subprocess
import sys

import numpy as np
import pytest

from plurischwarz.cli import EXIT_CONTRACT, EXIT_OK, EXIT_PARSE, EXIT_VERIFY, SEED_ENV, main
from plurischwarz.errors import MapParseError
from plurischwarz.holomap import MobiusMap, PolyMap
from plurischwarz.oracles import RandomInstanceConfig, fixture, gen_mobius, gen_plurimap
from plurischwarz.plurimap import PluriMap, pluri_jet
from plurischwarz.serialize import (
    array_to_json,
    complex_from_json,
    dumps_plurimap,
    format_point,
    loads_plurimap,
    parse_point,
    save_mapfile,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def no_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


# --- serialization ---------------------------------------------------------


def test_round_trip_random_map_bit_exact():
    f, _ = gen_plurimap(RandomInstanceConfig(seed=3, n=3))
    back = loads_plurimap(dumps_plurimap(f))
    assert back.h == f.h and back.g == f.g
    for a, c in f.h.terms.items():
        assert np.array_equal(back.h.terms[a], c)


def test_round_trip_mobius():
    t = gen_mobius(np.random.default_rng(0), 2)
    f = PluriMap(t, PolyMap(2))
    back = loads_plurimap(dumps_plurimap(f))
    assert isinstance(back.h, MobiusMap) and np.array_equal(back.h.a, t.a)


@pytest.mark.parametrize(
    "text,where",
    [
        ("not json", "invalid JSON"),
        ('{"dimension": 0, "h": {}, "g": {}}', "dimension"),
        ('{"dimension": 1, "h": {"kind": "poly", "terms": []}}', "g: missing"),
        ('{"dimension": 1, "h": {"kind": "spline"}, "g": {"kind": "poly", "terms": []}}', "h.kind"),
        (
            '{"dimension": 2, "h": {"kind": "poly", "terms": [{"alpha": [1, 0], "coeff": [[1, 0], "x"]}]},'
            ' "g": {"kind": "poly", "terms": []}}',
            r"h.terms\[0\].coeff\[1\]",
        ),
        (
            '{"dimension": 2, "h": {"kind": "poly", "terms": [{"alpha": [1], "coeff": [[1, 0], [0, 0]]}]},'
            ' "g": {"kind": "poly", "terms": []}}',
            r"h.terms\[0\].alpha",
        ),
        (
            '{"dimension": 1, "h": {"kind": "poly", "terms": []}, "g": {"kind": "mobius", "a": [[[1, 0]]]}}',
            "g.a",
        ),
    ],
)
def test_parse_errors_name_the_field(text, where):
    with pytest.raises(MapParseError, match=where):
        loads_plurimap(text)


def test_complex_from_json():
    assert complex_from_json([1.5, -2], "x") == 1.5 - 2j
    assert complex_from_json(3, "x") == 3
    with pytest.raises(MapParseError, match="where"):
        complex_from_json([True, 0], "where")


def test_points():
    z = parse_point("0.1,0.2;-0.3,0;0.5", 3)
    np.testing.assert_array_equal(z, [0.1 + 0.2j, -0.3, 0.5])
    np.testing.assert_array_equal(parse_point(format_point(z)), z)
    with pytest.raises(MapParseError):
        parse_point("0.1,0.2", 2)
    with pytest.raises(MapParseError):
        parse_point("a,b")


# --- eval ------------------------------------------------------------------


def test_eval_identity_jacobian(tmp_path, capsys):
    path = tmp_path / "id.json"
    save_mapfile(PluriMap(PolyMap.identity(2), PolyMap(2)), path)
    code, out, _ = run(capsys, "eval", str(path), "--point", "0.1,0;0,0.2", "--what", "jacobian")
    assert code == EXIT_OK
    assert json.loads(out)["values"]["jacobian"] == 1.0


def test_eval_example_25_zero_tensor(tmp_path, capsys):
    path = tmp_path / "ex.json"
    assert run(capsys, "fixture", "example-2.5", "--out", str(path))[0] == EXIT_OK
    code, out, _ = run(capsys, "eval", str(path), "--point", "0.3,-0.1;0.2,0.4", "--what", "preschwarzian")
    assert code == EXIT_OK
    p = json.loads(out)["values"]["preschwarzian"]
    assert p["n"] == 2 and p["symmetric"] is True
    assert np.max(np.abs(np.array(p["coeffs"]))) < 1e-13


def test_eval_omega_byte_identical_to_library(tmp_path, capsys):
    f, z = gen_plurimap(RandomInstanceConfig(seed=11, n=2))
    path = tmp_path / "r.json"
    save_mapfile(f, path)
    code, out, _ = run(capsys, "eval", str(path), f"--point={format_point(z)}", "--what", "omega")
    assert code == EXIT_OK
    got = json.dumps(json.loads(out)["values"]["omega"])
    assert got == json.dumps(array_to_json(pluri_jet(f, z).omega))


def test_eval_all_quantities(tmp_path, capsys):
    f, z = gen_plurimap(RandomInstanceConfig(seed=12, n=2))
    path = tmp_path / "r.json"
    save_mapfile(f, path)
    argv = ["eval", str(path), f"--point={format_point(z)}"]
    for w in ("omega", "jacobian", "preschwarzian", "schwarzian", "oda", "norm-ball"):
        argv += ["--what", w]
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    v = json.loads(out)["values"]
    assert v["jacobian"] > 0
    assert v["norm-ball"]["value"] == pytest.approx(v["norm-ball"]["weight"] * v["norm-ball"]["norm"])
    s = np.array(v["schwarzian"]["coeffs"])
    oda = np.array(v["oda"]["coeffs"])
    # components S^k_ij agree with the Schwarzian operator at the point
    assert np.max(np.abs(s[..., 0] + 1j * s[..., 1] - (oda[..., 0] + 1j * oda[..., 1]))) < 1e-9


def test_eval_norm_ball_outside(tmp_path, capsys):
    path = tmp_path / "id.json"
    save_mapfile(PluriMap(PolyMap.identity(1), PolyMap(1)), path)
    assert run(capsys, "eval", str(path), "--point", "1.5,0", "--what", "norm-ball")[0] == EXIT_CONTRACT


# --- exit codes ------------------------------------------------------------


def test_exit_parse_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"dimension": 2, "h": {"kind": "poly", "terms": [{"alpha": [1, 0], "coeff": [[1, 0], "x"]}]},'
                    ' "g": {"kind": "poly", "terms": []}}')
    code, _, err = run(capsys, "eval", str(path), "--point", "0,0;0,0")
    assert code == EXIT_PARSE and "h.terms[0].coeff[1]" in err


def test_exit_parse_missing_file(capsys):
    assert run(capsys, "eval", "/nonexistent/map.json", "--point", "0,0")[0] == EXIT_PARSE


def test_exit_parse_bad_arguments(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "nonsense"])
    assert exc.value.code == EXIT_PARSE
    assert run(capsys, "verify", "--n", "0")[0] == EXIT_PARSE
    assert run(capsys, "reproduce", "--example", "4.1", "--param", "tt=2")[0] == EXIT_PARSE
    assert run(capsys, "reproduce", "--example", "stable", "--param", "lambdas=1,1,1")[0] == EXIT_PARSE


def test_exit_contract_singular_derivative(tmp_path, capsys):
    path = tmp_path / "sing.json"
    save_mapfile(PluriMap(PolyMap(2, [((2, 0), [1, 0]), ((0, 1), [0, 1])]), PolyMap(2)), path)
    code, _, err = run(capsys, "eval", str(path), "--point", "0,0;0,0")
    assert code == EXIT_CONTRACT and "SingularDerivative" in err


def test_exit_contract_degenerate_dilatation(tmp_path, capsys):
    path = tmp_path / "deg.json"
    save_mapfile(PluriMap(PolyMap.identity(2), PolyMap.identity(2)), path)
    code, _, err = run(capsys, "eval", str(path), "--point", "0,0;0,0")
    assert code == EXIT_CONTRACT and "DegenerateDilatation" in err


def test_exit_verify_failure(capsys):
    code, out, _ = run(capsys, "reproduce", "--example", "stable", "--param", "lambdas=1j,1j", "--format", "json")
    assert code == EXIT_VERIFY
    names = {r["name"]: r["status"] for r in json.loads(out)["records"]}
    assert names["diag"] == "fail" and names["rotations"] == "pass"


# --- verify ----------------------------------------------------------------


def test_verify_pre_suite(capsys, no_seed_env):
    code, out, _ = run(capsys, "verify", "--suite", "pre", "--trials", "10", "--seed", "1")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["summary"]["failed"] == 0 and rep["seed"] == 1
    assert all(r["anchor"] and r["status"] == "pass" for r in rep["records"])
    keys = [(r["suite"], r["n"], r["trial"]) for r in rep["records"]]
    assert keys == sorted(keys)


def test_verify_affine_factorization(capsys, no_seed_env):
    code, out, _ = run(capsys, "verify", "--suite", "affine", "--trials", "100", "--n", "2,3", "--no-timing")
    assert code == EXIT_OK
    fac = [r for r in json.loads(out)["records"] if r["name"] == "factorization"]
    assert len(fac) == 200 and max(r["defect"] for r in fac) < 1e-12


def test_verify_stability_expected_nonzero(capsys, no_seed_env):
    code, out, _ = run(capsys, "verify", "--suite", "stability", "--trials", "3", "--n", "2", "--no-timing")
    assert code == EXIT_OK
    recs = json.loads(out)["records"]
    nonzero = [r for r in recs if r["expect"] == "nonzero"]
    assert nonzero and all(r["status"] == "pass" and r["defect"] > 1e-6 for r in nonzero)


def test_verify_deterministic_without_timing(capsys, no_seed_env):
    argv = ("verify", "--suite", "schwarzian", "--trials", "2", "--seed", "5", "--no-timing")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and "runtime_ms" not in a


def test_verify_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "17")
    _, a, _ = run(capsys, "verify", "--suite", "holo", "--trials", "1", "--seed", "3", "--no-timing")
    monkeypatch.delenv(SEED_ENV)
    _, b, _ = run(capsys, "verify", "--suite", "holo", "--trials", "1", "--seed", "17", "--no-timing")
    assert json.loads(a)["seed"] == 17 and a == b


def test_verify_bad_seed_env(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "abc")
    assert run(capsys, "verify", "--suite", "pre", "--trials", "1")[0] == EXIT_PARSE


def test_verify_table(capsys, no_seed_env):
    code, out, _ = run(capsys, "verify", "--suite", "pre", "--trials", "1", "--n", "1", "--format", "table")
    assert code == EXIT_OK and "checks passed" in out and "frozen-point" in out


# --- reproduce / fixture / gen ---------------------------------------------


def test_reproduce_counter_omega(capsys):
    code, out, _ = run(capsys, "reproduce", "--example", "counter-omega", "--param", "alpha=0.5", "--format", "json")
    assert code == EXIT_OK
    sup = next(r for r in json.loads(out)["records"] if r["name"] == "sup-norm")
    assert abs(sup["computed"]["sup"] - 1.2) < 1e-3


def test_reproduce_example_41(capsys):
    code, out, _ = run(capsys, "reproduce", "--example", "4.1", "--param", "t=3", "--format", "json")
    assert code == EXIT_OK
    recs = {r["name"]: r for r in json.loads(out)["records"]}
    assert recs["omega-norm"]["computed"] == pytest.approx(3.0, abs=1e-12)
    re, im = recs["det-factor"]["computed"]
    assert re == pytest.approx(16.0, abs=1e-12) and im == 0


@pytest.mark.parametrize("example", ["2.5", "counter-det", "stable", "shear"])
def test_reproduce_examples_pass(example, capsys):
    code, out, _ = run(capsys, "reproduce", "--example", example)
    assert code == EXIT_OK and "fail" not in out.split()


def test_reproduce_deterministic(capsys):
    argv = ("reproduce", "--example", "shear", "--format", "json", "--no-timing")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_fixture_command_round_trip(tmp_path, capsys):
    path = tmp_path / "cd.json"
    assert run(capsys, "fixture", "counter-det", "--param", "t=0.25", "--out", str(path))[0] == EXIT_OK
    f = loads_plurimap(path.read_text())
    want = fixture("counter-det", t=0.25).plurimap
    assert f.h == want.h and f.g == want.g
    assert run(capsys, "fixture", "shear")[0] == EXIT_PARSE


def test_gen_command_deterministic(capsys, no_seed_env):
    code, a, err = run(capsys, "gen", "--n", "2", "--seed", "42")
    assert code == EXIT_OK and ";" in err
    _, b, _ = run(capsys, "gen", "--n", "2", "--seed", "42")
    assert a == b
    f, z = gen_plurimap(RandomInstanceConfig(seed=42, n=2))
    assert a.strip() == dumps_plurimap(f)
    np.testing.assert_array_equal(parse_point(err.strip()), z)
    assert run(capsys, "gen", "--n", "9")[0] == EXIT_PARSE


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "plurischwarz", "reproduce", "--example", "counter-det"],
        capture_output=True, text=True, timeout=120,
    )
    assert res.returncode == 0 and "undefined-dilatation" in res.stdout
