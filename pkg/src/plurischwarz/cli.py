"""Command-line entry point: ``plurischwarz {eval,verify,reproduce,fixture,gen}``.

Exit codes: 0 success, 2 parse error, 3 numerical contract violation,
4 verification failure.
"""

from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .errors import ContractViolation, MapParseError, NumericalContractError
from .holomap import PolyMap, oda_components
from .lincomplex import op_norm_bilinear
from .oracles import FIXTURES, RandomInstanceConfig, fixture, gen_plurimap
from .plurimap import PluriMap, frozen_jet, jacobian, pluri_jet, pre_schwarzian, schwarzian
from .reproduce import EXAMPLES, jsonable, reproduce
from .serialize import (
    array_to_json,
    bilinear_to_json,
    complex_to_json,
    dumps_plurimap,
    format_point,
    load_mapfile,
    parse_point,
    save_mapfile,
)
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONTRACT = 3
EXIT_VERIFY = 4

MAX_DIMENSION = 6
MAX_DEGREE = 10
SEED_ENV = "PLURISCHWARZ_SEED"
WHAT = ("omega", "jacobian", "preschwarzian", "schwarzian", "oda", "norm-ball")


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _seed(arg_seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return arg_seed
    try:
        return int(env)
    except ValueError:
        raise MapParseError(f"{SEED_ENV}={env!r} is not an integer") from None


def _parse_params(items: Sequence[str] | None) -> dict:
    """``k=v`` pairs; comma-separated values become lists of numbers."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise MapParseError(f"--param {item!r}: expected key=value")
        key, val = item.split("=", 1)
        key = key.strip().replace("-", "_")
        parts = [p.strip() for p in val.split(",")]
        try:
            nums = [_number(p) for p in parts]
        except ValueError:
            raise MapParseError(f"--param {key}: cannot parse {val!r} as numbers") from None
        out[key] = nums if len(nums) > 1 else nums[0]
    return out


def _check_param_names(fn, params: dict, what: str) -> None:
    known = set(inspect.signature(fn).parameters)
    unknown = sorted(set(params) - known)
    if unknown:
        raise MapParseError(f"unknown parameter(s) for {what}: {', '.join(unknown)}; known: {', '.join(sorted(known))}")


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return complex(text.replace(" ", ""))


def _parse_dims(text: str) -> list[int]:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise MapParseError(f"--n {text!r}: expected comma-separated integers") from None
    if not dims or any(d < 1 or d > MAX_DIMENSION for d in dims):
        raise MapParseError(f"--n {text!r}: dimensions must lie in 1..{MAX_DIMENSION}")
    return dims


def _check_limits(f: PluriMap) -> None:
    if f.n > MAX_DIMENSION:
        raise MapParseError(f"dimension {f.n} exceeds the limit {MAX_DIMENSION}")
    for part in ("h", "g"):
        m = getattr(f, part)
        if isinstance(m, PolyMap) and m.degree > MAX_DEGREE:
            raise MapParseError(f"{part}: degree {m.degree} exceeds the limit {MAX_DEGREE}")


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=1)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _table(rows: list[dict], columns: Sequence[str]) -> str:
    def cell(v) -> str:
        if isinstance(v, float):
            return f"{v:.3e}"
        s = json.dumps(v) if not isinstance(v, str) else v
        return s if len(s) <= 48 else s[:45] + "..."

    body = [[cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(b[i]) for b in body)) if body else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(b, widths)) for b in body]
    return "\n".join(lines)


# --------------------------------------------------------------------------
# eval


def _evaluate(f: PluriMap, z: np.ndarray, what: str):
    if what == "omega":
        return array_to_json(pluri_jet(f, z).omega)
    if what == "jacobian":
        return jacobian(f, z)
    if what == "preschwarzian":
        return bilinear_to_json(pre_schwarzian(f, z))
    if what == "schwarzian":
        return bilinear_to_json(schwarzian(f, z))
    if what == "oda":
        # components S^k_ij of the holomorphic map h - conj(w(z)) g frozen at z
        return {"n": f.n, "symmetric": True, "coeffs": array_to_json(oda_components(frozen_jet(f, z)))}
    if what == "norm-ball":
        r2 = float(np.vdot(z, z).real)
        if not r2 < 1.0:
            raise ContractViolation(f"|z|^2 = {r2:.6g}: the point is not inside the unit ball")
        norm = op_norm_bilinear(pre_schwarzian(f, z))
        return {"weight": 1.0 - r2, "norm": norm, "value": (1.0 - r2) * norm}
    raise ValueError(what)


def cmd_eval(args) -> int:
    f = load_mapfile(args.mapfile)
    _check_limits(f)
    z = parse_point(args.point, f.n)
    whats = args.what or ["preschwarzian"]
    values = {w: _evaluate(f, z, w) for w in whats}
    report = {
        "command": "eval",
        "map": os.path.basename(args.mapfile),
        "point": [complex_to_json(c) for c in z],
        "values": values,
    }
    _emit(report, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    seed = _seed(args.seed)
    dims = _parse_dims(args.n)
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    if args.trials < 1:
        raise MapParseError("--trials must be >= 1")
    records = run_suites(suites, args.trials, seed, dims)
    timing = not args.no_timing
    failed = [r for r in records if not r.passed]
    report = {
        "command": "verify",
        "suite": args.suite,
        "trials": args.trials,
        "dims": dims,
        "seed": seed,
        "summary": {"checks": len(records), "passed": len(records) - len(failed), "failed": len(failed)},
        "records": [r.to_dict(timing) for r in records],
    }
    if args.format == "table":
        cols = ["suite", "n", "trial", "name", "status", "defect", "tolerance"]
        shown = [r.to_dict(False) for r in (failed if args.failures_only else records)]
        print(_table(shown, cols))
        print(f"\n{report['summary']['passed']}/{len(records)} checks passed")
        if args.out:
            _emit(report, args.out)
    else:
        _emit(report, args.out)
    return EXIT_OK if not failed else EXIT_VERIFY


# --------------------------------------------------------------------------
# reproduce


def cmd_reproduce(args) -> int:
    params = _parse_params(args.param)
    _check_param_names(EXAMPLES[args.example], params, args.example)
    try:
        rows = reproduce(args.example, **params)
    except ValueError as exc:
        raise MapParseError(f"{args.example}: {exc}") from None
    timing = not args.no_timing
    failed = [r for r in rows if not r.passed]
    report = {
        "command": "reproduce",
        "example": args.example,
        "params": jsonable(params),
        "summary": {"claims": len(rows), "passed": len(rows) - len(failed), "failed": len(failed)},
        "records": [r.to_dict(timing) for r in rows],
    }
    if args.format == "table":
        print(_table([r.to_dict(False) for r in rows], ["name", "expected", "computed", "status", "defect", "tolerance"]))
        if args.out:
            _emit(report, args.out)
    else:
        _emit(report, args.out)
    return EXIT_OK if not failed else EXIT_VERIFY


# --------------------------------------------------------------------------
# fixture / gen


def cmd_fixture(args) -> int:
    params = _parse_params(args.param)
    _check_param_names(FIXTURES[args.name], params, args.name)
    fx = fixture(args.name, **params)
    if fx.plurimap is None:
        raise MapParseError(f"fixture {args.name!r} has no map part to write")
    if args.out:
        save_mapfile(fx.plurimap, args.out)
    else:
        print(dumps_plurimap(fx.plurimap))
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = _seed(args.seed)
    if not 1 <= args.n <= MAX_DIMENSION:
        raise MapParseError(f"--n must lie in 1..{MAX_DIMENSION}")
    if not 0 <= args.degree <= MAX_DEGREE:
        raise MapParseError(f"--degree must lie in 0..{MAX_DEGREE}")
    f, z = gen_plurimap(RandomInstanceConfig(seed=seed, n=args.n, degree=args.degree))
    if args.out:
        save_mapfile(f, args.out)
    else:
        print(dumps_plurimap(f))
    # the probe point is where the instance is certified to be in the class
    print(format_point(z), file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="plurischwarz", description="Pre-Schwarzian and Schwarzian derivatives of pluriharmonic mappings in C^n.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    e = sub.add_parser("eval", help="evaluate operators of a map file at a point")
    e.add_argument("mapfile")
    e.add_argument("--point", required=True, help='coordinates as "re,im;re,im;..."')
    e.add_argument("--what", action="append", choices=WHAT, help="may be repeated (default: preschwarzian)")
    e.add_argument("--out", help="write the JSON report here instead of stdout")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run the randomized property suites")
    v.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--seed", type=int, default=0, help=f"overridden by ${SEED_ENV}")
    v.add_argument("--n", default="1,2,3", help="comma-separated dimensions")
    v.add_argument("--format", choices=("json", "table"), default="json")
    v.add_argument("--failures-only", action="store_true", help="table format: list failing rows only")
    v.add_argument("--no-timing", action="store_true", help="omit runtime_ms so the report is byte-stable")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reproduce", help="recompute the claims of a worked example")
    r.add_argument("--example", required=True, choices=tuple(EXAMPLES))
    r.add_argument("--param", action="append", metavar="KEY=VALUE")
    r.add_argument("--format", choices=("json", "table"), default="table")
    r.add_argument("--no-timing", action="store_true")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reproduce)

    x = sub.add_parser("fixture", help="write the map file of a named fixture")
    x.add_argument("name", choices=tuple(FIXTURES))
    x.add_argument("--param", action="append", metavar="KEY=VALUE")
    x.add_argument("--out")
    x.set_defaults(func=cmd_fixture)

    g = sub.add_parser("gen", help="write a seeded random map file; the probe point goes to stderr")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--degree", type=int, default=3)
    g.add_argument("--seed", type=int, default=0, help=f"overridden by ${SEED_ENV}")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MapParseError, OSError) as exc:
        print(f"plurischwarz: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalContractError as exc:
        print(f"plurischwarz: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
