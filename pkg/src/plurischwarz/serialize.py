"""JSON map files and JSON encodings of results.

Complex numbers are ``[re, im]`` pairs.  Python's float repr is the shortest
round-tripping decimal, so parse(serialize(x)) is bit-exact.

Map file layout::

    {"dimension": n,
     "h": {"kind": "poly", "terms": [{"alpha": [..], "coeff": [[re, im], ..]}, ..]},
     "g": {"kind": "mobius", "a": [[[re, im], ..], ..]}}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MapParseError
from .holomap import MobiusMap, PolyMap
from .lincomplex import BilinearOp
from .plurimap import PluriMap


def complex_to_json(c) -> list[float]:
    c = complex(c)
    return [float(c.real), float(c.imag)]


def complex_from_json(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if (
        not isinstance(x, (list, tuple))
        or len(x) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)
    ):
        raise MapParseError(f"{where}: expected [re, im], got {x!r}")
    return complex(float(x[0]), float(x[1]))


def array_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return complex_to_json(a)
    return [array_to_json(x) for x in a]


def bilinear_to_json(t: BilinearOp) -> dict:
    return {"n": t.n, "symmetric": bool(t.symmetric), "coeffs": array_to_json(t.coeffs)}


def holomap_to_dict(f) -> dict:
    if isinstance(f, PolyMap):
        return {
            "kind": "poly",
            "terms": [{"alpha": list(a), "coeff": array_to_json(c)} for a, c in f.terms.items()],
        }
    if isinstance(f, MobiusMap):
        return {"kind": "mobius", "a": array_to_json(f.a)}
    raise ValueError(f"cannot serialize {type(f).__name__}")


def holomap_from_dict(d, n: int, where: str):
    if not isinstance(d, dict):
        raise MapParseError(f"{where}: expected an object")
    kind = d.get("kind")
    if kind == "poly":
        terms = d.get("terms")
        if not isinstance(terms, list):
            raise MapParseError(f"{where}.terms: expected a list")
        out = []
        for t, term in enumerate(terms):
            loc = f"{where}.terms[{t}]"
            if not isinstance(term, dict) or "alpha" not in term or "coeff" not in term:
                raise MapParseError(f"{loc}: expected an object with 'alpha' and 'coeff'")
            alpha = term["alpha"]
            if (
                not isinstance(alpha, list)
                or len(alpha) != n
                or not all(isinstance(a, int) and not isinstance(a, bool) and a >= 0 for a in alpha)
            ):
                raise MapParseError(f"{loc}.alpha: expected {n} non-negative integers, got {alpha!r}")
            coeff = term["coeff"]
            if not isinstance(coeff, list) or len(coeff) != n:
                raise MapParseError(f"{loc}.coeff: expected {n} complex entries")
            out.append((alpha, [complex_from_json(c, f"{loc}.coeff[{k}]") for k, c in enumerate(coeff)]))
        return PolyMap(n, out)
    if kind == "mobius":
        rows = d.get("a")
        if not isinstance(rows, list) or len(rows) != n + 1:
            raise MapParseError(f"{where}.a: expected {n + 1} rows")
        a = np.zeros((n + 1, n + 1), dtype=complex)
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n + 1:
                raise MapParseError(f"{where}.a[{i}]: expected {n + 1} entries")
            for j, x in enumerate(row):
                a[i, j] = complex_from_json(x, f"{where}.a[{i}][{j}]")
        try:
            return MobiusMap(a)
        except ValueError as exc:
            raise MapParseError(f"{where}.a: {exc}") from None
    raise MapParseError(f"{where}.kind: expected 'poly' or 'mobius', got {kind!r}")


def plurimap_to_dict(f: PluriMap) -> dict:
    return {"dimension": f.n, "h": holomap_to_dict(f.h), "g": holomap_to_dict(f.g)}


def plurimap_from_dict(d) -> PluriMap:
    if not isinstance(d, dict):
        raise MapParseError("map file: expected a JSON object")
    n = d.get("dimension")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MapParseError(f"dimension: expected a positive integer, got {n!r}")
    for part in ("h", "g"):
        if part not in d:
            raise MapParseError(f"{part}: missing")
    return PluriMap(holomap_from_dict(d["h"], n, "h"), holomap_from_dict(d["g"], n, "g"))


def dumps_plurimap(f: PluriMap) -> str:
    return json.dumps(plurimap_to_dict(f), indent=1)


def loads_plurimap(text: str) -> PluriMap:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MapParseError(f"invalid JSON: {exc}") from None
    return plurimap_from_dict(data)


def load_mapfile(path) -> PluriMap:
    return loads_plurimap(Path(path).read_text(encoding="utf-8"))


def save_mapfile(f: PluriMap, path) -> None:
    Path(path).write_text(dumps_plurimap(f) + "\n", encoding="utf-8")


def parse_point(text: str, n: int | None = None) -> np.ndarray:
    """``"re,im;re,im;..."`` -> complex vector."""
    coords = []
    for k, chunk in enumerate(text.strip().split(";")):
        parts = chunk.split(",")
        try:
            if len(parts) == 1:
                coords.append(complex(float(parts[0]), 0.0))
            elif len(parts) == 2:
                coords.append(complex(float(parts[0]), float(parts[1])))
            else:
                raise ValueError
        except ValueError:
            raise MapParseError(f"point coordinate {k}: expected 're,im', got {chunk!r}") from None
    if n is not None and len(coords) != n:
        raise MapParseError(f"point has {len(coords)} coordinates, map dimension is {n}")
    return np.array(coords, dtype=complex)


def format_point(z) -> str:
    return ";".join(f"{float(c.real)!r},{float(c.imag)!r}" for c in np.asarray(z, dtype=complex))
