"""JSON file formats: problem files, factorization files and reports.

All indices in files are 1-based.  Reals are written with Python's shortest
round-trip representation, so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .demand import BasisFunction, BasisSuite, ProblemSpec, SpecError
from .factorizer import Factorization, TileRecord
from .mlsvd import DEFAULT_TOL

FORMAT_VERSION = "1"

_PROBLEM_KEYS = {"K", "L", "P", "Lambda", "Gamma", "Delta", "exponent_grids", "coefficients", "basis", "input"}
_REQUIRED = ("K", "L", "P", "Lambda", "Gamma", "Delta")
_FACT_KEYS = {"format_version", "N", "D", "E", "tiles", "tolerance"}


class FormatError(ValueError):
    """Malformed file; the message names the line or field."""


def _load_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be a JSON object")
    return doc


def _int(doc, key):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"field {key!r}: expected an integer, got {v!r}")
    return v


def _int_list(v, key):
    if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in v):
        raise FormatError(f"field {key!r}: expected an array of integers, got {v!r}")
    return v


def _real(v, key):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise FormatError(f"field {key!r}: expected a finite real, got {v!r}")
    return float(v)


def parse_problem(doc: dict) -> tuple[ProblemSpec, BasisSuite | None]:
    unknown = set(doc) - _PROBLEM_KEYS
    if unknown:
        raise FormatError(f"unknown member(s): {', '.join(sorted(unknown))}")
    for key in _REQUIRED:
        if key not in doc:
            raise FormatError(f"field {key!r}: missing")
    K, L, Gamma, Delta = (_int(doc, k) for k in ("K", "L", "Gamma", "Delta"))
    P = _int_list(doc["P"], "P")
    Lam = _int_list(doc["Lambda"], "Lambda")
    grids = None
    if "exponent_grids" in doc:
        if not isinstance(doc["exponent_grids"], list):
            raise FormatError("field 'exponent_grids': expected an array of arrays")
        grids = tuple(tuple(_int_list(g, f"exponent_grids[{i}]")) for i, g in enumerate(doc["exponent_grids"], 1))

    coeffs = []
    raw = doc.get("coefficients", [])
    if not isinstance(raw, list):
        raise FormatError("field 'coefficients': expected an array")
    for n, c in enumerate(raw, start=1):
        key = f"coefficients[{n}]"
        if not isinstance(c, dict) or set(c) != {"user", "index", "value"}:
            raise FormatError(f"field {key!r}: expected an object with exactly 'user', 'index', 'value'")
        coeffs.append((_int(c, "user"), tuple(_int_list(c["index"], f"{key}.index")), _real(c["value"], f"{key}.value")))

    try:
        spec = ProblemSpec(K, L, tuple(P), tuple(Lam), Gamma, Delta, tuple(coeffs), grids)
    except SpecError as exc:
        raise FormatError(f"field {exc.field!r}: {exc}") from None

    basis = None
    if "basis" in doc or "input" in doc:
        if "basis" not in doc or "input" not in doc:
            missing = "basis" if "basis" not in doc else "input"
            raise FormatError(f"field {missing!r}: missing ('basis' and 'input' go together)")
        if not isinstance(doc["basis"], list):
            raise FormatError("field 'basis': expected an array")
        funcs = []
        for n, b in enumerate(doc["basis"], start=1):
            key = f"basis[{n}]"
            if not isinstance(b, dict) or "name" not in b or set(b) - {"name", "params", "arg"}:
                raise FormatError(f"field {key!r}: expected an object with 'name' and optional 'params', 'arg'")
            params = tuple(_real(p, f"{key}.params") for p in b.get("params", []))
            arg = _int(b, "arg") if "arg" in b else None
            try:
                funcs.append(BasisFunction(b["name"], params, arg))
            except SpecError as exc:
                raise FormatError(f"field {key!r}: {exc}") from None
        inp = doc["input"]
        if not isinstance(inp, list) or not inp:
            raise FormatError("field 'input': expected a non-empty array of reals")
        try:
            basis = BasisSuite(tuple(funcs), tuple(_real(v, "input") for v in inp))
        except SpecError as exc:
            raise FormatError(f"field {exc.field!r}: {exc}") from None
        if len(funcs) != L:
            raise FormatError(f"field 'basis': needs {L} entries, got {len(funcs)}")
    return spec, basis


def load_problem(path) -> tuple[ProblemSpec, BasisSuite | None]:
    try:
        return parse_problem(_load_json(path))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def problem_to_dict(spec: ProblemSpec, basis: BasisSuite | None = None) -> dict:
    doc = {
        "K": spec.K, "L": spec.L, "P": list(spec.P), "Lambda": list(spec.Lambda),
        "Gamma": spec.Gamma, "Delta": spec.Delta,
        "exponent_grids": [list(g) for g in spec.exponent_grids],
        "coefficients": [{"user": k, "index": list(i), "value": v} for k, i, v in spec.coefficients],
    }
    if basis is not None:
        doc["basis"] = []
        for f in basis.functions:
            entry = {"name": f.name}
            if f.params:
                entry["params"] = list(f.params)
            if f.arg is not None:
                entry["arg"] = f.arg
            doc["basis"].append(entry)
        doc["input"] = list(basis.input)
    return doc


def dump_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n", encoding="utf-8")


def factorization_to_dict(f: Factorization) -> dict:
    entries = []
    for n in range(f.N):
        slab = f.E[n]
        for pos in np.flatnonzero(slab.reshape(-1, order="F")):
            idx = np.unravel_index(pos, slab.shape, order="F")
            entries.append({"server": n + 1, "index": [int(i) + 1 for i in idx], "value": float(slab[idx])})
    return {
        "format_version": FORMAT_VERSION,
        "N": f.N,
        "D": [[float(v) for v in row] for row in f.D],
        "E": entries,
        "tiles": [
            {"class": t.cls, "i": t.block, "j": list(t.windows), "Q": list(t.active), "cols": list(t.cols), "rank": t.rank}
            for t in f.tiles
        ],
        "tolerance": f.tolerance,
    }


def parse_factorization(doc: dict, spec: ProblemSpec) -> Factorization:
    unknown = set(doc) - _FACT_KEYS
    if unknown:
        raise FormatError(f"unknown member(s): {', '.join(sorted(unknown))}")
    for key in _FACT_KEYS:
        if key not in doc:
            raise FormatError(f"field {key!r}: missing")
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatError(f"field 'format_version': unsupported version {doc['format_version']!r}")
    N = _int(doc, "N")
    rows = doc["D"]
    if not isinstance(rows, list) or len(rows) != spec.K:
        raise FormatError(f"field 'D': expected {spec.K} rows")
    D = np.zeros((spec.K, N))
    for k, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != N:
            raise FormatError(f"field 'D': row {k + 1} must have {N} entries")
        D[k] = [_real(v, f"D[{k + 1}]") for v in row]
    E = np.zeros((N,) + spec.P)
    for n, e in enumerate(doc["E"], start=1):
        key = f"E[{n}]"
        if not isinstance(e, dict) or set(e) != {"server", "index", "value"}:
            raise FormatError(f"field {key!r}: expected an object with exactly 'server', 'index', 'value'")
        s, idx = _int(e, "server"), _int_list(e["index"], f"{key}.index")
        if not 1 <= s <= N or len(idx) != spec.L or any(not 1 <= i <= p for i, p in zip(idx, spec.P)):
            raise FormatError(f"field {key!r}: server {s} / index {idx} out of range")
        E[(s - 1,) + tuple(i - 1 for i in idx)] = _real(e["value"], f"{key}.value")
    tiles, start = [], 1
    for n, t in enumerate(doc["tiles"], start=1):
        try:
            rank = int(t["rank"])
            tiles.append(TileRecord(n, int(t["class"]), int(t["i"]), tuple(t["j"]), tuple(t["Q"]),
                                    tuple(t["cols"]), rank, start, start + rank - 1))
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"field 'tiles[{n}]': malformed tile record") from None
        start += rank
    if start - 1 != N:
        raise FormatError(f"field 'tiles': ranks sum to {start - 1}, N is {N}")
    tol = _real(doc["tolerance"], "tolerance")
    return Factorization(D, E, tuple(tiles), tol if tol > 0 else DEFAULT_TOL)


def load_factorization(path, spec: ProblemSpec) -> Factorization:
    try:
        return parse_factorization(_load_json(path), spec)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None
