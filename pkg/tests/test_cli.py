import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stfdc.cli import EXIT_INADMISSIBLE, EXIT_INPUT, EXIT_OK, EXIT_VERIFY, main
from stfdc.demand import BasisFunction, BasisSuite, ProblemSpec
from stfdc.factorizer import build_factorization
from stfdc.formats import (
    FormatError,
    dump_json,
    factorization_to_dict,
    load_factorization,
    load_problem,
    parse_factorization,
    parse_problem,
    problem_to_dict,
)
from stfdc.generate import random_basis, random_problem

from conftest import DATA, two_user_spec, base_spec


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def base_file(tmp_path):
    basis = BasisSuite((BasisFunction("exp"), BasisFunction("log")), (1.3,))
    path = tmp_path / "base.json"
    dump_json(problem_to_dict(base_spec(), basis), path)
    return path


@pytest.fixture
def base_fact(tmp_path, base_file):
    out = tmp_path / "fact.json"
    assert run("factorize", base_file, out) == EXIT_OK
    return out


# -- problem files ------------------------------------------------------------------

def test_problem_round_trip():
    spec = two_user_spec()
    basis = BasisSuite((BasisFunction("exp", arg=1), BasisFunction("affine", (2.0, 0.5), arg=2),
                        BasisFunction("sqrt", arg=2), BasisFunction("cos", arg=3)), (1.0, math.e, 1.0))
    s2, b2 = parse_problem(json.loads(json.dumps(problem_to_dict(spec, basis))))
    assert s2 == spec and b2 == basis


@pytest.mark.parametrize("patch, needle", [
    ({"Gamma": 3}, "Gamma"),
    ({"extra": 1}, "extra"),
    ({"K": "4"}, "'K'"),
    ({"coefficients": [{"user": 1, "index": [1, 1]}]}, "coefficients[1]"),
    ({"basis": [{"name": "exp"}, {"name": "log"}]}, "input"),
    ({"basis": [{"name": "exp"}], "input": [1.0]}, "basis"),
    ({"basis": [{"name": "exp"}, {"name": "nope"}], "input": [1.0]}, "basis[2]"),
    ({"coefficients": [{"user": 1, "index": [1, 1], "value": float("nan")}]}, "value"),
])
def test_problem_diagnostics(patch, needle):
    doc = {"K": 4, "L": 2, "P": [4, 4], "Lambda": [2, 2], "Gamma": 2, "Delta": 2}
    doc.update(patch)
    with pytest.raises(FormatError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        parse_problem(doc)


def test_malformed_json_names_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "K": 4,\n "L": }\n')
    with pytest.raises(FormatError, match="line 3"):
        load_problem(path)


# -- factorization files ---------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_factorization_round_trip_is_bit_exact(seed):
    spec = random_problem(np.random.default_rng(seed))
    _, _, f = build_factorization(spec)
    doc = json.loads(json.dumps(factorization_to_dict(f)))
    g = parse_factorization(doc, spec)
    assert np.array_equal(f.D, g.D) and np.array_equal(f.E, g.E)
    assert f.tile_ranges == g.tile_ranges and g.tolerance == f.tolerance


def test_factorization_file_checks(base_fact):
    spec = base_spec()
    doc = json.loads(base_fact.read_text())
    assert doc["format_version"] == "1" and doc["N"] == 16
    bad = dict(doc, N=15)
    with pytest.raises(FormatError):
        parse_factorization(bad, spec)
    bad = dict(doc, E=doc["E"] + [{"server": 99, "index": [1, 1], "value": 1.0}])
    with pytest.raises(FormatError, match="E"):
        parse_factorization(bad, spec)
    with pytest.raises(FormatError, match="D"):
        parse_factorization(doc, ProblemSpec(3, 2, (4, 4), (2, 2), 2, 2))
    assert load_factorization(base_fact, spec).N == 16


# -- bound ---------------------------------------------------------------------

def test_bound_base(base_file, capsys):
    assert run("bound", base_file) == EXIT_OK
    out = capsys.readouterr().out
    assert "constructive: 16" in out and "simplified: 16" in out and "baseline (T=1): 32" in out


def test_bound_k5(capsys):
    assert run("bound", DATA / "k5_variant.json") == EXIT_OK
    out = capsys.readouterr().out
    assert "constructive: 20" in out and "simplified: unavailable" in out


def test_bound_bad_gamma(tmp_path, capsys):
    path = write(tmp_path, "g.json", {"K": 2, "L": 2, "P": [2, 2], "Lambda": [1, 1], "Gamma": 3, "Delta": 1})
    assert run("bound", path) == EXIT_INPUT
    assert "Gamma" in capsys.readouterr().err


def test_bound_output_file(base_file, tmp_path):
    out = tmp_path / "b.json"
    assert run("bound", base_file, "--output", out, "--baseline-T", 2) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["baseline"]["N"] == 16 and doc["class_counts"] == [8, 0, 0, 0]


# -- factorize -------------------------------------------------------------------

def test_factorize_prints_and_is_deterministic(base_file, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("factorize", base_file, a, "--seed", 3) == EXIT_OK
    out = capsys.readouterr().out
    assert "N: 16" in out
    residual = float(out.split("residual: ")[1].split()[0])
    assert residual <= 1e-10
    assert run("factorize", base_file, "--output", b) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_factorize_zero(tmp_path):
    out = tmp_path / "z.json"
    assert run("factorize", DATA / "zero.json", out) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["N"] == 0 and doc["E"] == []


def test_factorize_inadmissible(tmp_path, capsys):
    path = tmp_path / "bad.json"
    dump_json(problem_to_dict(two_user_spec(Gamma=2)), path)
    assert run("factorize", path, tmp_path / "o.json") == EXIT_INADMISSIBLE
    assert "(2, 1, 3, 2)" in capsys.readouterr().err


# -- verify ----------------------------------------------------------------------

def test_verify_ok(base_file, base_fact, capsys):
    assert run("verify", base_file, base_fact) == EXIT_OK
    assert "ok" in capsys.readouterr().out


def test_verify_delta_violation(base_file, base_fact, tmp_path, capsys):
    doc = json.loads(base_fact.read_text())
    doc["D"][2][0] = 0.5  # server 1 now also talks to user 3
    path = write(tmp_path, "f.json", doc)
    assert run("verify", base_file, path) == EXIT_VERIFY
    assert "delta" in capsys.readouterr().out


def test_verify_residual_violation(base_file, base_fact, tmp_path, capsys):
    doc = json.loads(base_fact.read_text())
    doc["E"][0]["value"] += 1e-3
    path = write(tmp_path, "f.json", doc)
    assert run("verify", base_file, path) == EXIT_VERIFY
    assert "residual" in capsys.readouterr().out


def test_verify_shape_mismatch(base_fact, tmp_path):
    path = write(tmp_path, "p.json", {"K": 3, "L": 2, "P": [4, 4], "Lambda": [2, 2], "Gamma": 2, "Delta": 2})
    assert run("verify", path, base_fact) == EXIT_INPUT


def test_verify_rejects_every_mutation(base_file, base_fact, tmp_path):
    """Single-entry perturbations of D or E, each above tolerance, must fail verification."""
    rng = np.random.default_rng(0)
    doc = json.loads(base_fact.read_text())
    for trial in range(12):
        bad = json.loads(json.dumps(doc))
        if trial % 2:
            e = bad["E"][rng.integers(len(bad["E"]))]
            e["value"] += 1e-6
        else:
            k, n = rng.integers(4), rng.integers(16)
            bad["D"][k][n] += 1e-6
        path = write(tmp_path, f"m{trial}.json", bad)
        assert run("verify", base_file, path) == EXIT_VERIFY


# -- simulate / report -------------------------------------------------------------

def test_simulate_base(base_file, base_fact, tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert run("simulate", base_file, base_fact, rep) == EXIT_OK
    doc = json.loads(rep.read_text())
    assert doc["factorization"]["rate"] == 0.25
    assert doc["simulation"]["max_rel_error"] <= 1e-9


def test_simulate_domain_error(tmp_path, base_fact, capsys):
    path = tmp_path / "neg.json"
    dump_json(problem_to_dict(base_spec(), BasisSuite((BasisFunction("exp"), BasisFunction("log")), (-1.0,))), path)
    assert run("simulate", path, base_fact) == EXIT_INPUT
    assert "subfunction 2" in capsys.readouterr().err


def test_simulate_needs_basis(tmp_path, base_fact):
    path = tmp_path / "nb.json"
    dump_json(problem_to_dict(base_spec()), path)
    assert run("simulate", path, base_fact) == EXIT_INPUT


def finite_numbers(doc):
    if isinstance(doc, dict):
        return all(finite_numbers(v) for v in doc.values())
    if isinstance(doc, list):
        return all(finite_numbers(v) for v in doc)
    if isinstance(doc, float):
        return math.isfinite(doc)
    return True


def test_report_fields_finite(tmp_path):
    rng = np.random.default_rng(11)
    spec = random_problem(rng)
    prob, fact, rep = tmp_path / "p.json", tmp_path / "f.json", tmp_path / "r.json"
    dump_json(problem_to_dict(spec, random_basis(rng, spec.L)), prob)
    assert run("factorize", prob, fact) == EXIT_OK
    assert run("report", prob, fact, "--output", rep) == EXIT_OK
    doc = json.loads(rep.read_text())
    for key in ("problem", "normalized", "bounds", "factorization", "achieved", "multiplication_costs", "simulation"):
        assert key in doc
    assert finite_numbers(doc) and doc["achieved"]["ok"]


def test_pipeline_determinism(base_file, tmp_path):
    """bound -> factorize -> verify -> simulate twice gives identical files and exit codes."""
    outputs = []
    for tag in "ab":
        codes = [
            run("bound", base_file, "-o", tmp_path / f"b{tag}.json"),
            run("factorize", base_file, tmp_path / f"f{tag}.json"),
            run("verify", base_file, tmp_path / f"f{tag}.json"),
            run("simulate", base_file, tmp_path / f"f{tag}.json", tmp_path / f"s{tag}.json"),
        ]
        outputs.append((codes, [(tmp_path / f"{x}{tag}.json").read_bytes() for x in "bfs"]))
    assert outputs[0] == outputs[1]
    assert outputs[0][0] == [0, 0, 0, 0]


@pytest.mark.skipif(shutil.which("stfdc") is None, reason="console script not installed")
def test_console_script(tmp_path):
    res = subprocess.run(["stfdc", "bound", str(DATA / "base.json")], capture_output=True, text=True)
    assert res.returncode == 0 and "constructive: 16" in res.stdout
    res = subprocess.run([sys.executable, "-m", "stfdc", "verify", str(DATA / "base.json"), str(tmp_path / "missing.json")],
                         capture_output=True, text=True)
    assert res.returncode == 2
