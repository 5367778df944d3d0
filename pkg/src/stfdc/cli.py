"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 inadmissible demand, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from .demand import BasisDomainError, ProblemSpec, build_demand_tensor, normalized_constraints
from .factorizer import (
    InadmissibleDemandError,
    baseline_server_count,
    build_factorization,
    verify_constraints,
    verify_reconstruction,
)
from .formats import FormatError, dump_json, factorization_to_dict, load_factorization, load_problem
from .mlsvd import DEFAULT_TOL
from .protocol import simulate
from .tiling import (
    PreconditionError,
    bound_constructive,
    bound_general,
    bound_simplified,
    class_cardinalities,
    worst_case_plan,
)

EXIT_OK, EXIT_INPUT, EXIT_INADMISSIBLE, EXIT_VERIFY = 0, 2, 3, 4
SIM_TOLERANCE = 1e-9


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _simplified(spec: ProblemSpec) -> int | None:
    if len(set(spec.P)) != 1 or len(set(spec.Lambda)) != 1:
        return None
    try:
        return bound_simplified(spec.K, spec.Delta, spec.L, spec.Gamma, spec.P[0], spec.Lambda[0])
    except PreconditionError:
        return None


def bounds_summary(spec: ProblemSpec, T: int = 1) -> dict:
    plan = worst_case_plan(spec)
    L_prime = math.prod(spec.P)
    with warnings.catch_warnings():
        # a fractional count is reported as a real; the CLI flags it in text
        warnings.simplefilter("ignore")
        baseline = baseline_server_count(spec.K, spec.Delta, L_prime, spec.Gamma, T)
    constructive = bound_constructive(plan)
    return {
        "constructive": constructive,
        "general": bound_general(spec),
        "simplified": _simplified(spec),
        "class_counts": list(class_cardinalities(spec)),
        "baseline": {"L_prime": L_prime, "T": T, "N": baseline,
                     "ratio": baseline / constructive if constructive else None},
    }


def _rate(K, N):
    return K / N if N else None


def build_report(spec, basis, fact, F, T: int = 1, with_simulation: bool = True) -> dict:
    gamma, delta, lambdas = normalized_constraints(spec)
    audit = verify_constraints(fact, spec)
    report = {
        "format_version": "1",
        "problem": {"K": spec.K, "L": spec.L, "P": list(spec.P), "Lambda": list(spec.Lambda),
                    "Gamma": spec.Gamma, "Delta": spec.Delta},
        "normalized": {"gamma": gamma, "delta": delta, "lambda": list(lambdas)},
        "bounds": bounds_summary(spec, T),
        "factorization": {"N": fact.N, "rate": _rate(spec.K, fact.N),
                          "residual": verify_reconstruction(fact, F), "tolerance": fact.tolerance},
        "achieved": {"Gamma": audit.gamma_achieved, "Delta": audit.delta_achieved,
                     "Lambda": list(audit.lambda_achieved), "ok": audit.ok,
                     "violations": [str(v) for v in audit.violations]},
        "multiplication_costs": list(audit.multiplication_costs),
    }
    if with_simulation and basis is not None:
        sim = simulate(spec, F, fact, basis)
        report["simulation"] = {
            "max_rel_error": sim.max_rel_error,
            "f_ref": sim.f_ref.tolist(),
            "f_prime": sim.f_prime.tolist(),
            "z": sim.z.tolist(),
            "total_multiplications": sim.total_multiplications,
            "evaluations": [sim.evaluations[l] for l in range(1, spec.L + 1)],
            "rate": _rate(spec.K, sim.N),
        }
    return report


def _load(path):
    try:
        return load_problem(path)
    except (FormatError, OSError) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None


def _load_fact(path, spec):
    try:
        return load_factorization(path, spec)
    except (FormatError, OSError) as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None


def cmd_bound(args) -> int:
    spec, _ = _load(args.problem)
    s = bounds_summary(spec, args.baseline_T)
    print(f"constructive: {s['constructive']}")
    print(f"general: {s['general']}")
    if s["simplified"] is None:
        print("simplified: unavailable (needs uniform P, Lambda with Delta | K and Lambda | P)")
    else:
        print(f"simplified: {s['simplified']}")
    print("class counts: " + " ".join(f"C{i}={c}" for i, c in enumerate(s["class_counts"], 1)))
    n = s["baseline"]["N"]
    note = "" if isinstance(n, int) else " (not an integer)"
    print(f"baseline (T={args.baseline_T}): {n}{note}")
    if args.output:
        dump_json(s, args.output)
    return EXIT_OK


def cmd_factorize(args) -> int:
    spec, _ = _load(args.problem)
    try:
        F, _, fact = build_factorization(spec, args.tolerance)
    except InadmissibleDemandError as exc:
        raise CliError(EXIT_INADMISSIBLE, str(exc)) from None
    residual = verify_reconstruction(fact, F)
    out = args.output or "factorization.json"
    dump_json(factorization_to_dict(fact), out)
    print(f"N: {fact.N}")
    print(f"residual: {residual:.3e}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    spec, _ = _load(args.problem)
    fact = _load_fact(args.factorization, spec)
    F = build_demand_tensor(spec)
    residual = verify_reconstruction(fact, F)
    audit = verify_constraints(fact, spec)
    print(f"N: {fact.N}")
    print(f"residual: {residual:.3e} (tolerance {args.tolerance:.1e})")
    print(f"achieved Gamma={audit.gamma_achieved} Delta={audit.delta_achieved} Lambda={list(audit.lambda_achieved)}")
    for v in audit.violations:
        print(f"violation: {v}")
    if residual > args.tolerance or not audit.ok:
        if residual > args.tolerance:
            print(f"violation: residual {residual:.3e} exceeds {args.tolerance:.1e}")
        return EXIT_VERIFY
    print("ok")
    return EXIT_OK


def _report_common(args, require_simulation):
    spec, basis = _load(args.problem)
    if require_simulation and basis is None:
        raise CliError(EXIT_INPUT, f"{args.problem}: field 'basis': simulation needs 'basis' and 'input'")
    fact = _load_fact(args.factorization, spec)
    F = build_demand_tensor(spec)
    try:
        report = build_report(spec, basis, fact, F, args.baseline_T)
    except BasisDomainError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    if args.output:
        dump_json(report, args.output)
    return report


def cmd_simulate(args) -> int:
    report = _report_common(args, True)
    sim = report["simulation"]
    print(f"max relative error: {sim['max_rel_error']:.3e}")
    print(f"rate: {report['factorization']['rate']}")
    print(f"total multiplications: {sim['total_multiplications']}")
    return EXIT_OK if sim["max_rel_error"] <= SIM_TOLERANCE else EXIT_VERIFY


def cmd_report(args) -> int:
    report = _report_common(args, False)
    if not args.output:
        print(json.dumps(report, indent=1))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stfdc", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=None,
                        help="seed numpy's global RNG (the pipeline itself is deterministic)")
    common.add_argument("--baseline-T", dest="baseline_T", type=int, default=1)
    common.add_argument("--output", "-o", default=None)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="server-count bounds for a problem")
    b.add_argument("problem")
    b.set_defaults(func=cmd_bound)

    f = sub.add_parser("factorize", parents=[common], help="build and write a factorization")
    f.add_argument("problem")
    f.add_argument("out", nargs="?", default=None)
    f.set_defaults(func=cmd_factorize)

    for name, func, text in (
        ("verify", cmd_verify, "check a factorization against a problem"),
        ("simulate", cmd_simulate, "run the protocol and compare with direct evaluation"),
        ("report", cmd_report, "full machine-readable report"),
    ):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("problem")
        s.add_argument("factorization")
        if name != "verify":
            s.add_argument("out", nargs="?", default=None)
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) and not args.output:
        args.output = args.out
    if args.seed is not None:
        np.random.seed(args.seed)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
