"""Simulation of the three protocol phases: local computation, transmission, linear decoding."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .costs import power_cost
from .demand import BasisSuite, ProblemSpec, SpecError, build_monomial_tensor, evaluate_demands_direct
from .factorizer import Factorization, ServerAssignment, extract_assignments, server_multiplication_cost
from .tensor import ShapeError, contract_block

__all__ = ["power_cost", "compute_subfunctions", "encode", "decode", "simulate", "SimulationReport"]

REL_FLOOR = 1e-12


def compute_subfunctions(
    basis: BasisSuite, assignments: list[ServerAssignment]
) -> tuple[dict[int, dict[int, np.ndarray]], dict[int, int]]:
    """Each server evaluates only its own subfunctions.

    Returns ``(held, evaluations)``: ``held[n][l]`` is ``W_l`` at server ``n``,
    ``evaluations[l]`` counts how many servers evaluated ``f_l``.
    """
    held: dict[int, dict[int, np.ndarray]] = {}
    evaluations = {l: 0 for l in range(1, len(basis.functions) + 1)}
    for a in assignments:
        held[a.server] = {l: basis.evaluate_one(l, server=a.server) for l in a.subfunctions}
        for l in a.subfunctions:
            evaluations[l] += 1
    return held, evaluations


def encode(E: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Transmissions ``z_n = sum_p E(n, p) W(p)`` (trailing component mode of ``W`` carried through)."""
    E = np.asarray(E, dtype=float)
    L = E.ndim - 1
    if E.shape[0] == 0:
        return np.zeros((0,) + np.shape(W)[L:])
    return contract_block(E, range(2, L + 2), W, range(1, L + 1))


def decode(D: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``f' = D z``."""
    D = np.asarray(D, dtype=float)
    z = np.asarray(z, dtype=float)
    if D.shape[1] != z.shape[0]:
        raise ShapeError(f"D has {D.shape[1]} columns, z has {z.shape[0]} entries")
    return D @ z


def _server_transmission(
    E_n: np.ndarray, a: ServerAssignment, held: dict[int, np.ndarray], spec: ProblemSpec, B: int
) -> np.ndarray:
    z = np.zeros(B)
    for p in a.monomials:
        term = np.full(B, E_n[tuple(i - 1 for i in p)])
        for l in a.subfunctions:
            term = term * held[l] ** spec.exponent_grids[l - 1][p[l - 1] - 1]
        z += term
    return z


@dataclass(frozen=True)
class SimulationReport:
    """Arrays are indexed ``[component, ...]``; one component per input value."""

    z: np.ndarray
    f_prime: np.ndarray
    f_ref: np.ndarray
    max_rel_error: float
    multiplication_costs: tuple[int, ...]
    evaluations: dict[int, int]
    N: int
    K: int

    @property
    def total_multiplications(self) -> int:
        return sum(self.multiplication_costs)

    @property
    def rate(self) -> Fraction | None:
        return Fraction(self.K, self.N) if self.N else None


def simulate(spec: ProblemSpec, F: np.ndarray, fact: Factorization, basis: BasisSuite) -> SimulationReport:
    """Run compute, encode and decode per server and compare with direct evaluation of the demands."""
    if len(basis.functions) != spec.L:
        raise SpecError("basis", f"needs {spec.L} functions, got {len(basis.functions)}")
    if fact.D.shape[0] != spec.K or fact.E.shape[1:] != spec.P:
        raise ShapeError("factorization does not match the problem dimensions")
    B = basis.n_components
    assignments = extract_assignments(fact, spec)
    held, evaluations = compute_subfunctions(basis, assignments)

    z = np.zeros((fact.N, B))
    for a in assignments:
        z[a.server - 1] = _server_transmission(fact.E[a.server - 1], a, held[a.server], spec, B)
    f_prime = decode(fact.D, z)

    W = build_monomial_tensor(basis, spec)
    f_ref = evaluate_demands_direct(F, W)
    err = np.abs(f_prime - f_ref) / np.maximum(np.abs(f_ref), REL_FLOOR)
    return SimulationReport(
        z=z.T,
        f_prime=f_prime.T,
        f_ref=f_ref.T,
        max_rel_error=float(err.max()) if err.size else 0.0,
        multiplication_costs=tuple(server_multiplication_cost(a, spec) for a in assignments),
        evaluations=evaluations,
        N=fact.N,
        K=spec.K,
    )
