import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stfdc.demand import (
    BasisDomainError,
    BasisFunction,
    BasisSuite,
    ProblemSpec,
    SpecError,
    build_demand_tensor,
    build_monomial_tensor,
    coefficients_from_tensor,
    evaluate_demands_direct,
    monomial_tensor,
    normalized_constraints,
    validate_admissibility,
)
from stfdc.generate import random_problem
from stfdc.tensor import linear_index, vectorize

import oracles
from conftest import TWO_USER_DEMANDS, two_user_basis, two_user_spec


# -- spec validation ---------------------------------------------------------------

@pytest.mark.parametrize("kwargs, field", [
    (dict(Gamma=3), "Gamma"),
    (dict(Delta=5), "Delta"),
    (dict(Lambda=(5, 2)), "Lambda"),
    (dict(P=(4,)), "P"),
    (dict(exponent_grids=((1, 2, 3, 4), (0, 1, 2, 3))), "exponent_grids"),
    (dict(exponent_grids=((0, 2, 2, 3), (0, 1, 2, 3))), "exponent_grids"),
    (dict(coefficients=((1, (1, 1), 1.0), (1, (1, 1), 2.0))), "coefficients"),
    (dict(coefficients=((1, (5, 1), 1.0),)), "coefficients"),
])
def test_spec_rejects(kwargs, field):
    base = dict(K=4, L=2, P=(4, 4), Lambda=(2, 2), Gamma=2, Delta=2)
    base.update(kwargs)
    with pytest.raises(SpecError) as info:
        ProblemSpec(**base)
    assert info.value.field == field


def test_spec_default_grids():
    s = ProblemSpec(2, 2, (3, 2), (1, 1), 1, 1)
    assert s.exponent_grids == ((0, 1, 2), (0, 1))
    assert s.active_modes((1, 2)) == [2]


# -- demand tensor -----------------------------------------------------------------

def test_empty_demand_is_zero():
    F = build_demand_tensor(ProblemSpec(2, 2, (2, 2), (1, 1), 1, 1))
    assert F.shape == (2, 2, 2) and not F.any()


def test_base_shape(base):
    assert build_demand_tensor(base).shape == (4, 4, 4)


def test_single_entry_position():
    spec = ProblemSpec(3, 2, (2, 3), (1, 1), 2, 1, ((2, (1, 1), 7.0),))
    F = build_demand_tensor(spec)
    v = vectorize(F)
    assert np.count_nonzero(v) == 1
    assert v[linear_index((2, 1, 1), F.shape) - 1] == 7.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_sparse_readback_inverts(seed):
    spec = random_problem(np.random.default_rng(seed))
    F = build_demand_tensor(spec)
    back = {(k, i): v for k, i, v in coefficients_from_tensor(F)}
    want = {(k, i): v for k, i, v in spec.coefficients if v != 0.0}
    assert back == want


# -- admissibility ------------------------------------------------------------------

def test_two_user_admissibility():
    spec = two_user_spec(Gamma=2)
    bad = validate_admissibility(spec, build_demand_tensor(spec))
    # W1 W3^2 W4 is the only term with three variables
    assert bad == [(1, (2, 1, 3, 2), 3)]
    ok = two_user_spec(Gamma=3)
    assert validate_admissibility(ok, build_demand_tensor(ok)) == []


def test_zero_tensor_always_admissible():
    spec = ProblemSpec(2, 3, (3, 3, 3), (1, 1, 1), 1, 1)
    assert validate_admissibility(spec, np.zeros(spec.tensor_shape)) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_admissibility_monotone(seed):
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(2, 3, (3, 3, 3), (1, 1, 1), 1, 1)
    F = np.where(rng.random(spec.tensor_shape) < 0.3, 1.0, 0.0)
    n_bad = [len(validate_admissibility(ProblemSpec(2, 3, (3, 3, 3), (1, 1, 1), g, 1), F)) for g in (1, 2, 3)]
    assert n_bad[0] >= n_bad[1] >= n_bad[2] == 0


# -- normalized constraints -------------------------------------------------------

def test_normalized_constraints(base):
    assert normalized_constraints(ProblemSpec(3, 2, (4, 5), (4, 5), 2, 3)) == (1.0, 1.0, (1.0, 1.0))
    assert normalized_constraints(base) == (1.0, 0.5, (0.5, 0.5))
    assert normalized_constraints(two_user_spec())[0] == 0.75


# -- monomials and direct evaluation ---------------------------------------------

def test_monomial_tensor_examples():
    assert np.array_equal(monomial_tensor([2.0], [[0, 1, 2, 3]]), [1, 2, 4, 8])
    assert np.array_equal(monomial_tensor([2.0, 3.0], [[0, 1], [0, 1]]), [[1, 3], [2, 6]])
    basis = BasisSuite((BasisFunction("exp"), BasisFunction("cos")), (0.4,))
    spec = ProblemSpec(1, 2, (1, 1), (1, 1), 1, 1)
    assert np.array_equal(build_monomial_tensor(basis, spec), np.ones((1, 1, 1)))


def test_two_user_basis_values():
    W = two_user_basis().evaluate()[:, 0]
    assert np.allclose(W, [math.e, 1.0, math.sqrt(math.e), 0.5], rtol=1e-15)


def test_two_user_direct_evaluation():
    spec, basis = two_user_spec(), two_user_basis()
    W = basis.evaluate()[:, 0]
    f = evaluate_demands_direct(build_demand_tensor(spec), build_monomial_tensor(basis, spec))[:, 0]
    for k, terms in TWO_USER_DEMANDS.items():
        ref = sum(c * np.prod([w**e for w, e in zip(W, exps)]) for exps, c in terms.items())
        assert f[k - 1] == pytest.approx(ref, rel=1e-13)


def test_direct_evaluation_examples():
    rng = np.random.default_rng(0)
    assert not evaluate_demands_direct(np.zeros((3, 2, 2)), rng.standard_normal((2, 2))).any()
    F, w = rng.standard_normal((3, 4)), rng.standard_normal(4)
    assert np.allclose(evaluate_demands_direct(F, w), F @ w)
    F, W = rng.standard_normal((2, 3, 2)), rng.standard_normal((3, 2))
    assert np.allclose(evaluate_demands_direct(F, W), oracles.contract_block(F, [2, 3], W, [1, 2]), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(0, 2))
def test_direct_evaluation_grid_shift(seed, shift, mode):
    """Adding c to every exponent of one mode multiplies every demand by W_l ** c."""
    rng = np.random.default_rng(seed)
    spec = ProblemSpec(3, 3, (2, 3, 2), (1, 1, 1), 3, 1)
    F = rng.standard_normal(spec.tensor_shape)
    w = rng.uniform(0.5, 1.5, size=3)
    grids = [list(g) for g in spec.exponent_grids]
    f = evaluate_demands_direct(F, monomial_tensor(w, grids))
    grids[mode] = [e + shift for e in grids[mode]]
    g = evaluate_demands_direct(F, monomial_tensor(w, grids))
    assert np.allclose(g, f * w[mode] ** shift, rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(-5, 5))
def test_direct_evaluation_linear(seed, a):
    rng = np.random.default_rng(seed)
    F, G, W = rng.standard_normal((2, 3, 2)), rng.standard_normal((2, 3, 2)), rng.standard_normal((3, 2))
    lhs = evaluate_demands_direct(a * F + G, W)
    rhs = a * evaluate_demands_direct(F, W) + evaluate_demands_direct(G, W)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


# -- basis functions ----------------------------------------------------------------

def test_basis_domain_errors_name_mode():
    suite = BasisSuite((BasisFunction("exp"), BasisFunction("log")), (-1.0,))
    with pytest.raises(BasisDomainError) as info:
        suite.evaluate()
    assert info.value.mode == 2
    with pytest.raises(BasisDomainError):
        BasisSuite((BasisFunction("sqrt"),), (-0.5,)).evaluate_one(1, server=3)


def test_basis_validation():
    with pytest.raises(SpecError):
        BasisFunction("tanh")
    with pytest.raises(SpecError):
        BasisFunction("affine", (1.0,))
    with pytest.raises(SpecError):
        BasisSuite((BasisFunction("exp", arg=3),), (1.0, 2.0))
    assert BasisFunction("affine", (2.0, 1.0))(np.array(3.0)) == 7.0


def test_vector_input_components():
    suite = BasisSuite((BasisFunction("square"), BasisFunction("identity")), (1.0, 2.0, 3.0))
    assert suite.n_components == 3
    assert np.array_equal(suite.evaluate(), [[1, 4, 9], [1, 2, 3]])
