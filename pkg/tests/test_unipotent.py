from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from app.models.algebra import SemigroupPresentation, identity_matrix
from app.modules.cayley.cayley import elementary_presentation
from app.modules.cayley.unipotent import (
    encode_exponent,
    substituted_product,
    substitution_exponent,
    thmC_polynomialize,
    unipotent_power_poly,
)
from app.modules.errors import BudgetExceededError, HypothesisViolationError
from app.modules.intlinalg.matrices import mat_mul, mat_pow
from app.modules.polymat.polymat import eval_poly_matrix
from app.utils.validators import ValidationError


@st.composite
def unitriangular(draw):
    d = draw(st.integers(2, 4))
    u = identity_matrix(d)
    for i in range(d):
        for j in range(i + 1, d):
            u[i][j] = draw(st.integers(-3, 3))
    return u


def test_power_poly_identity():
    U = unipotent_power_poly(identity_matrix(3))
    assert U.degree == 0
    assert eval_poly_matrix(U, 7) == identity_matrix(3)


def test_power_poly_elementary():
    U = unipotent_power_poly([[1, 1], [0, 1]])
    assert U.degree == 1
    assert U.coefficient(1) == [[0, 1], [0, 0]]


def test_power_poly_3x3_matches_powers():
    u = [[1, 1, 1], [0, 1, 1], [0, 0, 1]]
    U = unipotent_power_poly(u)
    assert U.degree == 2
    assert not U.is_integral
    for n in range(7):
        assert eval_poly_matrix(U, n) == mat_pow(u, n)


@given(unitriangular())
def test_power_poly_is_integer_valued_including_negative_exponents(u):
    U = unipotent_power_poly(u)
    for n in range(0, 7):
        assert eval_poly_matrix(U, n) == mat_pow(u, n)
    for n in range(1, 4):
        assert mat_mul(eval_poly_matrix(U, -n), mat_pow(u, n)) == identity_matrix(len(u))


def test_power_poly_rejects_non_unipotent():
    with pytest.raises(HypothesisViolationError):
        unipotent_power_poly([[2, 1], [1, 1]])


def test_substitution_exponent_examples():
    E = [(0, 0), (1, 0), (0, 1)]
    assert substitution_exponent(E) == 2
    assert {encode_exponent(e, 2) for e in E} == {0, 1, 2}

    E = [(2, 1), (0, 3)]
    assert substitution_exponent(E) == 4
    assert {encode_exponent(e, 4) for e in E} == {6, 12}

    assert substitution_exponent([(1, 2), (1, 2)]) == 3


def test_substitution_exponent_rejects_empty_set():
    with pytest.raises(ValidationError):
        substitution_exponent([])


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=20))
def test_substitution_encoding_is_injective(E):
    R = substitution_exponent(E)
    assert len({encode_exponent(e, R) for e in E}) == len(set(E))


def test_polynomialize_elementary_generators():
    S = elementary_presentation()
    result = thmC_polynomialize(S, a=[Fraction(1, 2), Fraction(1, 3)])
    assert result.N == 4
    assert result.R == 2
    assert result.generator_order == [0, 1, 0, 1]
    assert result.A.degree == 15
    assert not result.degenerate
    assert result.condition_ok
    assert eval_poly_matrix(result.A, 1) == mat_mul(mat_mul(S.generators[0], S.generators[1]), mat_mul(S.generators[0], S.generators[1]))


@pytest.mark.parametrize("n0", [1, 2, 3])
def test_polynomialize_matches_substituted_product(n0):
    S = elementary_presentation()
    result = thmC_polynomialize(S)
    assert eval_poly_matrix(result.A, n0) == substituted_product(S, result.R, n0)


def test_polynomialize_single_generator_fixed_direction_flagged():
    S = SemigroupPresentation(dim=2, generators=[[[1, 1], [0, 1]]])
    result = thmC_polynomialize(S, a=[1, 0])
    assert result.condition_ok is False
    assert not result.degenerate


def test_polynomialize_identity_is_degenerate():
    S = SemigroupPresentation(dim=2, generators=[identity_matrix(2)])
    result = thmC_polynomialize(S, a=[1, 0])
    assert result.degenerate
    assert result.condition_ok is False
    assert eval_poly_matrix(result.A, 5) == identity_matrix(2)


def test_polynomialize_rejects_non_unipotent_and_budget():
    with pytest.raises(HypothesisViolationError):
        thmC_polynomialize(SemigroupPresentation(dim=2, generators=[[[2, 1], [1, 1]]]))
    with pytest.raises(BudgetExceededError):
        thmC_polynomialize(elementary_presentation(), budget=4)


def test_substituted_product_rejects_negative_base():
    with pytest.raises(ValidationError):
        substituted_product(elementary_presentation(), 2, -1)
