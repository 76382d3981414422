import cmath
import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from app.models.models import TorusPointSet
from app.modules.errors import DimensionMismatchError
from app.modules.expsum.expsum import complete_rational_sum
from app.modules.polymat.polymat import (
    apply_freq_map,
    averaged_pair_sum,
    case2_complete_sum,
    check_condition_1_1,
    check_set_hypothesis,
    diagonal_poly_matrix,
    eval_poly_matrix,
    eval_poly_matrix_mod,
    freq_map,
    killer_vector,
    poly_matrix,
    poly_matrix_from_json,
    poly_matrix_to_json,
)
from app.utils.validators import ValidationError

small_int = st.integers(min_value=-3, max_value=3)
small_matrix = st.lists(st.lists(small_int, min_size=2, max_size=2), min_size=2, max_size=2)
small_fraction = st.fractions(min_value=-1, max_value=1, max_denominator=7)


def _diag_x_x2():
    return diagonal_poly_matrix([[0, 1], [0, 0, 1]])


def test_eval_diagonal():
    assert eval_poly_matrix(_diag_x_x2(), 3) == [[3, 0], [0, 9]]


def test_eval_jordan_block():
    A = poly_matrix([[[0, 1], [0, 0]], [[1, 0], [0, 1]]])
    assert eval_poly_matrix(A, 2) == [[2, 1], [0, 2]]
    assert eval_poly_matrix(A, 0) == [[0, 1], [0, 0]]


def test_trailing_zero_coefficients_are_trimmed():
    A = poly_matrix([[[1, 0], [0, 1]], [[0, 0], [0, 0]]])
    assert A.degree == 0


def test_eval_integer_valued_non_integral_coefficients():
    # x(x+1)/2
    A = poly_matrix([[[0]], [[Fraction(1, 2)]], [[Fraction(1, 2)]]])
    assert not A.is_integral
    assert [eval_poly_matrix(A, n)[0][0] for n in range(5)] == [0, 1, 3, 6, 10]
    with pytest.raises(ValidationError):
        eval_poly_matrix(poly_matrix([[[0]], [[Fraction(1, 2)]]]), 1)


@given(small_matrix, small_matrix, small_matrix, st.integers(-20, 20), st.integers(2, 50))
def test_eval_mod_matches_eval(C0, C1, C2, n, Q):
    A = poly_matrix([C0, C1, C2])
    expected = [[x % Q for x in row] for row in eval_poly_matrix(A, n)]
    assert eval_poly_matrix_mod(A, n, Q) == expected


def test_freq_map_diagonal():
    F = freq_map(_diag_x_x2(), (1, 0))
    assert F.rows == ((1, 0), (0, 0))
    assert F.degree == 2


def test_freq_map_validates_m():
    with pytest.raises(ValidationError):
        freq_map(_diag_x_x2(), (0, 0))
    with pytest.raises(DimensionMismatchError):
        freq_map(_diag_x_x2(), (1, 0, 0))


@given(small_matrix, small_matrix, small_matrix, st.tuples(small_int, small_int), st.tuples(small_int, small_int), st.integers(-6, 6))
def test_freq_map_matches_evaluation(C0, C1, C2, m, u, n):
    if m == (0, 0):
        m = (1, 0)
    A = poly_matrix([C0, C1, C2])
    An, A0 = eval_poly_matrix(A, n), eval_poly_matrix(A, 0)
    lhs = sum(m[i] * (An[i][j] - A0[i][j]) * u[j] for i in range(2) for j in range(2))
    coeffs = apply_freq_map(freq_map(A, m), u)
    assert lhs == sum(c * n ** (j + 1) for j, c in enumerate(coeffs))


def test_condition_holds_for_independent_directions():
    assert check_condition_1_1(_diag_x_x2(), [Fraction(1, 2), Fraction(1, 3)])
    assert killer_vector(_diag_x_x2(), [Fraction(1, 2), Fraction(1, 3)]) is None


def test_condition_fails_for_scalar_polynomial():
    A = diagonal_poly_matrix([[0, 1], [0, 1]])
    a = [Fraction(1, 2), Fraction(-1, 2)]
    assert not check_condition_1_1(A, a)
    v = killer_vector(A, a)
    assert v in ([1, 1], [-1, -1])


def test_condition_fails_for_constant_matrix():
    A = poly_matrix([[[2, 1], [1, 1]]])
    assert not check_condition_1_1(A, [1, 0])
    assert killer_vector(A, [1, 0]) == [1, 0]


def test_condition_rejects_zero_direction():
    with pytest.raises(ValidationError):
        check_condition_1_1(_diag_x_x2(), [0, 0])


@given(small_matrix, small_matrix, st.tuples(small_fraction, small_fraction))
def test_condition_agrees_with_integer_search(C1, C2, a):
    if a == (0, 0):
        a = (Fraction(1, 3), Fraction(0))
    A = poly_matrix([[[0, 0], [0, 0]], C1, C2])
    cols = [[sum(C[i][j] * a[j] for j in range(2)) for i in range(2)] for C in (C1, C2)]

    def kills(v):
        return all(v[0] * c[0] + v[1] * c[1] == 0 for c in cols)

    if check_condition_1_1(A, a):
        assert not any(kills(v) for v in itertools.product(range(-10, 11), repeat=2) if v != (0, 0))
    else:
        v = killer_vector(A, a)
        assert v is not None and any(v) and kills(v)


def test_set_hypothesis_ok_for_generic_pair():
    check = check_set_hypothesis(_diag_x_x2(), [[0, 0], [Fraction(1, 2), Fraction(1, 3)]])
    assert check.ok and check.bad_pair is None and not check.heuristic


def test_set_hypothesis_reports_bad_pair():
    Y = TorusPointSet.exact([[0, 0], [Fraction(1, 4), Fraction(1, 3)], [Fraction(1, 2), 0]])
    check = check_set_hypothesis(_diag_x_x2(), Y)
    assert not check.ok
    assert check.bad_pair == (0, 2)


def test_set_hypothesis_singleton_is_vacuous():
    assert check_set_hypothesis(_diag_x_x2(), [[Fraction(1, 5), Fraction(2, 5)]]).ok


def test_set_hypothesis_rejects_duplicates_and_bad_dimension():
    with pytest.raises(ValidationError):
        check_set_hypothesis(_diag_x_x2(), [[0, 0], [0, 0]])
    with pytest.raises(DimensionMismatchError):
        check_set_hypothesis(_diag_x_x2(), [[0, 0, 0], [1, 0, 0]])


def test_set_hypothesis_float_lifts_are_heuristic():
    Y = TorusPointSet.from_floats([[0.1, 0.2], [0.6, 0.5]])
    check = check_set_hypothesis(_diag_x_x2(), Y)
    assert check.ok and check.heuristic


def test_case2_complete_sum_matches_direct_average():
    A = poly_matrix([[[1, 2], [0, 1]], [[0, 1], [3, 0]], [[1, 0], [1, 2]]])
    m, a = (2, 1), [Fraction(1, 7), Fraction(3, 7)]
    spec = case2_complete_sum(A, m, a)
    assert spec.q == 7
    direct = sum(
        cmath.exp(2j * math.pi * float(sum(m[i] * eval_poly_matrix(A, n)[i][j] * a[j] for i in range(2) for j in range(2))))
        for n in range(1, 8)
    ) / 7
    assert complete_rational_sum(spec) == pytest.approx(direct, abs=1e-9)


def test_case2_complete_sum_gauss():
    spec = case2_complete_sum(diagonal_poly_matrix([[0, 0, 1], [0, 1]]), (1, 0), [Fraction(1, 5), 0])
    assert tuple(spec.coefficients) == (0, 1)
    assert spec.theta == 0
    assert abs(complete_rational_sum(spec)) == pytest.approx(1 / math.sqrt(5))


def test_case2_requires_integral_coefficients():
    A = poly_matrix([[[0]], [[Fraction(1, 2)]], [[Fraction(1, 2)]]])
    with pytest.raises(ValidationError):
        case2_complete_sum(A, (1,), [Fraction(1, 3)])


def test_averaged_pair_sum_singleton_counts_box():
    Y = TorusPointSet.exact([[Fraction(1, 3), Fraction(1, 5)]])
    # M = 5 en T^2: 11^2 - 1 frecuencias, cada una con |S| = 1
    assert averaged_pair_sum(Y, _diag_x_x2(), 0.4, 4) == pytest.approx(120.0)


def test_averaged_pair_sum_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        averaged_pair_sum(TorusPointSet.exact([[0]]), _diag_x_x2(), 0.5, 2)


def test_poly_matrix_json_format():
    A = poly_matrix_from_json({"dim": 1, "degree": 2, "coeffs": [[[0]], [["1/2"]], [["1/2"]]]})
    assert A.degree == 2
    assert A.coeffs[1][0][0] == Fraction(1, 2)
    payload = poly_matrix_to_json(_diag_x_x2())
    assert payload == {"dim": 2, "degree": 2, "coeffs": [[[0, 0], [0, 0]], [[1, 0], [0, 0]], [[0, 0], [0, 1]]]}


@pytest.mark.parametrize(
    "payload",
    [
        {"dim": 2},
        {"dim": 2, "coeffs": []},
        {"dim": 2, "coeffs": [[[1, 0]]]},
        {"dim": 1, "coeffs": [[["x"]]]},
    ],
)
def test_poly_matrix_json_rejects_malformed(payload):
    with pytest.raises(ValidationError):
        poly_matrix_from_json(payload)
