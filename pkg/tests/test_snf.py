import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from app.models.algebra import GcdBoundFactorization
from app.modules.intlinalg.matrices import det, mat_mul, matrix_from_json, matrix_to_json, rank
from app.modules.intlinalg.snf import gcd_bound_factorize, gcd_bound_fuzz, smith_normal_form
from app.utils.validators import ValidationError

small_matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda d: st.lists(st.lists(st.integers(-20, 20), min_size=d, max_size=d), min_size=r, max_size=r)
    )
)


def _minor_gcd(T0, i):
    """gcd de todos los menores i x i."""
    r, d = len(T0), len(T0[0])
    g = 0
    for rows in itertools.combinations(range(r), i):
        for cols in itertools.combinations(range(d), i):
            g = math.gcd(g, det([[T0[a][b] for b in cols] for a in rows]))
    return g


def test_snf_of_diag_2_3():
    snf = smith_normal_form([[2, 0], [0, 3]])
    assert snf.divisors == [1, 6]
    assert snf.k == 2
    assert mat_mul(mat_mul(snf.L, snf.D), snf.Rp) == [[2, 0], [0, 3]]


def test_snf_of_identity():
    I = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    snf = smith_normal_form(I)
    assert snf.D == I
    assert snf.divisors == [1, 1, 1]


def test_snf_of_zero():
    snf = smith_normal_form([[0, 0], [0, 0]])
    assert snf.k == 0
    assert snf.divisors == [0, 0]


@given(small_matrices)
def test_snf_invariants(T0):
    snf = smith_normal_form(T0)
    assert mat_mul(mat_mul(snf.L, snf.D), snf.Rp) == T0
    assert abs(det(snf.L)) == 1 and abs(det(snf.Rp)) == 1
    assert all(v > 0 for v in snf.divisors[: snf.k])
    assert all(v == 0 for v in snf.divisors[snf.k:])
    assert all(b % a == 0 for a, b in zip(snf.divisors[: snf.k], snf.divisors[1: snf.k]))
    assert snf.k == rank(T0)


@given(small_matrices.filter(lambda m: len(m) <= 3 and len(m[0]) <= 3))
def test_snf_matches_determinantal_divisors(T0):
    snf = smith_normal_form(T0)
    product = 1
    for i in range(1, snf.k + 1):
        product *= snf.divisors[i - 1]
        assert product == _minor_gcd(T0, i)


def test_snf_big_integers():
    big = 10**30 + 7
    snf = smith_normal_form([[big, 0], [0, 2 * big]])
    assert snf.divisors == [big, 2 * big]


@pytest.mark.parametrize("T0, Q, d_prime", [
    ([[2, 0], [0, 3]], 6, 2),
    ([[1, 0], [0, 1]], 1, 2),
    ([[2, 4]], 2, 1),
])
def test_gcd_bound_factorize_examples(T0, Q, d_prime):
    f = gcd_bound_factorize(T0)
    assert f.Q == Q
    assert f.d_prime == d_prime
    assert mat_mul(f.T, f.R) == T0
    assert rank(f.T) == d_prime
    assert all(v == 1 for v in smith_normal_form(f.R).divisors)


def test_gcd_bound_factorize_rejects_zero():
    with pytest.raises(ValidationError):
        gcd_bound_factorize([[0, 0]])


def test_gcd_bound_direct_sample():
    f = gcd_bound_factorize([[2, 0], [0, 3]])
    Tw = [sum(t * x for t, x in zip(row, [1, 1])) for row in f.T]
    assert math.gcd(*Tw, 5) <= f.Q


@pytest.mark.parametrize("T0", [[[1, 0], [0, 1]], [[2, 0], [0, 3]], [[4, 6, 2], [2, 2, 8]]])
def test_gcd_bound_fuzz_holds(T0):
    assert gcd_bound_fuzz(gcd_bound_factorize(T0), trials=200, q_max=1000, seed=3)


def test_gcd_bound_fuzz_random_3x3():
    rng = np.random.default_rng(11)
    for _ in range(50):
        T0 = [[int(v) for v in rng.integers(-20, 21, size=3)] for _ in range(3)]
        if rank(T0) == 0:
            continue
        assert gcd_bound_fuzz(gcd_bound_factorize(T0), trials=100, q_max=500, seed=int(rng.integers(2**31)))


def test_gcd_bound_fuzz_detects_a_wrong_bound():
    wrong = GcdBoundFactorization(T=[[2]], R=[[1]], Q=1, d_prime=1)
    assert not gcd_bound_fuzz(wrong, trials=100, q_max=2, seed=0)


def test_matrix_json_round_trip_keeps_big_integers():
    A = [[10**40, -3], [0, 1]]
    assert matrix_to_json(A) == [[str(10**40), "-3"], ["0", "1"]]
    assert matrix_from_json(matrix_to_json(A)) == A


def test_matrix_json_rejects_ragged_rows():
    with pytest.raises(ValidationError):
        matrix_from_json([[1, 2], [3]])
