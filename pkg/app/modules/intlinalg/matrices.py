"""Aritmética exacta de matrices enteras/racionales sobre listas de Python."""
from __future__ import annotations
from fractions import Fraction
from typing import Any, List, Sequence, Tuple

from sympy import Matrix, Rational

from app.models.algebra import IntMatrix, identity_matrix
from app.utils.validators import InputValidators

MatrixKey = Tuple[Tuple[Any, ...], ...]


def mat_mul(A: Sequence[Sequence[Any]], B: Sequence[Sequence[Any]]) -> List[List[Any]]:
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in A]


def mat_vec(A: Sequence[Sequence[Any]], v: Sequence[Any]) -> List[Any]:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def mat_sub(A: Sequence[Sequence[Any]], B: Sequence[Sequence[Any]]) -> List[List[Any]]:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_pow(A: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """A^n para n >= 0 por cuadrados sucesivos."""
    if n < 0:
        raise ValueError("exponente negativo; usar la inversa explícita")
    result = identity_matrix(len(A))
    base = [list(row) for row in A]
    while n:
        if n & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        n >>= 1
    return result


def freeze(A: Sequence[Sequence[Any]]) -> MatrixKey:
    return tuple(tuple(row) for row in A)


def is_zero(A: Sequence[Sequence[Any]]) -> bool:
    return all(x == 0 for row in A for x in row)


def to_sympy(A: Sequence[Sequence[Any]]) -> Matrix:
    return Matrix([[Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x for x in row] for row in A])


def det(A: Sequence[Sequence[int]]) -> int:
    return int(to_sympy(A).det())


def rank(A: Sequence[Sequence[Any]]) -> int:
    if not A or not A[0]:
        return 0
    return int(to_sympy(A).rank())


def matrix_to_json(A: Sequence[Sequence[int]]) -> List[List[str]]:
    """Enteros de precisión arbitraria como strings."""
    return [[str(int(x)) for x in row] for row in A]


def matrix_from_json(payload: Any, name: str = "matriz") -> IntMatrix:
    return InputValidators.validate_int_matrix(payload, name=name)
