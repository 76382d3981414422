from __future__ import annotations
import logging
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import Poly, binomial, expand_func, symbols

from app.config import budgets
from app.models.algebra import IntMatrix, IntPolyMatrix, PolynomializedProduct, SemigroupPresentation, identity_matrix
from app.modules.errors import BudgetExceededError, HypothesisViolationError, SoundnessError
from app.modules.intlinalg.matrices import is_zero, mat_mul, mat_pow, mat_sub
from app.modules.polymat.polymat import check_condition_1_1
from app.utils.validators import InputValidators, ValidationError, parse_int

logger = logging.getLogger(__name__)

_x = symbols("x")


def _binomial_coefficients(j: int) -> List[Fraction]:
    """Coeficientes (grado 0..j) del polinomio binom(x, j)."""
    poly = Poly(expand_func(binomial(_x, j)), _x)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    return coeffs + [Fraction(0)] * (j + 1 - len(coeffs))


def _is_unipotent(u: IntMatrix) -> bool:
    N = mat_sub(u, identity_matrix(len(u)))
    return is_zero(mat_pow(N, len(u)))


def unipotent_power_poly(u: Sequence[Sequence[int]]) -> IntPolyMatrix:
    """
    U(x) con U(n) = u^n para todo entero n: u^n = sum_{j<d} binom(n, j) (u - I)^j.
    Los coeficientes son racionales; los valores en enteros son enteros.
    """
    u = InputValidators.validate_square_int_matrix(u, name="u")
    d = len(u)
    if not _is_unipotent(u):
        raise HypothesisViolationError("la matriz no es unipotente: (u - I)^d != 0")
    N = mat_sub(u, identity_matrix(d))
    coeffs = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
    power = identity_matrix(d)
    for j in range(d):
        if j:
            power = mat_mul(power, N)
        if is_zero(power):
            break
        for deg, c in enumerate(_binomial_coefficients(j)):
            if c:
                C = coeffs[deg]
                for r in range(d):
                    for s in range(d):
                        C[r][s] += c * power[r][s]
    return IntPolyMatrix(dim=d, coeffs=coeffs)


def encode_exponent(e: Sequence[int], R: int) -> int:
    """e -> sum_i e_i R^(i-1)."""
    return sum(int(v) * R ** i for i, v in enumerate(e))


def substitution_exponent(E: Iterable[Sequence[int]]) -> int:
    """Menor R = 1 + max entrada; la codificación en base R es inyectiva sobre E."""
    vectors = {tuple(parse_int(v, "E") for v in e) for e in E}
    if not vectors:
        raise ValidationError("el conjunto de exponentes está vacío")
    R = 1 + max(max(e) if e else 0 for e in vectors)
    codes = {encode_exponent(e, R) for e in vectors}
    if len(codes) != len(vectors):
        raise SoundnessError(f"la codificación en base {R} no es inyectiva")
    return R


def _multivariate_product(
    factors: Sequence[IntPolyMatrix], budget: int
) -> Dict[Tuple[int, ...], List[List[Fraction]]]:
    """prod_i U_i(n_i) como mapa vector de exponentes -> matriz."""
    d = factors[0].dim
    terms: Dict[Tuple[int, ...], List[List[Fraction]]] = {(): [[Fraction(v) for v in row] for row in identity_matrix(d)]}
    for U in factors:
        nxt: Dict[Tuple[int, ...], List[List[Fraction]]] = {}
        for exp, M in terms.items():
            for j, C in enumerate(U.coeffs):
                if is_zero(C):
                    continue
                prod = mat_mul(M, C)
                if not is_zero(prod):
                    nxt[exp + (j,)] = prod
        if len(nxt) > budget:
            raise BudgetExceededError(f"Q_N supera {budget} monomios")
        terms = nxt
    return terms


def thmC_polynomialize(
    S: SemigroupPresentation,
    a: Optional[Sequence[Any]] = None,
    budget: int = budgets.POLYNOMIALIZE_MONOMIAL_BUDGET,
) -> PolynomializedProduct:
    """
    Q_N(n_1..n_N) = prod_{i=1}^{N} u_i^(n_i) con N = d m y u_i = u_(i mod m); la
    sustitución n_i -> x^(R^(i-1)) da la matriz univariada A(x). Con `a` se evalúa la
    condición (1.1) para A y a.
    """
    if not S.all_unipotent:
        bad = [i for i, flag in enumerate(S.unipotent) if not flag]
        raise HypothesisViolationError(f"generadores no unipotentes: {bad}")
    d, m = S.dim, len(S.generators)
    N = d * m
    order = [i % m for i in range(N)]
    powers = [unipotent_power_poly(g) for g in S.generators]
    terms = _multivariate_product([powers[i] for i in order], budget)

    R = substitution_exponent(terms.keys()) if terms else 1
    top = max((encode_exponent(e, R) for e in terms), default=0)
    if top + 1 > budget:
        raise BudgetExceededError(f"A(x) tendría grado {top} (> {budget - 1})")
    coeffs = [[[Fraction(0)] * d for _ in range(d)] for _ in range(top + 1)]
    for exp, M in terms.items():
        C = coeffs[encode_exponent(exp, R)]
        for r in range(d):
            for s in range(d):
                C[r][s] += M[r][s]
    A = IntPolyMatrix(dim=d, coeffs=coeffs)

    condition = None
    if a is not None:
        condition = check_condition_1_1(A, a) if A.degree > 0 else False
        if not condition:
            logger.warning("⚠️ A(x) no cumple la condición (1.1) para la dirección dada")
    if A.degree == 0:
        logger.warning("⚠️ A(x) es constante: presentación degenerada")
    return PolynomializedProduct(
        A=A, R=R, N=N, generator_order=order, monomials=len(terms),
        degenerate=A.degree == 0, condition_ok=condition,
    )


def substituted_product(S: SemigroupPresentation, R: int, n0: int) -> IntMatrix:
    """prod_i u_i^(n0^(R^(i-1))) calculado directamente (oráculo de evaluación)."""
    if n0 < 0:
        raise ValidationError("n0 debe ser >= 0")
    m = len(S.generators)
    result = identity_matrix(S.dim)
    for i in range(S.dim * m):
        result = mat_mul(result, mat_pow(S.generators[i % m], n0 ** (R ** i)))
    return result
