from __future__ import annotations
import logging
import math
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import budgets
from app.models.algebra import FreqMap, HypothesisCheck, IntMatrix, IntPolyMatrix
from app.models.models import CompleteSumSpec, TorusPointSet
from app.modules.errors import DimensionMismatchError, PrecisionError
from app.modules.expsum.expsum import PointArrays, freq_box, pair_sum_arrays
from app.modules.intlinalg.matrices import rank, to_sympy
from app.utils.validators import InputValidators, ValidationError, parse_fraction, parse_int

logger = logging.getLogger(__name__)

Lift = Sequence[Any]


def poly_matrix(coeffs: Sequence[Sequence[Sequence[Any]]]) -> IntPolyMatrix:
    """A(x) = sum_j coeffs[j] x^j."""
    if not coeffs:
        raise ValidationError("se requiere al menos el coeficiente C_0")
    return IntPolyMatrix(dim=len(coeffs[0]), coeffs=coeffs)


def diagonal_poly_matrix(polys: Sequence[Sequence[int]]) -> IntPolyMatrix:
    """diag(P_1(x), ..., P_d(x)) a partir de los coeficientes [c_0, c_1, ...] de cada P_i."""
    d = len(polys)
    degree = max(len(p) for p in polys) - 1
    coeffs = []
    for j in range(degree + 1):
        C = [[0] * d for _ in range(d)]
        for i, p in enumerate(polys):
            C[i][i] = p[j] if j < len(p) else 0
        coeffs.append(C)
    return IntPolyMatrix(dim=d, coeffs=coeffs)


def _as_int_matrix(matrix: Sequence[Sequence[Fraction]]) -> IntMatrix:
    out = []
    for row in matrix:
        out_row = []
        for x in row:
            if x.denominator != 1:
                raise ValidationError(f"el valor {x} no es entero; A no toma valores enteros en este punto")
            out_row.append(x.numerator)
        out.append(out_row)
    return out


def eval_poly_matrix(A: IntPolyMatrix, n: int) -> IntMatrix:
    """A(n) por Horner, exacto."""
    d = A.dim
    acc: List[List[Fraction]] = [[Fraction(0)] * d for _ in range(d)]
    for C in reversed(A.coeffs):
        acc = [[acc[i][j] * n + C[i][j] for j in range(d)] for i in range(d)]
    return _as_int_matrix(acc)


def eval_poly_matrix_mod(A: IntPolyMatrix, n: int, Q: int) -> IntMatrix:
    """A(n) mod Q; Horner reducido cuando A tiene coeficientes enteros."""
    if not A.is_integral:
        return [[x % Q for x in row] for row in eval_poly_matrix(A, n)]
    d = A.dim
    acc = [[0] * d for _ in range(d)]
    nq = n % Q
    for C in reversed(A.coeffs):
        acc = [[(acc[i][j] * nq + C[i][j].numerator) % Q for j in range(d)] for i in range(d)]
    return acc


def freq_map(A: IntPolyMatrix, m: Sequence[int]) -> FreqMap:
    """Filas m^T C_j para j = 1..D (el término constante queda fuera)."""
    m = tuple(parse_int(x, "m") for x in m)
    if len(m) != A.dim:
        raise DimensionMismatchError(f"m tiene {len(m)} coordenadas, A es {A.dim}x{A.dim}")
    InputValidators.validate_nonzero_vector(m, "m")
    rows = []
    for C in A.coeffs[1:]:
        rows.append(tuple(sum(m[i] * C[i][j] for i in range(A.dim)) for j in range(A.dim)))
    return FreqMap(m=m, rows=tuple(rows))


def apply_freq_map(F: FreqMap, u: Sequence[Any]) -> List[Any]:
    """Coeficientes de T_m u en grados 1..D."""
    return [sum(r * x for r, x in zip(row, u)) for row in F.rows]


def _direction_matrix(A: IntPolyMatrix, a: Sequence[Fraction]) -> List[List[Fraction]]:
    """Matriz d x D con columnas C_j a (j = 1..D)."""
    cols = [[sum(C[i][j] * a[j] for j in range(A.dim)) for i in range(A.dim)] for C in A.coeffs[1:]]
    return [[col[i] for col in cols] for i in range(A.dim)]


def _parse_direction(a: Sequence[Any], dim: int) -> List[Fraction]:
    vec = [parse_fraction(x) if not isinstance(x, Fraction) else x for x in a]
    if len(vec) != dim:
        raise DimensionMismatchError(f"a tiene {len(vec)} coordenadas, se esperaban {dim}")
    InputValidators.validate_nonzero_vector(vec, "a")
    return vec


def check_condition_1_1(A: IntPolyMatrix, a: Sequence[Any]) -> bool:
    """
    Ningún v entero no nulo cumple v^T C_j a = 0 para todo j >= 1. Equivale a que la
    matriz racional [C_1 a | ... | C_D a] tenga rango d: un vector ortogonal real a un
    subespacio racional propio puede tomarse racional y, escalado, entero.
    """
    vec = _parse_direction(a, A.dim)
    if A.degree == 0:
        return False
    return rank(_direction_matrix(A, vec)) == A.dim


def killer_vector(A: IntPolyMatrix, a: Sequence[Any]) -> Optional[List[int]]:
    """Un v entero primitivo con v^T C_j a = 0 para todo j, o None si la condición se cumple."""
    vec = _parse_direction(a, A.dim)
    if A.degree == 0:
        v = [0] * A.dim
        v[0] = 1
        return v
    M = to_sympy(_direction_matrix(A, vec))
    null = M.T.nullspace()
    if not null:
        return None
    v = null[0]
    scale = math.lcm(*(int(x.q) for x in v))
    ints = [int(x * scale) for x in v]
    g = math.gcd(*ints)
    return [x // g for x in ints]


def _float_condition_1_1(A: IntPolyMatrix, a: np.ndarray) -> Tuple[bool, float]:
    cols = [np.array([[float(x) for x in row] for row in C]) @ a for C in A.coeffs[1:]]
    if len(cols) < A.dim:
        return False, math.inf
    s = np.linalg.svd(np.stack(cols, axis=1), compute_uv=False)
    cond = math.inf if s[-1] == 0 else float(s[0] / s[A.dim - 1])
    return cond <= budgets.FLOAT_COND_THRESHOLD, cond


def _lifts_of(Ytilde: Union[TorusPointSet, Sequence[Lift]]) -> Tuple[List[Tuple[Any, ...]], bool]:
    if isinstance(Ytilde, TorusPointSet):
        return [tuple(p) for p in Ytilde.lifts()], Ytilde.is_exact
    lifts = [tuple(x) for x in Ytilde]
    exact = all(isinstance(c, (int, Fraction)) for p in lifts for c in p)
    if exact:
        lifts = [tuple(Fraction(c) for c in p) for p in lifts]
    return lifts, exact


def check_set_hypothesis(A: IntPolyMatrix, Ytilde: Union[TorusPointSet, Sequence[Lift]]) -> HypothesisCheck:
    """Aplica la condición (1.1) a cada diferencia de pares; informa el primer par que falla."""
    lifts, exact = _lifts_of(Ytilde)
    if len(set(lifts)) != len(lifts):
        raise ValidationError("los levantamientos deben ser distintos")
    if any(len(p) != A.dim for p in lifts):
        raise DimensionMismatchError(f"los levantamientos deben tener {A.dim} coordenadas")

    if not exact:
        logger.warning("⚠️ Levantamientos en punto flotante: verificación heurística por número de condición")
        arr = np.array(lifts, dtype=np.float64)
        for i in range(len(arr)):
            for j in range(i + 1, len(arr)):
                ok, cond = _float_condition_1_1(A, arr[i] - arr[j])
                if not ok:
                    return HypothesisCheck(ok=False, bad_pair=(i, j), heuristic=True, detail=f"cond={cond:.3g}")
        return HypothesisCheck(ok=True, heuristic=True)

    for i in range(len(lifts)):
        for j in range(i + 1, len(lifts)):
            a = [x - y for x, y in zip(lifts[i], lifts[j])]
            if not check_condition_1_1(A, a):
                return HypothesisCheck(ok=False, bad_pair=(i, j), detail=f"v={killer_vector(A, a)}")
    return HypothesisCheck(ok=True)


def case2_complete_sum(A: IntPolyMatrix, m: Sequence[int], a: Sequence[Any]) -> CompleteSumSpec:
    """
    Para a = w/q racional: b_j = m^T C_j w y theta = m . A(0) a mod 1, de modo que
    (1/q) sum_{n=1}^{q} e(m . A(n) a) es la suma completa resultante.
    """
    if not A.is_integral:
        raise ValidationError("la suma completa requiere coeficientes enteros")
    vec = _parse_direction(a, A.dim)
    q = math.lcm(*(x.denominator for x in vec))
    w = [int(x * q) for x in vec]
    F = freq_map(A, m)
    b = [int(v) for v in apply_freq_map(F, w)] or [0]
    C0 = A.coeffs[0]
    theta = sum(F.m[i] * C0[i][j] * vec[j] for i in range(A.dim) for j in range(A.dim))
    return CompleteSumSpec(q=q, coefficients=b, theta=theta)


def averaged_pair_sum(Y: TorusPointSet, A: IntPolyMatrix, eps: float, N: int) -> float:
    """(1/N) sum_{n=1}^{N} sum_{m en B(M)} sum_{i,j} e(m . A(n)(x_i - x_j)), M = ceil(d/eps)."""
    if Y.dim != A.dim:
        raise DimensionMismatchError(f"Y vive en T^{Y.dim} y A es {A.dim}x{A.dim}")
    N = InputValidators.validate_positive_int(N, "N")
    box = freq_box(Y.dim, eps)
    base = PointArrays.from_set(Y)
    total = math.fsum(pair_sum_arrays(base.image(eval_poly_matrix(A, n)), box.M) for n in range(1, N + 1))
    return total / N


# -----------------------
# Formato de archivo de matrices polinomiales
# -----------------------
def poly_matrix_from_json(payload: Any) -> IntPolyMatrix:
    """{dim, degree, coeffs: [matriz por grado]}; los coeficientes aceptan "num/den"."""
    InputValidators.validate_payload_keys(payload, ("dim", "coeffs"), "matriz polinomial")
    dim = InputValidators.validate_positive_int(payload["dim"], "dim")
    coeffs = payload["coeffs"]
    if not isinstance(coeffs, list) or not coeffs:
        raise ValidationError("coeffs debe ser una lista no vacía de matrices")
    try:
        parsed = [[[parse_fraction(x) for x in row] for row in C] for C in coeffs]
        A = IntPolyMatrix(dim=dim, coeffs=parsed)
    except ValueError as e:
        raise ValidationError(f"matriz polinomial inválida: {e}")
    if "degree" in payload and parse_int(payload["degree"], "degree") != A.degree:
        logger.warning(f"⚠️ degree={payload['degree']} declarado; el grado ajustado es {A.degree}")
    return A


def poly_matrix_to_json(A: IntPolyMatrix) -> dict:
    return {"dim": A.dim, "degree": A.degree, **A.model_dump(mode="json", include={"coeffs"})}
