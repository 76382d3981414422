from __future__ import annotations
import itertools
import logging
import math
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from app.config import budgets
from app.models.models import (
    BmvCheck,
    CompleteSumSpec,
    DensityStatus,
    FreqBox,
    HuaDecayTable,
    HuaRow,
    Lemma24Certificate,
    TorusPoint,
    TorusPointSet,
)
from app.modules.errors import BudgetExceededError, DimensionMismatchError, HypothesisViolationError
from app.modules.torus.torus import apply_matrix, exact_image_numerators, is_eps_dense, torus_norm
from app.utils.validators import InputValidators, ValidationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def e(t: Any) -> Any:
    """e(t) = exp(2 pi i t), escalar o vectorizado."""
    return np.exp(1j * TWO_PI * np.asarray(t, dtype=np.float64))


# -----------------------
# Representación de multiconjuntos de puntos
# -----------------------
class PointArrays:
    """
    Multiconjunto de puntos del toro listo para sumar: (Q, P) exacto con x_i = P[i]/Q
    o una matriz float k x d. No exige distinción.
    """

    def __init__(self, dim: int, Q: Optional[int] = None, P: Optional[np.ndarray] = None, X: Optional[np.ndarray] = None):
        self.dim = dim
        self.Q = Q
        self.P = P
        self.X = X

    @property
    def exact(self) -> bool:
        return self.Q is not None

    @property
    def k(self) -> int:
        return len(self.P) if self.exact else len(self.X)

    @classmethod
    def from_points(cls, points: Sequence[TorusPoint]) -> "PointArrays":
        if not points:
            raise ValidationError("se requiere al menos un punto")
        dim = points[0].dim
        if any(p.dim != dim for p in points):
            raise DimensionMismatchError("todos los puntos deben tener la misma dimensión")
        if all(p.is_exact for p in points):
            Q = math.lcm(*(c.denominator for p in points for c in p.coords))
            rows = [[c.numerator * (Q // c.denominator) for c in p.coords] for p in points]
            return cls(dim, Q=Q, P=np.array(rows, dtype=np.int64 if Q < 2**31 else object))
        return cls(dim, X=np.array([p.as_floats() for p in points], dtype=np.float64))

    @classmethod
    def from_set(cls, Y: TorusPointSet) -> "PointArrays":
        if Y.is_exact:
            Q, P = Y.numerators()
            return cls(Y.dim, Q=Q, P=P)
        return cls(Y.dim, X=Y.float_array())

    def image(self, g: Sequence[Sequence[int]]) -> "PointArrays":
        """g x_i mod 1 conservando multiplicidades."""
        if self.exact:
            return PointArrays(self.dim, Q=self.Q, P=exact_image_numerators(self.Q, self.P, g))
        G = np.array([[float(x) for x in row] for row in g], dtype=np.float64)
        return PointArrays(self.dim, X=np.mod(self.X @ G.T, 1.0))

    def angles(self, axis: int, M: int) -> np.ndarray:
        """Tabla k x (2M+1) de m * x_{i,axis} mod 1 para m = -M..M, reducida antes de pasar a float."""
        m = np.arange(-M, M + 1, dtype=np.int64)
        if self.exact:
            col = self.P[:, axis]
            if col.dtype == object or self.Q * M >= 2**62:
                nums = (np.array(col, dtype=object)[:, None] * m.astype(object)[None, :]) % self.Q
                return np.array([[int(v) / self.Q for v in row] for row in nums], dtype=np.float64)
            return ((col[:, None] * m[None, :]) % self.Q) / self.Q
        return np.mod(self.X[:, axis][:, None] * m[None, :], 1.0)


def box_sums(points: PointArrays, M: int) -> np.ndarray:
    """
    S(m) = sum_i e(m . x_i) para todo m con |m|_inf <= M (incluido m = 0), con m_0 como
    índice más lento. La suma es separable: se contraen las d tablas de fases en orden fijo.
    """
    tables = [e(points.angles(j, M)) for j in range(points.dim)]
    k = points.k
    if len(tables) == 1:
        return tables[0].sum(axis=0)
    acc = tables[0]
    for E in tables[1:-1]:
        acc = (acc[:, :, None] * E[:, None, :]).reshape(k, -1)
    return (acc.T @ tables[-1]).ravel()


def _punctured(S: np.ndarray) -> np.ndarray:
    """Quita la frecuencia m = 0 (el centro de la caja)."""
    center = (S.size - 1) // 2
    return np.delete(S, center)


def freq_box(d: int, eps: float) -> FreqBox:
    """B(M) con M = ceil(d/eps)."""
    eps = InputValidators.validate_eps(eps)
    return FreqBox(dim=d, M=budgets.frequency_radius(d, eps))


def iter_freq_box(box: FreqBox):
    """Recorre B(M) en orden lexicográfico sin materializarlo."""
    for m in itertools.product(range(-box.M, box.M + 1), repeat=box.dim):
        if any(m):
            yield m


def box_partial_sums(points: Sequence[TorusPoint], M: int) -> List[Tuple[Tuple[int, ...], float]]:
    """Filas (m, |sum_i e(m . u_i)|) sobre B(M) para los reportes de diagnóstico."""
    arrays = PointArrays.from_points(list(points))
    S = np.abs(_punctured(box_sums(arrays, M)))
    box = FreqBox(dim=arrays.dim, M=M)
    return [(m, float(v)) for m, v in zip(iter_freq_box(box), S)]


# -----------------------
# Cota inferior de sumas sobre B(M)
# -----------------------
def bmv_lower_bound_holds(points: Sequence[TorusPoint], eps: float) -> BmvCheck:
    """
    Evalúa k/3 <= sum_{m en B(M)} |sum_i e(m . u_i)| con M = ceil(d/eps).
    Exige |u_i| > eps para todo i.
    """
    eps = InputValidators.validate_eps(eps)
    points = list(points)
    if not points:
        raise ValidationError("se requiere al menos un punto")
    for idx, u in enumerate(points):
        if not torus_norm(u) > eps:
            raise HypothesisViolationError(f"|u_{idx}| = {float(torus_norm(u)):.6g} no supera eps={eps}")

    arrays = PointArrays.from_points(points)
    M = budgets.frequency_radius(arrays.dim, eps)
    rhs = float(np.abs(_punctured(box_sums(arrays, M))).sum())
    lhs = arrays.k / 3.0
    verified = lhs <= rhs + 1e-9
    if not verified:
        logger.error(f"❌ Cota BMV violada: k/3={lhs} > {rhs} (d={arrays.dim}, eps={eps}, M={M})")
    return BmvCheck(verified=verified, lhs=lhs, rhs=rhs, M=M, k=arrays.k)


def pair_sum_arrays(points: PointArrays, M: int) -> float:
    """sum_{m en B(M)} sum_{i,j} e(m . (x_i - x_j)) = sum_m |sum_i e(m . x_i)|^2."""
    S = _punctured(box_sums(points, M))
    return float((S.real ** 2 + S.imag ** 2).sum())


def pair_sum(Y: TorusPointSet, g: Sequence[Sequence[int]], M: int) -> float:
    """Suma de pares sin constantes para la imagen gY (multiconjunto)."""
    InputValidators.validate_positive_int(M, "M")
    return pair_sum_arrays(PointArrays.from_set(Y).image(g), M)


def lemma24_certificate(
    Y: TorusPointSet,
    g: Sequence[Sequence[int]],
    eps: float,
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS,
    threads: Optional[int] = None,
) -> Lemma24Certificate:
    """
    Certificado de no densidad: si gY no es eps-denso con testigo alpha, evalúa
    k^2/9 <= |B(M)| * sum_{m en B(M)} |sum_i e(m . (alpha - g x_i))|^2.
    """
    eps = InputValidators.validate_eps(eps)
    g = InputValidators.validate_square_int_matrix(g, Y.dim, "g")
    verdict = is_eps_dense(apply_matrix(Y, g), eps, max_refinements, threads)
    if verdict.status != DensityStatus.NOT_DENSE:
        return Lemma24Certificate(applicable=False, verdict=verdict)

    alpha = verdict.witness
    images = PointArrays.from_set(Y).image(g)
    if images.exact:
        image_points = [TorusPoint.exact([Fraction(int(v), images.Q) for v in row]) for row in images.P]
    else:
        image_points = [TorusPoint.from_floats(row) for row in images.X]
    shifted = [
        TorusPoint(mode=p.mode, coords=tuple(a - c for a, c in zip(alpha.coords, p.coords)))
        for p in image_points
    ]

    box = freq_box(Y.dim, eps)
    S = _punctured(box_sums(PointArrays.from_points(shifted), box.M))
    raw_rhs = box.size * float((S.real ** 2 + S.imag ** 2).sum())
    raw_lhs = Y.k ** 2 / 9.0
    holds = raw_lhs <= raw_rhs + 1e-9
    if not holds:
        logger.error(f"❌ Desigualdad de no densidad violada: {raw_lhs} > {raw_rhs}")
    return Lemma24Certificate(
        applicable=True,
        raw_lhs=raw_lhs,
        raw_rhs=raw_rhs,
        pair_sum=pair_sum_arrays(images, box.M),
        holds=holds,
        M=box.M,
        witness=alpha,
        verdict=verdict,
    )


# -----------------------
# Sumas completas y promedios de Weyl
# -----------------------
def _horner_mod(coefficients: Sequence[int], n: np.ndarray, q: int) -> np.ndarray:
    """sum_{j>=1} b_j n^j mod q (sin término constante)."""
    acc = np.zeros_like(n)
    for b in reversed(coefficients):
        acc = ((acc + (b % q)) % q) * n % q
    return acc


def complete_rational_sum(spec: CompleteSumSpec) -> complex:
    """S = (1/q) sum_{n=1}^{q} e(theta + P(n)/q); ángulos P(n) mod q exactos."""
    q = spec.q
    if q > budgets.COMPLETE_SUM_MAX_Q:
        raise BudgetExceededError(f"q={q} supera el máximo {budgets.COMPLETE_SUM_MAX_Q}")
    if q * q < 2**62:
        n = np.arange(1, q + 1, dtype=np.int64)
    else:
        n = np.arange(1, q + 1).astype(object)
    residues = _horner_mod(spec.coefficients, n, q)
    inner = e(residues.astype(np.float64) / q).mean()
    return complex(e(float(spec.theta)) * inner)


def _random_coefficients(rng: np.random.Generator, D: int, q: int) -> List[int]:
    """b_1..b_D en [0, q) con el coeficiente líder coprimo con q."""
    coeffs = [int(b) for b in rng.integers(0, q, size=D)]
    while math.gcd(coeffs[-1], q) != 1:
        coeffs[-1] = int(rng.integers(1, q)) if q > 1 else 1
    return coeffs


def hua_decay_check(
    D: int,
    q_list: Sequence[int],
    trials: int,
    seed: Optional[int] = None,
    delta: float = budgets.HUA_DELTA,
) -> HuaDecayTable:
    """
    Tabula max |S| sobre `trials` polinomios aleatorios de grado D por módulo q y el
    valor normalizado max|S| * q^(1/D - delta). `bounded` exige que la mitad final de
    la tabla no supere el máximo de la mitad inicial (ni la cota trivial 1).
    """
    D = InputValidators.validate_positive_int(D, "D")
    trials = InputValidators.validate_positive_int(trials, "trials")
    qs = [InputValidators.validate_positive_int(q, "q") for q in q_list]
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise ValidationError("q_list debe ser estrictamente creciente")
    if not qs:
        raise ValidationError("q_list no puede estar vacía")

    rng = np.random.default_rng(seed)
    rows: List[HuaRow] = []
    for q in qs:
        worst = 0.0
        for _ in range(trials):
            spec = CompleteSumSpec(q=q, coefficients=_random_coefficients(rng, D, q))
            worst = max(worst, abs(complete_rational_sum(spec)))
        rows.append(HuaRow(q=q, max_abs=worst, normalized=worst * q ** (1.0 / D - delta)))

    head = rows[: max(1, len(rows) // 2)]
    tail = rows[len(head):]
    ceiling = max(1.0, max(r.normalized for r in head))
    bounded = all(r.normalized <= ceiling + 1e-12 for r in tail)
    logger.info(f"Hua D={D}: {len(rows)} módulos, acotado={bounded}")
    return HuaDecayTable(D=D, delta=delta, rows=rows, bounded=bounded)


def weyl_average(coefficients: Sequence[Any], N: int) -> complex:
    """
    (1/N) sum_{n=1}^N e(c_1 n + ... + c_D n^D). Con coeficientes racionales las fases se
    reducen exactamente; con reales se reduce cada término mod 1 en doble precisión.
    """
    N = InputValidators.validate_positive_int(N, "N")
    coeffs = list(coefficients)
    if not coeffs:
        return complex(1.0)
    if all(isinstance(c, (int, Fraction)) for c in coeffs):
        fracs = [Fraction(c) % 1 for c in coeffs]
        L = math.lcm(*(c.denominator for c in fracs))
        nums = [int(c * L) for c in fracs]
        if L * N < 2**62:
            n = np.arange(1, N + 1, dtype=np.int64)
        else:
            n = np.arange(1, N + 1).astype(object)
        residues = _horner_mod(nums, n, L)
        return complex(e(residues.astype(np.float64) / L).mean())

    n = np.arange(1, N + 1, dtype=np.float64)
    phase = np.zeros(N, dtype=np.float64)
    power = np.ones(N, dtype=np.float64)
    for c in coeffs:
        power = power * n
        phase = np.mod(phase + np.mod(float(c) * power, 1.0), 1.0)
    return complex(e(phase).mean())
