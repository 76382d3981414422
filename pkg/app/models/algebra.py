from __future__ import annotations
from enum import Enum
from fractions import Fraction
from typing import Any, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_serializer, model_validator

from app.models.models import fraction_to_str
from app.utils.validators import parse_int

IntMatrix = List[List[int]]


def _matrix_to_strings(matrix: IntMatrix) -> List[List[str]]:
    return [[str(x) for x in row] for row in matrix]


def _rational_to_json(value: Fraction) -> Any:
    return value.numerator if value.denominator == 1 else fraction_to_str(value)


def zero_matrix(rows: int, cols: int) -> IntMatrix:
    return [[0] * cols for _ in range(rows)]


def identity_matrix(d: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(d)] for i in range(d)]

# -----------------------
# Forma normal de Smith
# -----------------------
class SnfFactorization(BaseModel):
    """T0 = L * D * Rp con L, Rp unimodulares y D diagonal con D_1 | D_2 | ..."""
    model_config = ConfigDict(frozen=True)

    L: IntMatrix
    D: IntMatrix
    Rp: IntMatrix
    divisors: List[int]
    k: int

    @field_serializer("L", "D", "Rp")
    def _serialize_matrix(self, matrix: IntMatrix) -> List[List[str]]:
        return _matrix_to_strings(matrix)

    @field_serializer("divisors")
    def _serialize_divisors(self, divisors: List[int]) -> List[str]:
        return [str(x) for x in divisors]

class GcdBoundFactorization(BaseModel):
    """T0 = T * R con T inyectiva (r x d'), R sobreyectiva (d' x d) y cota Q = D_k."""
    model_config = ConfigDict(frozen=True)

    T: IntMatrix
    R: IntMatrix
    Q: PositiveInt
    d_prime: PositiveInt

    @field_serializer("T", "R")
    def _serialize_matrix(self, matrix: IntMatrix) -> List[List[str]]:
        return _matrix_to_strings(matrix)

# -----------------------
# Matrices polinomiales
# -----------------------
class IntPolyMatrix(BaseModel):
    """
    A(x) = sum_j C_j x^j. Los coeficientes se guardan como Fraction para admitir
    polinomios con valores enteros (potencias unipotentes); `is_integral` indica si
    todos son enteros.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: PositiveInt
    coeffs: Tuple[Tuple[Tuple[Any, ...], ...], ...]

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        dim = parse_int(data["dim"], "dim")
        raw = list(data.get("coeffs") or [])
        if not raw:
            raw = [[[0] * dim for _ in range(dim)]]
        mats = []
        for C in raw:
            if len(C) != dim or any(len(row) != dim for row in C):
                raise ValueError(f"cada coeficiente debe ser {dim}x{dim}")
            mats.append(tuple(tuple(Fraction(x) for x in row) for row in C))
        # grado ajustado: C_D != 0 salvo que A sea constante
        while len(mats) > 1 and all(x == 0 for row in mats[-1] for x in row):
            mats.pop()
        return {"dim": dim, "coeffs": tuple(mats)}

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for C in self.coeffs for row in C for x in row)

    def coefficient(self, j: int) -> List[List[Fraction]]:
        return [list(row) for row in self.coeffs[j]]

    @field_serializer("coeffs")
    def _serialize_coeffs(self, coeffs: Any) -> List[Any]:
        return [[[_rational_to_json(x) for x in row] for row in C] for C in coeffs]

class FreqMap(BaseModel):
    """T_m u = m . (A(x) - A(0)) u; la fila j-1 es m^T C_j (j = 1..D)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: Tuple[int, ...]
    rows: Tuple[Tuple[Any, ...], ...]

    @property
    def degree(self) -> int:
        return len(self.rows)

class HypothesisCheck(BaseModel):
    model_config = ConfigDict(frozen=True)
    ok: bool
    bad_pair: Optional[Tuple[int, int]] = None
    heuristic: bool = False
    detail: Optional[str] = None

# -----------------------
# Semigrupos
# -----------------------
class SemigroupPresentation(BaseModel):
    model_config = ConfigDict(frozen=True)

    dim: PositiveInt
    generators: List[IntMatrix]
    unipotent: List[bool] = Field(default_factory=list)
    determinants: List[int] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _derive_flags(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        from sympy import Matrix, eye, zeros

        dim = parse_int(data["dim"], "dim")
        gens = [[[parse_int(x, "generador") for x in row] for row in g] for g in data.get("generators") or []]
        if not gens:
            raise ValueError("se requiere al menos un generador")
        flags, dets = [], []
        for g in gens:
            if len(g) != dim or any(len(row) != dim for row in g):
                raise ValueError(f"cada generador debe ser {dim}x{dim}")
            M = Matrix(g)
            flags.append((M - eye(dim)) ** dim == zeros(dim, dim))
            dets.append(int(M.det()))
        return {"dim": dim, "generators": gens, "unipotent": flags, "determinants": dets}

    @property
    def all_unipotent(self) -> bool:
        return all(self.unipotent)

    @property
    def in_sl(self) -> bool:
        return all(d == 1 for d in self.determinants)

class CayleyBall(BaseModel):
    model_config = ConfigDict(frozen=True)
    radius: int
    elements: List[IntMatrix]
    words: List[Tuple[int, ...]]

    @property
    def size(self) -> int:
        return len(self.elements)

class AffineSpanTrace(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    base: Tuple[Any, ...]
    bases: List[List[Tuple[Any, ...]]]     # base de W_n para n = 0..n_max
    stabilization_radius: int
    dim: int
    full_span: bool
    invariant_subspace: Optional[List[Tuple[Any, ...]]] = None  # W_N cuando W_N + a es propio

    @property
    def dims(self) -> List[int]:
        return [len(b) for b in self.bases]

    @field_serializer("base")
    def _serialize_base(self, base: Tuple[Any, ...]) -> List[Any]:
        return [_rational_to_json(x) for x in base]

    @field_serializer("bases")
    def _serialize_bases(self, bases: Any) -> Any:
        return [[[_rational_to_json(x) for x in v] for v in basis] for basis in bases]

    @field_serializer("invariant_subspace")
    def _serialize_subspace(self, subspace: Any) -> Any:
        if subspace is None:
            return None
        return [[_rational_to_json(x) for x in v] for v in subspace]

# -----------------------
# Paseos aleatorios
# -----------------------
class WalkMode(str, Enum):
    EXACT_TREE = "EXACT_TREE"
    MONTE_CARLO = "MONTE_CARLO"

class WalkMeasure(BaseModel):
    """Medida de probabilidad de soporte finito sobre matrices enteras d x d."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    support: List[IntMatrix]
    weights: Tuple[Any, ...]

    @model_validator(mode="before")
    @classmethod
    def _check_weights(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        support = [[[parse_int(x, "soporte") for x in row] for row in g] for g in data.get("support") or []]
        if not support:
            raise ValueError("el soporte no puede estar vacío")
        weights = data.get("weights")
        if weights is None:
            weights = [Fraction(1, len(support))] * len(support)
        weights = tuple(Fraction(w) for w in weights)
        if len(weights) != len(support):
            raise ValueError("un peso por elemento del soporte")
        if any(w <= 0 for w in weights):
            raise ValueError("los pesos deben ser positivos")
        if sum(weights) != 1:
            raise ValueError(f"los pesos deben sumar exactamente 1 (suman {sum(weights)})")
        return {"support": support, "weights": weights}

    @classmethod
    def uniform(cls, support: List[IntMatrix]) -> "WalkMeasure":
        return cls(support=support)

    @property
    def dim(self) -> int:
        return len(self.support[0])

    @field_serializer("weights")
    def _serialize_weights(self, weights: Any) -> List[str]:
        return [fraction_to_str(w) for w in weights]

class FourierEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    a: Tuple[int, ...]
    real: float
    imag: float
    method: WalkMode
    se: float = 0.0
    seed: Optional[int] = None
    nodes: Optional[int] = None    # nodos distintos en el último nivel (EXACT_TREE)

    @property
    def value(self) -> complex:
        return complex(self.real, self.imag)

    @property
    def modulus(self) -> float:
        return abs(self.value)

class PolynomializedProduct(BaseModel):
    """A(x) = Q_N(x, x^R, ..., x^(R^(N-1))) para Q_N = prod_i u_i^(n_i) con u_i cíclicos."""
    model_config = ConfigDict(frozen=True)

    A: IntPolyMatrix
    R: int
    N: int
    generator_order: List[int]
    monomials: int
    degenerate: bool                       # A constante
    condition_ok: Optional[bool] = None    # condición (1.1) para la dirección dada
