# app/models/models.py

from __future__ import annotations
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, PrivateAttr, field_serializer, model_validator

from app.utils.validators import parse_int

# -----------------------
# Utilidades
# -----------------------
def fraction_to_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"

def reduce_float_mod1(value: float) -> float:
    reduced = float(value) % 1.0
    # -1e-17 % 1.0 == 1.0 en doble precisión
    return 0.0 if reduced >= 1.0 else reduced

# -----------------------
# Puntos del toro
# -----------------------
class PointMode(str, Enum):
    EXACT = "EXACT"
    FLOAT = "FLOAT"

class TorusPoint(BaseModel):
    """Punto de T^d. En modo EXACT las coordenadas son Fraction reducidas en [0,1)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: PointMode
    coords: Tuple[Any, ...]

    @model_validator(mode="before")
    @classmethod
    def _reduce_mod1(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        mode = PointMode(data.get("mode", PointMode.EXACT))
        coords = data.get("coords")
        if not coords:
            raise ValueError("un punto del toro necesita al menos una coordenada")
        if mode == PointMode.EXACT:
            reduced = tuple(Fraction(c) % 1 for c in coords)
        else:
            reduced = tuple(reduce_float_mod1(c) for c in coords)
        return {"mode": mode, "coords": reduced}

    @classmethod
    def exact(cls, coords: Sequence[Any]) -> "TorusPoint":
        return cls(mode=PointMode.EXACT, coords=tuple(coords))

    @classmethod
    def from_floats(cls, coords: Sequence[float]) -> "TorusPoint":
        return cls(mode=PointMode.FLOAT, coords=tuple(coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def is_exact(self) -> bool:
        return self.mode == PointMode.EXACT

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords], dtype=np.float64)

    @field_serializer("coords")
    def _serialize_coords(self, coords: Tuple[Any, ...]) -> List[Any]:
        if self.mode == PointMode.EXACT:
            return [[c.numerator, c.denominator] for c in coords]
        return [float(c) for c in coords]


class TorusPointSet(BaseModel):
    """Subconjunto finito de T^d; todos los puntos del mismo modo y dimensión, sin repetidos."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: PositiveInt
    mode: PointMode
    points: Tuple[TorusPoint, ...]

    _float_cache: Optional[np.ndarray] = PrivateAttr(default=None)
    _exact_cache: Optional[Tuple[int, np.ndarray]] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_points(self) -> "TorusPointSet":
        for p in self.points:
            if p.dim != self.dim:
                raise ValueError(f"punto de dimensión {p.dim} en un conjunto de dimensión {self.dim}")
            if p.mode != self.mode:
                raise ValueError("todos los puntos deben compartir el modo")
        if len(set(self.points)) != len(self.points):
            raise ValueError("los puntos deben ser distintos como elementos de T^d")
        return self

    @classmethod
    def from_points(cls, points: Sequence[TorusPoint], dedupe: bool = False) -> "TorusPointSet":
        if not points:
            raise ValueError("el conjunto de puntos está vacío")
        pts = list(dict.fromkeys(points)) if dedupe else list(points)
        return cls(dim=pts[0].dim, mode=pts[0].mode, points=tuple(pts))

    @classmethod
    def exact(cls, rows: Sequence[Sequence[Any]], dedupe: bool = False) -> "TorusPointSet":
        return cls.from_points([TorusPoint.exact(r) for r in rows], dedupe=dedupe)

    @classmethod
    def from_floats(cls, rows: Sequence[Sequence[float]], dedupe: bool = False) -> "TorusPointSet":
        return cls.from_points([TorusPoint.from_floats(r) for r in rows], dedupe=dedupe)

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def is_exact(self) -> bool:
        return self.mode == PointMode.EXACT

    def float_array(self) -> np.ndarray:
        """Matriz k x d de levantamientos en [0,1)^d."""
        if self._float_cache is None:
            self._float_cache = np.array([p.as_floats() for p in self.points], dtype=np.float64)
        return self._float_cache

    def common_denominator(self) -> int:
        return self.numerators()[0]

    def numerators(self) -> Tuple[int, np.ndarray]:
        """
        Representación entera exacta: (Q, P) con x_i = P[i] / Q.
        P es int64 cuando no hay riesgo de desborde y object en otro caso.
        """
        if not self.is_exact:
            from app.modules.errors import PrecisionError
            raise PrecisionError("la representación entera requiere modo EXACT")
        if self._exact_cache is None:
            Q = 1
            for p in self.points:
                for c in p.coords:
                    Q = lcm(Q, c.denominator)
            rows = [[c.numerator * (Q // c.denominator) for c in p.coords] for p in self.points]
            dtype = np.int64 if Q < 2**31 else object
            self._exact_cache = (Q, np.array(rows, dtype=dtype))
        return self._exact_cache

    def lifts(self) -> List[Tuple[Any, ...]]:
        return [p.coords for p in self.points]

# -----------------------
# Veredictos
# -----------------------
class DensityStatus(str, Enum):
    DENSE = "DENSE"
    NOT_DENSE = "NOT_DENSE"
    UNDECIDED = "UNDECIDED"

class DensityVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: DensityStatus
    witness: Optional[TorusPoint] = None
    resolution: float              # malla h del último nivel evaluado
    levels: int = 1                # niveles de malla evaluados
    max_distance: Optional[float] = None  # max distancia centro -> Y en el último nivel

    @model_validator(mode="after")
    def _witness_required(self) -> "DensityVerdict":
        if self.status == DensityStatus.NOT_DENSE and self.witness is None:
            raise ValueError("NOT_DENSE requiere un testigo")
        return self

    @property
    def is_dense(self) -> bool:
        return self.status == DensityStatus.DENSE

# -----------------------
# Sumas exponenciales
# -----------------------
class FreqBox(BaseModel):
    """B(M) = {m en Z^d : m != 0, |m|_inf <= M}."""
    model_config = ConfigDict(frozen=True)
    dim: PositiveInt
    M: PositiveInt

    @property
    def size(self) -> int:
        return (2 * self.M + 1) ** self.dim - 1

class TorsionHistogram(BaseModel):
    model_config = ConfigDict(frozen=True)
    counts: Dict[int, int] = Field(default_factory=dict)
    k: int

    @property
    def total(self) -> int:
        return sum(self.counts.values())

class CompleteSumSpec(BaseModel):
    """S = (1/q) sum_{n=1}^{q} e(theta + (1/q) sum_j b_j n^j)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    q: PositiveInt
    coefficients: Tuple[int, ...]
    theta: Any = Fraction(0)

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if isinstance(data, dict):
            coeffs = tuple(parse_int(b, "coefficients") for b in data.get("coefficients", ()))
            if not coeffs:
                raise ValueError("se requiere al menos un coeficiente (r >= 1)")
            theta = data.get("theta", Fraction(0))
            theta = Fraction(theta) % 1 if not isinstance(theta, float) else reduce_float_mod1(theta)
            data = {**data, "coefficients": coeffs, "theta": theta}
        return data

    @field_serializer("theta")
    def _serialize_theta(self, theta: Any) -> Any:
        return fraction_to_str(theta) if isinstance(theta, Fraction) else float(theta)

# -----------------------
# Búsqueda
# -----------------------
class SearchBudget(BaseModel):
    model_config = ConfigDict(frozen=True)
    n_max: PositiveInt = 10**5
    ball_radius: PositiveInt = 8
    element_budget: PositiveInt = 10**5

class Dilator(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: str                      # scalar | poly | pair | matrix | word | product
    n: Optional[int] = None
    word: Optional[Tuple[int, ...]] = None
    matrix: Optional[List[List[int]]] = None
    factors: Optional[List["Dilator"]] = None

    def describe(self) -> str:
        if self.kind in ("scalar", "poly"):
            return f"{self.kind}:n={self.n}"
        if self.kind == "word":
            return "word:" + ("".join(f"u{i + 1}" for i in self.word) if self.word else "I")
        if self.kind == "product" and self.factors:
            return "(" + ", ".join(f.describe() for f in self.factors) + ")"
        return f"{self.kind}:{self.matrix}"

Dilator.model_rebuild()

class SearchOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)
    found: bool
    dilator: Optional[Dilator] = None
    verdict: Optional[DensityVerdict] = None
    scanned: int = 0
    eps: float
    seed: Optional[int] = None
    stop_reason: Optional[str] = None  # budget | exhausted

# -----------------------
# Experimentos
# -----------------------
class ExperimentConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    experiment: str
    seed: int                      # obligatorio: todos los experimentos son aleatorios
    eps: Optional[float] = None
    inputs: List[str] = Field(default_factory=list)
    budgets: Dict[str, int] = Field(default_factory=dict)
    params: Dict[str, Any] = Field(default_factory=dict)
    output_dir: str = "./data/reports"
    threads: Optional[int] = None

class ExperimentReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    experiment: str
    schema_id: str = Field(alias="schema")
    artifact_version: str
    seed: int
    budgets: Dict[str, int] = Field(default_factory=dict)
    config_hash: str
    summary: Dict[str, Any] = Field(default_factory=dict)
    files: List[str] = Field(default_factory=list)
    passed: Optional[bool] = None

# -----------------------
# Certificados de sumas exponenciales
# -----------------------
class BmvCheck(BaseModel):
    model_config = ConfigDict(frozen=True)
    verified: bool
    lhs: float                     # k/3
    rhs: float                     # sum_{m in B(M)} |sum_i e(m.u_i)|
    M: int
    k: int

class Lemma24Certificate(BaseModel):
    model_config = ConfigDict(frozen=True)
    applicable: bool
    raw_lhs: Optional[float] = None      # k^2/9
    raw_rhs: Optional[float] = None      # |B(M)| sum_m |sum_i e(m.(alpha - g x_i))|^2
    pair_sum: Optional[float] = None     # sum_m sum_{i,j} e(m.g(x_i - x_j))
    holds: Optional[bool] = None
    M: Optional[int] = None
    witness: Optional[TorusPoint] = None
    verdict: Optional[DensityVerdict] = None

class HqSum(BaseModel):
    model_config = ConfigDict(frozen=True)
    weighted_sum: float
    k: int
    r: float

class HqScalingFit(BaseModel):
    model_config = ConfigDict(frozen=True)
    ks: List[int]
    sums: List[float]
    slope: float
    bound: float
    ok: bool

class HuaRow(BaseModel):
    model_config = ConfigDict(frozen=True)
    q: int
    max_abs: float
    normalized: float              # max|S| * q^(1/D - delta)

class HuaDecayTable(BaseModel):
    model_config = ConfigDict(frozen=True)
    D: int
    delta: float
    rows: List[HuaRow]
    bounded: bool
