from __future__ import annotations
import logging
import math
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import budgets
from app.models.models import DensityStatus, DensityVerdict, PointMode, TorusPoint, TorusPointSet
from app.modules.errors import DimensionMismatchError, PrecisionError
from app.utils.parallel import ordered_map
from app.utils.validators import InputValidators, ValidationError, parse_fraction, parse_int

logger = logging.getLogger(__name__)

Real = Union[Fraction, float]


def torus_dist(u: TorusPoint, v: TorusPoint) -> Real:
    """
    Distancia L-infinito en T^d: max_i min(|u_i - v_i|, 1 - |u_i - v_i|).
    Exacta (Fraction) en modo EXACT, float en modo FLOAT.
    """
    if u.dim != v.dim:
        raise DimensionMismatchError(f"dimensiones distintas: {u.dim} vs {v.dim}")
    if u.mode != v.mode:
        raise ValidationError("no se mezclan puntos EXACT y FLOAT")
    best: Real = Fraction(0) if u.is_exact else 0.0
    for a, b in zip(u.coords, v.coords):
        diff = abs(a - b)
        best = max(best, min(diff, 1 - diff))
    return best


def torus_norm(u: TorusPoint) -> Real:
    """|u|: distancia L-infinito al origen."""
    zero = TorusPoint(mode=u.mode, coords=(0,) * u.dim)
    return torus_dist(u, zero)


def min_torsion_order(x: TorusPoint) -> int:
    """Menor q > 0 con q x = 0 en T^d: el mcm de los denominadores reducidos."""
    if not x.is_exact:
        raise PrecisionError("el orden de torsión no es decidible en punto flotante")
    return math.lcm(*(c.denominator for c in x.coords))


def distances_to_set(centers: np.ndarray, Y: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
    """min_y |c - y| en T^d para cada fila c de centers, por bloques vectorizados."""
    k, d = Y.shape
    chunk = max(1, min(budgets.DENSITY_CHUNK, 4_000_000 // max(1, k * d)))
    blocks = [centers[i:i + chunk] for i in range(0, len(centers), chunk)]

    def _block(block: np.ndarray) -> np.ndarray:
        diff = np.abs(block[:, None, :] - Y[None, :, :])
        diff = np.minimum(diff, 1.0 - diff)
        return diff.max(axis=2).min(axis=1)

    return np.concatenate(ordered_map(_block, blocks, threads)) if blocks else np.empty(0)


def _grid_centers(cells: int, d: int) -> np.ndarray:
    """Centros (i + 1/2)/cells en orden lexicográfico de índices."""
    axis = (np.arange(cells, dtype=np.float64) + 0.5) / cells
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _center_point(index: int, cells: int, d: int, mode: PointMode) -> TorusPoint:
    coords = []
    for _ in range(d):
        coords.append(index % cells)
        index //= cells
    coords.reverse()
    if mode == PointMode.EXACT:
        return TorusPoint.exact([Fraction(2 * i + 1, 2 * cells) for i in coords])
    return TorusPoint.from_floats([(i + 0.5) / cells for i in coords])


def is_eps_dense(
    Y: TorusPointSet,
    eps: float,
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS,
    threads: Optional[int] = None,
) -> DensityVerdict:
    """
    Decide si Y es eps-denso (bolas cerradas L-infinito) con una malla certificada.

    Se usan celdas de lado h = 1/cells con h <= eps/2; todo punto del toro está a
    distancia <= h/2 de un centro. Si todos los centros están a <= eps - h/2 de Y
    la respuesta DENSE es rigurosa; si algún centro está a > eps + h/2 la respuesta
    NOT_DENSE es rigurosa y ese centro es el testigo. En otro caso se divide h a la
    mitad hasta max_refinements veces y, si no se decide, se devuelve UNDECIDED.
    """
    eps = InputValidators.validate_eps(eps)
    if Y is None or Y.k == 0:
        raise ValidationError("el conjunto Y no puede estar vacío")
    if max_refinements < 0:
        raise ValidationError("max_refinements debe ser >= 0")

    d = Y.dim
    points = Y.float_array()
    tol = budgets.FLOAT_TOLERANCE
    cells = math.ceil(2.0 / eps - 1e-12)
    last_h = 1.0 / cells
    last_max: Optional[float] = None
    completed = 0

    for level in range(max_refinements + 1):
        if cells ** d > budgets.DENSITY_GRID_BUDGET:
            logger.warning(f"⚠️ Malla de {cells}^{d} celdas supera el presupuesto; se devuelve UNDECIDED")
            break
        h = 1.0 / cells
        dist = distances_to_set(_grid_centers(cells, d), points, threads)
        last_h, last_max = h, float(dist.max())
        completed = level + 1

        if last_max <= eps - h / 2 - tol:
            logger.debug(f"DENSE certificado con h={h:.3g} (nivel {level})")
            return DensityVerdict(status=DensityStatus.DENSE, resolution=h, levels=level + 1, max_distance=last_max)

        far = np.flatnonzero(dist > eps + h / 2 + tol)
        if far.size:
            witness = _center_point(int(far[0]), cells, d, Y.mode)
            logger.debug(f"NOT_DENSE certificado con testigo {witness.coords} (nivel {level})")
            return DensityVerdict(
                status=DensityStatus.NOT_DENSE, witness=witness, resolution=h,
                levels=level + 1, max_distance=last_max,
            )
        cells *= 2

    logger.info(f"Densidad indecisa para eps={eps} tras {completed} niveles de malla (h={last_h:.3g})")
    return DensityVerdict(status=DensityStatus.UNDECIDED, resolution=last_h, levels=completed, max_distance=last_max)


def max_gap_1d(values: np.ndarray) -> float:
    """Mayor hueco circular de un conjunto de T^1; es eps-denso sii el hueco es <= 2 eps."""
    if values.size == 0:
        return 1.0
    s = np.sort(values.ravel())
    gaps = np.diff(s)
    wrap = 1.0 - s[-1] + s[0]
    return float(max(wrap, gaps.max() if gaps.size else 0.0))


def certify_dense_exact(Y: TorusPointSet, eps: float, resolution: float) -> bool:
    """
    Repite la certificación DENSE de la malla de lado `resolution` en aritmética entera.

    Con x_i = P_i / Q y centros (2j + 1) / (2 cells), todas las distancias son múltiplos
    de 1/D con D = 2 cells Q, así que la condición max_c min_y |c - y| <= eps - h/2 se
    compara sin redondeo (eps se toma como el racional binario exacto del float).
    """
    if not Y.is_exact:
        raise PrecisionError("la certificación entera requiere modo EXACT")
    cells = round(1.0 / resolution)
    Q, P = Y.numerators()
    D = 2 * cells * Q
    bound = math.floor((Fraction(eps) - Fraction(1, 2 * cells)) * D)
    if bound < 0:
        return False
    dtype = np.int64 if D < 2**31 else object
    P2 = np.asarray(P, dtype=dtype) * (2 * cells)
    d = Y.dim
    total = cells ** d
    chunk = max(1, min(budgets.DENSITY_CHUNK, 4_000_000 // max(1, Y.k * d)))
    for start in range(0, total, chunk):
        index = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = np.stack([(index // cells ** (d - 1 - i)) % cells for i in range(d)], axis=1)
        centers = (2 * digits + 1).astype(dtype) * Q
        diff = np.abs(centers[:, None, :] - P2[None, :, :]) % D
        diff = np.minimum(diff, D - diff)
        if (diff.max(axis=2).min(axis=1) > bound).any():
            return False
    return True


def exact_image_numerators(Q: int, P: np.ndarray, g: Sequence[Sequence[int]]) -> np.ndarray:
    """Numeradores de g x_i mod 1 sobre el denominador común Q, en aritmética entera exacta."""
    reduced = [[parse_int(x, "g") % Q for x in row] for row in g]
    if P.dtype != object and Q < 2**31 and len(reduced) * Q * Q < 2**62:
        G = np.array(reduced, dtype=np.int64)
        return (P @ G.T) % Q
    G = np.array(reduced, dtype=object)
    return np.asarray(P, dtype=object).dot(G.T) % Q


def numerators_to_set(Q: int, P: np.ndarray) -> TorusPointSet:
    rows = [[Fraction(int(v), Q) for v in row] for row in P]
    return TorusPointSet.exact(rows, dedupe=True)


def apply_matrix(Y: TorusPointSet, g: Sequence[Sequence[Any]]) -> TorusPointSet:
    """Imagen gY mod 1 (los puntos que colisionan se funden)."""
    if len(g) != Y.dim or any(len(row) != Y.dim for row in g):
        raise DimensionMismatchError(f"la matriz debe ser {Y.dim}x{Y.dim}")
    if Y.is_exact:
        Q, P = Y.numerators()
        return numerators_to_set(Q, exact_image_numerators(Q, P, g))
    G = np.array([[parse_int(x, "g") for x in row] for row in g], dtype=np.float64)
    return TorusPointSet.from_floats(np.mod(Y.float_array() @ G.T, 1.0).tolist(), dedupe=True)


def translate(Y: TorusPointSet, alpha: TorusPoint, negate_set: bool = True) -> List[TorusPoint]:
    """Puntos alpha - y (o alpha + y), sin exigir distinción."""
    sign = -1 if negate_set else 1
    return [
        TorusPoint(mode=Y.mode, coords=tuple(a + sign * y for a, y in zip(alpha.coords, p.coords)))
        for p in Y.points
    ]


# -----------------------
# Formato de archivo de conjuntos de puntos
# -----------------------
def point_set_from_json(payload: Any) -> TorusPointSet:
    """{dim, mode, points: [[num, den] por coordenada] o [float por coordenada]}."""
    InputValidators.validate_payload_keys(payload, ("dim", "mode", "points"), "conjunto de puntos")
    dim = InputValidators.validate_positive_int(payload["dim"], "dim")
    try:
        mode = PointMode(str(payload["mode"]).upper())
    except ValueError:
        raise ValidationError(f"modo desconocido {payload['mode']!r}")
    rows = payload["points"]
    if not isinstance(rows, list) or not rows:
        raise ValidationError("points debe ser una lista no vacía")
    if mode == PointMode.EXACT:
        parsed = [[parse_fraction(c) for c in row] for row in rows]
    else:
        try:
            parsed = [[float(c) for c in row] for row in rows]
        except (TypeError, ValueError) as e:
            raise ValidationError(f"coordenada no numérica: {e}")
    if any(len(row) != dim for row in parsed):
        raise ValidationError(f"cada punto debe tener {dim} coordenadas")
    try:
        if mode == PointMode.EXACT:
            return TorusPointSet.exact(parsed)
        return TorusPointSet.from_floats(parsed)
    except ValueError as e:
        raise ValidationError(f"conjunto de puntos inválido: {e}")


def point_set_to_json(Y: TorusPointSet) -> dict:
    return {
        "dim": Y.dim,
        "mode": Y.mode.value,
        "points": [p.model_dump(mode="json")["coords"] for p in Y.points],
    }
