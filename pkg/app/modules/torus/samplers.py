"""
Constructores de conjuntos de puntos para experimentos y pruebas.
Todos reciben un generador numpy o una semilla; nada usa estado global.
"""
from __future__ import annotations
import math
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
from sympy import primerange

from app.models.models import TorusPoint, TorusPointSet
from app.utils.validators import InputValidators


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_rational_set(
    k: int,
    d: int,
    seed_or_rng=None,
    denominators: Optional[Sequence[int]] = None,
) -> TorusPointSet:
    """
    k puntos racionales distintos; cada punto toma un denominador de la lista
    (por defecto primos entre 1009 y 9973) y numeradores uniformes.
    """
    k = InputValidators.validate_positive_int(k, "k")
    rng = _rng(seed_or_rng)
    dens = list(denominators) if denominators else list(primerange(1009, 10_000))
    seen = {}
    while len(seen) < k:
        q = int(dens[int(rng.integers(len(dens)))])
        coords = tuple(Fraction(int(v), q) for v in rng.integers(0, q, size=d))
        seen.setdefault(coords, None)
    return TorusPointSet.exact(list(seen))


def injective_projection_set(k: int, d: int, seed_or_rng=None, denominator: Optional[int] = None) -> TorusPointSet:
    """Conjunto cuyas proyecciones a cada coordenada son inyectivas (sin puntos alineados)."""
    rng = _rng(seed_or_rng)
    q = denominator or int(next(iter(primerange(max(4 * k, 1009), 10 * max(4 * k, 1009)))))
    if q < k:
        raise ValueError(f"el denominador {q} no admite {k} proyecciones distintas")
    columns = [rng.choice(q, size=k, replace=False) for _ in range(d)]
    rows = [[Fraction(int(columns[j][i]), q) for j in range(d)] for i in range(k)]
    return TorusPointSet.exact(rows)


def uniform_grid(side: int, d: int) -> TorusPointSet:
    """La red completa (1/side) Z^d / Z^d."""
    axis = [Fraction(i, side) for i in range(side)]
    rows = np.array(np.meshgrid(*([np.arange(side)] * d), indexing="ij")).reshape(d, -1).T
    return TorusPointSet.exact([[axis[int(i)] for i in row] for row in rows])


def grid_family(k: int, d: int) -> TorusPointSet:
    """Los k primeros puntos (orden lexicográfico) de la red de lado ceil(k^(1/d))."""
    k = InputValidators.validate_positive_int(k, "k")
    side = max(2, math.ceil(round(k ** (1.0 / d), 9)))
    while side ** d < k:
        side += 1
    full = uniform_grid(side, d)
    return TorusPointSet.from_points(list(full.points[:k]))


def small_denominator_family(k: int, d: int, seed_or_rng=None) -> TorusPointSet:
    """
    k puntos distintos con denominador a lo sumo Q, donde Q es el menor entero cuya
    red (1/Q) Z^d tiene al menos 2k puntos; muchos pares tienen orden pequeño.
    """
    k = InputValidators.validate_positive_int(k, "k")
    rng = _rng(seed_or_rng)
    Q = 2
    while Q ** d < 2 * k:
        Q += 1
    idx = rng.choice(Q ** d, size=k, replace=False)
    rows: List[List[Fraction]] = []
    for flat in idx:
        flat = int(flat)
        coords = []
        for _ in range(d):
            coords.append(Fraction(flat % Q, Q))
            flat //= Q
        rows.append(coords)
    return TorusPointSet.exact(rows)


def random_far_points(k: int, d: int, eps: float, seed_or_rng=None, denominator: int = 10_007) -> List[TorusPoint]:
    """k puntos racionales (con repeticiones posibles) con |u| > eps."""
    rng = _rng(seed_or_rng)
    out: List[TorusPoint] = []
    while len(out) < k:
        coords = [Fraction(int(v), denominator) for v in rng.integers(0, denominator, size=d)]
        if max(min(c, 1 - c) for c in coords) > eps:
            out.append(TorusPoint.exact(coords))
    return out
