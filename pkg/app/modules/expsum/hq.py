from __future__ import annotations
import logging
import math
from collections import Counter
from typing import Sequence

import numpy as np

from app.config import budgets
from app.models.models import HqScalingFit, HqSum, TorsionHistogram, TorusPointSet
from app.modules.errors import PrecisionError
from app.utils.validators import ValidationError

logger = logging.getLogger(__name__)


def torsion_histogram(Y: TorusPointSet) -> TorsionHistogram:
    """h_q = #{(i, j), i != j : la diferencia x_i - x_j tiene orden de torsión q}."""
    if not Y.is_exact:
        raise PrecisionError("h_q requiere puntos exactos")
    Q, P = Y.numerators()
    counts: Counter = Counter()
    for i in range(Y.k):
        diff = (P - P[i]) % Q
        if diff.dtype == object:
            orders = [Q // math.gcd(Q, *(int(v) for v in row)) for row in diff]
        else:
            g = np.gcd(np.gcd.reduce(diff, axis=1), Q)
            orders = (Q // g).tolist()
        orders[i] = 1
        counts.update(q for q in orders if q != 1)
    return TorsionHistogram(counts=dict(sorted(counts.items())), k=Y.k)


def hq_sum_scaling(Y: TorusPointSet, r: float) -> HqSum:
    """sum_q h_q q^(-r)."""
    if not r > 0:
        raise ValidationError(f"r debe ser positivo (r={r})")
    hist = torsion_histogram(Y)
    total = math.fsum(h * q ** (-r) for q, h in hist.counts.items())
    return HqSum(weighted_sum=total, k=hist.k, r=r)


def hq_scaling_fit(
    ks: Sequence[int],
    sums: Sequence[float],
    d: int,
    r: float,
    slack: float = budgets.SLOPE_SLACK,
) -> HqScalingFit:
    """Pendiente log-log de sum vs k contra la forma 2 - r/(d+1) (+ holgura)."""
    if len(ks) != len(sums) or len(ks) < 2:
        raise ValidationError("se necesitan al menos dos pares (k, suma)")
    if any(s <= 0 for s in sums):
        raise ValidationError("las sumas deben ser positivas para el ajuste log-log")
    slope = float(np.polyfit(np.log(np.asarray(ks, dtype=float)), np.log(np.asarray(sums, dtype=float)), 1)[0])
    bound = 2.0 - r / (d + 1) + slack
    ok = slope <= bound
    logger.info(f"Escalado h_q: pendiente={slope:.3f}, cota={bound:.3f}, ok={ok}")
    return HqScalingFit(ks=list(ks), sums=list(sums), slope=slope, bound=bound, ok=ok)
