from __future__ import annotations
import logging
import math
from fractions import Fraction
from typing import Any, List, Optional, Sequence

import numpy as np

from app.config import budgets
from app.config.settings import settings
from app.models.algebra import FourierEstimate, WalkMeasure, WalkMode
from app.models.models import TorusPoint
from app.modules.errors import BudgetExceededError, DimensionMismatchError, PrecisionError, SoundnessError
from app.modules.expsum.expsum import e
from app.modules.torus.torus import min_torsion_order
from app.utils.parallel import ordered_map
from app.utils.validators import InputValidators, ValidationError, parse_fraction, parse_int

logger = logging.getLogger(__name__)


def _check_inputs(mu: WalkMeasure, x: TorusPoint, a: Sequence[int], n: int) -> tuple:
    a = tuple(parse_int(v, "a") for v in a)
    InputValidators.validate_nonzero_vector(a, "a")
    if len(a) != mu.dim or x.dim != mu.dim:
        raise DimensionMismatchError(f"la medida actúa en dimensión {mu.dim}")
    if n < 0:
        raise ValidationError("n debe ser >= 0")
    return a


def _numerators(x: TorusPoint) -> tuple:
    q = min_torsion_order(x)
    return q, [int(c * q) for c in x.coords]


# -----------------------
# Árbol exacto
# -----------------------
def _exact_tree_profile(mu: WalkMeasure, x: TorusPoint, a: tuple, n_max: int, budget: int) -> List[FourierEstimate]:
    """
    Distribución exacta de g_n ... g_1 x sobre (1/q) Z^d / Z^d. Los nodos iguales se
    fusionan; los pesos son enteros sobre el denominador común W^n.
    """
    q, v = _numerators(x)
    d = mu.dim
    size = q ** d
    if size > budget:
        raise BudgetExceededError(f"(1/{q})Z^{d} tiene {size} nodos (> {budget})")

    # índice plano p = sum_i p_i q^(d-1-i); coordenadas en orden lexicográfico
    coords = np.array(np.meshgrid(*([np.arange(q, dtype=np.int64)] * d), indexing="ij")).reshape(d, -1).T
    radix = q ** np.arange(d - 1, -1, -1, dtype=np.int64)
    maps = [(coords @ (np.array(g, dtype=object) % q).T.astype(np.int64)) % q @ radix for g in mu.support]
    phases = e(((coords @ np.array(a, dtype=np.int64)) % q) / q)

    W = math.lcm(*(w.denominator for w in mu.weights))
    counts = [int(w * W) for w in mu.weights]
    mass = np.zeros(size, dtype=object)
    mass[int(np.dot(v, radix))] = 1

    profile: List[FourierEstimate] = []
    for n in range(n_max + 1):
        if n:
            nxt = np.zeros(size, dtype=object)
            for perm, c in zip(maps, counts):
                np.add.at(nxt, perm, mass * c)
            mass = nxt
        total = W ** n
        if mass.sum() != total:
            raise SoundnessError(f"el peso total del árbol en n={n} no es 1")
        weights = np.array([int(m) / total for m in mass], dtype=np.float64)
        value = complex((weights * phases).sum())
        profile.append(FourierEstimate(
            n=n, a=a, real=value.real, imag=value.imag, method=WalkMode.EXACT_TREE,
            nodes=int(np.count_nonzero(weights)),
        ))
    return profile


def _float_tree_profile(mu: WalkMeasure, x: TorusPoint, a: tuple, n_max: int, budget: int) -> List[FourierEstimate]:
    """Árbol sin fusión para puntos en punto flotante: |soporte|^n hojas."""
    if len(mu.support) ** n_max > budget:
        raise BudgetExceededError(f"|soporte|^n = {len(mu.support)}^{n_max} supera {budget}")
    G = np.array(mu.support, dtype=np.float64)
    w = np.array([float(v) for v in mu.weights])
    points = x.as_floats()[None, :]
    weights = np.ones(1)
    av = np.array(a, dtype=np.float64)
    profile: List[FourierEstimate] = []
    for n in range(n_max + 1):
        if n:
            points = np.mod(np.einsum("gij,pj->gpi", G, points), 1.0).reshape(-1, mu.dim)
            weights = (w[:, None] * weights[None, :]).ravel()
        value = complex((weights * e(np.mod(points @ av, 1.0))).sum())
        profile.append(FourierEstimate(
            n=n, a=a, real=value.real, imag=value.imag, method=WalkMode.EXACT_TREE, nodes=len(points),
        ))
    return profile


# -----------------------
# Monte Carlo
# -----------------------
def _monte_carlo_profile(
    mu: WalkMeasure,
    x: TorusPoint,
    a: tuple,
    n_max: int,
    samples: int,
    seed: int,
    threads: Optional[int],
) -> List[FourierEstimate]:
    """
    Caminos independientes en bloques fijos de MONTE_CARLO_CHUNK; el bloque c usa el
    flujo SeedSequence(seed).spawn(...)[c], así el resultado no depende de los hilos.
    """
    samples = InputValidators.validate_positive_int(samples, "samples")
    chunk = budgets.MONTE_CARLO_CHUNK
    sizes = [min(chunk, samples - start) for start in range(0, samples, chunk)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    probs = np.array([float(w) for w in mu.weights])
    probs = probs / probs.sum()

    if x.is_exact:
        q, v = _numerators(x)
        dtype = np.int64 if q < 2**31 else object
        G = np.array([[[int(c) % q for c in row] for row in g] for g in mu.support], dtype=dtype)
        start = np.array(v, dtype=dtype)
        av = np.array(a, dtype=dtype)

        def _phase(P: np.ndarray) -> np.ndarray:
            return e(((P @ av) % q).astype(np.float64) / q)

        def _step(G_t: np.ndarray, P: np.ndarray) -> np.ndarray:
            return np.matmul(G_t, P[..., None])[..., 0] % q
    else:
        G = np.array(mu.support, dtype=np.float64)
        start = x.as_floats()
        av = np.array(a, dtype=np.float64)

        def _phase(P: np.ndarray) -> np.ndarray:
            return e(np.mod(P @ av, 1.0))

        def _step(G_t: np.ndarray, P: np.ndarray) -> np.ndarray:
            return np.mod(np.matmul(G_t, P[..., None])[..., 0], 1.0)

    def _run(job) -> np.ndarray:
        size, stream = job
        rng = np.random.default_rng(stream)
        choices = rng.choice(len(mu.support), size=(n_max, size), p=probs)
        P = np.tile(start, (size, 1))
        out = np.empty((n_max + 1, size), dtype=np.complex128)
        out[0] = _phase(P)
        for t in range(n_max):
            P = _step(G[choices[t]], P)
            out[t + 1] = _phase(P)
        return out

    values = np.concatenate(ordered_map(_run, list(zip(sizes, streams)), threads), axis=1)
    ddof = 1 if samples > 1 else 0
    profile: List[FourierEstimate] = []
    for n in range(n_max + 1):
        row = values[n]
        mean = row.mean()
        se = math.sqrt(float(row.real.var(ddof=ddof) + row.imag.var(ddof=ddof)) / samples)
        profile.append(FourierEstimate(
            n=n, a=a, real=float(mean.real), imag=float(mean.imag), method=WalkMode.MONTE_CARLO,
            se=se, seed=seed,
        ))
    return profile


def _profile(
    mu: WalkMeasure,
    x: TorusPoint,
    a: Sequence[int],
    n_max: int,
    mode: WalkMode,
    samples: int,
    seed: Optional[int],
    budget: int,
    threads: Optional[int],
) -> List[FourierEstimate]:
    a = _check_inputs(mu, x, a, n_max)
    mode = WalkMode(mode)
    if mode == WalkMode.MONTE_CARLO:
        seed = settings.DEFAULT_SEED if seed is None else int(seed)
        return _monte_carlo_profile(mu, x, a, n_max, samples, seed, threads)
    if x.is_exact:
        return _exact_tree_profile(mu, x, a, n_max, budget)
    return _float_tree_profile(mu, x, a, n_max, budget)


def fourier_coeff(
    mu: WalkMeasure,
    x: TorusPoint,
    a: Sequence[int],
    n: int,
    mode: WalkMode = WalkMode.EXACT_TREE,
    samples: int = 10**5,
    seed: Optional[int] = None,
    budget: int = budgets.EXACT_TREE_BUDGET,
    threads: Optional[int] = None,
) -> FourierEstimate:
    """Coeficiente de Fourier de mu^{*n} * delta_x en la frecuencia a."""
    return _profile(mu, x, a, n, mode, samples, seed, budget, threads)[-1]


def decay_profile(
    mu: WalkMeasure,
    x: TorusPoint,
    a: Sequence[int],
    n_max: int,
    mode: WalkMode = WalkMode.EXACT_TREE,
    samples: int = 10**4,
    seed: Optional[int] = None,
    budget: int = budgets.EXACT_TREE_BUDGET,
    threads: Optional[int] = None,
) -> List[FourierEstimate]:
    """|coeficiente| para n = 0..n_max; x debe ser racional (denominador q)."""
    if not x.is_exact:
        raise PrecisionError("el perfil de decaimiento requiere x racional")
    return _profile(mu, x, a, n_max, mode, samples, seed, budget, threads)


def plateau(profile: Sequence[FourierEstimate], tail: int) -> float:
    """Media del módulo en los últimos `tail` pasos."""
    tail = InputValidators.validate_positive_int(tail, "tail")
    if not profile:
        raise ValidationError("perfil vacío")
    window = profile[-tail:]
    return float(np.mean([est.modulus for est in window]))


def rational_point(v: Sequence[int], q: int) -> TorusPoint:
    """x = v / q."""
    return TorusPoint.exact([Fraction(int(c), q) for c in v])


def measure_from_json(payload: Any) -> WalkMeasure:
    """{support: [matrices], weights: opcional ["num/den" | [num, den]]}."""
    InputValidators.validate_payload_keys(payload, ("support",), "medida")
    weights = payload.get("weights")
    try:
        return WalkMeasure(
            support=payload["support"],
            weights=None if weights is None else [parse_fraction(w) for w in weights],
        )
    except ValueError as err:
        raise ValidationError(f"medida inválida: {err}")
