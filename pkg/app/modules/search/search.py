from __future__ import annotations
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import budgets
from app.models.algebra import IntPolyMatrix, SemigroupPresentation
from app.models.models import DensityStatus, DensityVerdict, Dilator, SearchBudget, SearchOutcome, TorusPointSet
from app.modules.errors import BudgetExceededError, DimensionMismatchError, HypothesisViolationError, SoundnessError
from app.modules.expsum.expsum import PointArrays
from app.modules.search.engines import Candidate, Engine, GroupEngine, PolyEngine, ProductEngine, ScalarEngine
from app.modules.torus.torus import apply_matrix, certify_dense_exact, is_eps_dense, max_gap_1d
from app.utils.parallel import ordered_map
from app.utils.validators import InputValidators, ValidationError

logger = logging.getLogger(__name__)


def _image_floats(base: PointArrays, g) -> np.ndarray:
    image = base.image(g)
    if image.exact:
        return (image.P.astype(np.float64) / image.Q) if image.P.dtype != object else \
            np.array([[int(v) / image.Q for v in row] for row in image.P], dtype=np.float64)
    return image.X


def _cannot_be_dense(points: np.ndarray, eps: float) -> bool:
    """Poda segura: pocos puntos distintos o (d = 1) un hueco mayor que 2 eps."""
    distinct = np.unique(points, axis=0)
    d = points.shape[1]
    if len(distinct) * (2 * eps) ** d < 1.0 - 1e-9:
        return True
    if d == 1 and max_gap_1d(distinct[:, 0]) > 2 * eps + 1e-9:
        return True
    return False


def _evaluate(Y: TorusPointSet, base: PointArrays, candidate: Candidate, eps: float, max_refinements: int) -> Optional[DensityVerdict]:
    _, g = candidate
    if _cannot_be_dense(_image_floats(base, g), eps):
        return None
    return is_eps_dense(apply_matrix(Y, g), eps, max_refinements, threads=1)


def run_search(
    Y: TorusPointSet,
    engine: Engine,
    eps: float,
    budget: SearchBudget,
    limit: int,
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> SearchOutcome:
    """
    Evalúa candidatos por lotes en paralelo; gana el primero (en orden canónico) cuya
    imagen resulta DENSE. En modo EXACT el acierto se re-certifica en aritmética entera
    sobre la misma malla (certify_dense_exact); en modo FLOAT la re-verificación es una
    repetición de is_eps_dense.
    """
    eps = InputValidators.validate_eps(eps)
    if Y.dim != engine.dim:
        raise DimensionMismatchError(f"Y vive en T^{Y.dim} y la acción en dimensión {engine.dim}")
    base = PointArrays.from_set(Y)
    scanned = 0
    stop_reason = "exhausted"
    iterator = engine.candidates(limit)

    while True:
        batch: List[Candidate] = []
        try:
            for candidate in iterator:
                batch.append(candidate)
                if len(batch) >= budgets.SEARCH_BATCH_SIZE:
                    break
        except BudgetExceededError as err:
            logger.info(f"Presupuesto de elementos agotado: {err}")
            stop_reason = "budget"
            iterator = iter(())
        if not batch:
            break

        verdicts = ordered_map(lambda c: _evaluate(Y, base, c, eps, max_refinements), batch, threads)
        for offset, (candidate, verdict) in enumerate(zip(batch, verdicts)):
            if verdict is not None and verdict.status == DensityStatus.DENSE:
                dilator, g = candidate
                image = apply_matrix(Y, g)
                if image.is_exact:
                    recheck = verdict if certify_dense_exact(image, eps, verdict.resolution) else None
                else:
                    # en FLOAT no hay aritmética exacta: se repite la malla con hilos por defecto
                    recheck = is_eps_dense(image, eps, max_refinements)
                if recheck is None or recheck.status != DensityStatus.DENSE:
                    raise SoundnessError(f"el candidato {dilator.describe()} no re-verifica como DENSE")
                scanned += offset + 1
                logger.info(f"✅ Dilatación {dilator.describe()} tras {scanned} candidatos")
                return SearchOutcome(found=True, dilator=dilator, verdict=recheck, scanned=scanned, eps=eps, seed=seed)
        scanned += len(batch)

        if stop_reason == "budget":
            break

    logger.info(f"Sin dilatación tras {scanned} candidatos ({stop_reason})")
    return SearchOutcome(found=False, scanned=scanned, eps=eps, seed=seed, stop_reason=stop_reason)


def find_scalar_dilation(
    Y: TorusPointSet,
    eps: float,
    budget: Optional[SearchBudget] = None,
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> SearchOutcome:
    """n = 1..n_max con la acción diagonal x -> n x."""
    budget = budget or SearchBudget()
    return run_search(Y, ScalarEngine(Y.dim), eps, budget, budget.n_max, max_refinements, threads, seed)


def find_poly_dilation(
    Y: TorusPointSet,
    A: IntPolyMatrix,
    eps: float,
    budget: Optional[SearchBudget] = None,
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> SearchOutcome:
    """n = 1..n_max con x -> A(n) x."""
    if Y.dim != A.dim:
        raise DimensionMismatchError(f"Y vive en T^{Y.dim} y A es {A.dim}x{A.dim}")
    budget = budget or SearchBudget()
    return run_search(Y, PolyEngine(A), eps, budget, budget.n_max, max_refinements, threads, seed)


def check_injective_projections(Y: TorusPointSet, d1: int) -> None:
    """Las proyecciones de Y a T^d1 y a T^d2 deben ser inyectivas."""
    if not 0 < d1 < Y.dim:
        raise ValidationError(f"d1 debe estar entre 1 y {Y.dim - 1}")
    for name, part in (("primer", slice(0, d1)), ("segundo", slice(d1, Y.dim))):
        projected = {p.coords[part] for p in Y.points}
        if len(projected) != Y.k:
            raise HypothesisViolationError(
                f"la proyección al {name} factor no es inyectiva: Y contiene una rebanada horizontal o vertical"
            )


def find_product_dilation(
    Y: TorusPointSet,
    engines: Tuple[Engine, Engine],
    eps: float,
    budget: Optional[SearchBudget] = None,
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> SearchOutcome:
    """Búsqueda en G_1 x G_2 por capas (max(i, j), i, j); hasta n_max pares."""
    first, second = engines
    if first.dim + second.dim != Y.dim:
        raise DimensionMismatchError(f"d1 + d2 = {first.dim + second.dim} pero Y vive en T^{Y.dim}")
    check_injective_projections(Y, first.dim)
    if Y.k == 1:
        logger.warning("⚠️ Un solo punto nunca es eps-denso para eps < 1/2")
    budget = budget or SearchBudget()
    return run_search(Y, ProductEngine(first, second), eps, budget, budget.n_max, max_refinements, threads, seed)


def find_group_dilation(
    Y: TorusPointSet,
    S: SemigroupPresentation,
    eps: float,
    budget: Optional[SearchBudget] = None,
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> SearchOutcome:
    """Bola de Cayley de radio ball_radius en BFS canónico, hasta element_budget elementos."""
    if Y.dim != S.dim:
        raise DimensionMismatchError(f"Y vive en T^{Y.dim} y S actúa en dimensión {S.dim}")
    budget = budget or SearchBudget()
    engine = GroupEngine(S, budget.ball_radius, budget.element_budget, threads)
    return run_search(Y, engine, eps, budget, budget.element_budget, max_refinements, threads, seed)


def outcome_to_json(outcome: SearchOutcome) -> dict:
    """{found, dilator, scanned, eps, seed, verdict_resolution}."""
    return {
        "found": outcome.found,
        "dilator": outcome.dilator.model_dump(mode="json", exclude_none=True) if outcome.dilator else None,
        "scanned": outcome.scanned,
        "eps": outcome.eps,
        "seed": outcome.seed,
        "verdict_resolution": outcome.verdict.resolution if outcome.verdict else None,
        "stop_reason": outcome.stop_reason,
    }
