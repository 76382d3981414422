from __future__ import annotations
import logging
from fractions import Fraction
from typing import Any, Iterator, List, Optional, Sequence, Tuple, Union


from app.config import budgets
from app.models.algebra import AffineSpanTrace, CayleyBall, HypothesisCheck, IntMatrix, SemigroupPresentation, identity_matrix
from app.models.models import TorusPointSet
from app.modules.errors import BudgetExceededError, DimensionMismatchError, HypothesisViolationError
from app.modules.intlinalg.matrices import freeze, mat_mul, mat_vec, to_sympy
from app.utils.parallel import ordered_map
from app.utils.validators import InputValidators, ValidationError, parse_fraction

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]


def iter_cayley_ball(
    S: SemigroupPresentation,
    n: int,
    budget: int = budgets.CAYLEY_ELEMENT_BUDGET,
    threads: Optional[int] = None,
) -> Iterator[Tuple[Word, IntMatrix]]:
    """
    Recorre G_n = {u_1 ... u_r : r <= n} en BFS: por longitud y luego en orden
    lexicográfico de la palabra; cada matriz aparece una sola vez, con su primera palabra.
    """
    if n < 0:
        raise ValidationError("el radio debe ser >= 0")
    identity = identity_matrix(S.dim)
    seen = {freeze(identity)}
    yield (), identity
    frontier: List[Tuple[Word, IntMatrix]] = [((), identity)]
    gens = S.generators

    for _ in range(n):
        if not frontier:
            return
        # productos del nivel en paralelo; el orden de salida es el de la lista
        products = ordered_map(lambda item: [mat_mul(item[1], u) for u in gens], frontier, threads)
        next_frontier: List[Tuple[Word, IntMatrix]] = []
        for (word, _), row in zip(frontier, products):
            for idx, g in enumerate(row):
                key = freeze(g)
                if key in seen:
                    continue
                seen.add(key)
                if len(seen) > budget:
                    raise BudgetExceededError(f"la bola de Cayley supera {budget} elementos")
                entry = (word + (idx,), g)
                next_frontier.append(entry)
                yield entry
        frontier = next_frontier


def cayley_ball(
    S: SemigroupPresentation,
    n: int,
    budget: int = budgets.CAYLEY_ELEMENT_BUDGET,
    threads: Optional[int] = None,
) -> CayleyBall:
    words, elements = [], []
    for word, g in iter_cayley_ball(S, n, budget, threads):
        words.append(word)
        elements.append(g)
    logger.debug(f"Bola de Cayley de radio {n}: {len(elements)} elementos")
    return CayleyBall(radius=n, elements=elements, words=words)


# -----------------------
# Traza del span afín
# -----------------------
def _span_basis(vectors: Sequence[Sequence[Fraction]], dim: int) -> List[Tuple[Fraction, ...]]:
    """Base canónica (filas no nulas de la RREF) del subespacio generado."""
    rows = [list(v) for v in vectors if any(x != 0 for x in v)]
    if not rows:
        return []
    rref, pivots = to_sympy(rows).rref()
    return [tuple(Fraction(int(x.p), int(x.q)) for x in rref.row(i)) for i in range(len(pivots))]


def _parse_vector(a: Sequence[Any], dim: int, name: str = "a") -> List[Fraction]:
    vec = [x if isinstance(x, Fraction) else parse_fraction(x) for x in a]
    if len(vec) != dim:
        raise DimensionMismatchError(f"{name} tiene {len(vec)} coordenadas, se esperaban {dim}")
    return vec


def affine_span_trace(S: SemigroupPresentation, a: Sequence[Any], n_max: int) -> AffineSpanTrace:
    """
    W_n = span{g a - a : g en G_n}. Como G_{n+1} = {I} u U G_n y
    u g a - a = u (g a - a) + (u a - a), vale W_{n+1} = W_1 + sum_u u W_n.
    """
    vec = _parse_vector(a, S.dim)
    InputValidators.validate_nonzero_vector(vec, "a")
    if n_max < S.dim:
        raise ValidationError(f"n_max debe ser >= d = {S.dim}")

    W1 = _span_basis([[x - y for x, y in zip(mat_vec(u, vec), vec)] for u in S.generators], S.dim)
    bases: List[List[Tuple[Fraction, ...]]] = [[], W1]
    for _ in range(1, n_max):
        current = bases[-1]
        images = [mat_vec(u, w) for u in S.generators for w in current]
        bases.append(_span_basis(list(W1) + images, S.dim))


    dims = [len(b) for b in bases]
    N = next((i for i in range(len(dims) - 1) if dims[i] == dims[i + 1]), len(dims) - 1)
    full = dims[-1] == S.dim
    if not full:
        logger.info(f"Span afín estabiliza en dim {dims[N]} < {S.dim} (radio {N}); W_N + a es invariante")
    return AffineSpanTrace(
        base=tuple(vec),
        bases=bases,
        stabilization_radius=N,
        dim=dims[-1],
        full_span=full,
        invariant_subspace=None if full else list(bases[N]),
    )


def check_thmC_hypothesis(S: SemigroupPresentation, Ytilde: Union[TorusPointSet, Sequence[Sequence[Any]]]) -> HypothesisCheck:
    """Cada diferencia de levantamientos debe alcanzar span completo en radio d."""
    if isinstance(Ytilde, TorusPointSet):
        if not Ytilde.is_exact:
            raise ValidationError("la verificación requiere levantamientos exactos")
        lifts = [tuple(p) for p in Ytilde.lifts()]
    else:
        lifts = [tuple(_parse_vector(p, S.dim, "levantamiento")) for p in Ytilde]
    if len(set(lifts)) != len(lifts):
        raise ValidationError("los levantamientos deben ser distintos")
    for i in range(len(lifts)):
        for j in range(i + 1, len(lifts)):
            diff = [x - y for x, y in zip(lifts[i], lifts[j])]
            trace = affine_span_trace(S, diff, S.dim)
            if not trace.full_span:
                return HypothesisCheck(ok=False, bad_pair=(i, j), detail=f"dim W = {trace.dim}")
    return HypothesisCheck(ok=True)


# -----------------------
# Presentaciones
# -----------------------
def product_presentation(S1: SemigroupPresentation, S2: SemigroupPresentation) -> SemigroupPresentation:
    """G_1 x G_2 actuando por bloques diagonales en T^(d1 + d2)."""
    d1, d2 = S1.dim, S2.dim
    gens = []
    for g in S1.generators:
        gens.append([row + [0] * d2 for row in g] + [[0] * d1 + row for row in identity_matrix(d2)])
    for h in S2.generators:
        gens.append([row + [0] * d2 for row in identity_matrix(d1)] + [[0] * d1 + row for row in h])
    return SemigroupPresentation(dim=d1 + d2, generators=gens)


def elementary_presentation() -> SemigroupPresentation:
    """Generadores unipotentes elementales de SL_2(Z)."""
    return SemigroupPresentation(dim=2, generators=[[[1, 1], [0, 1]], [[1, 0], [1, 1]]])


def presentation_from_json(payload: Any) -> SemigroupPresentation:
    """{dim, generators: [matrices enteras], assume_unipotent: bool}."""
    InputValidators.validate_payload_keys(payload, ("dim", "generators"), "presentación")
    dim = InputValidators.validate_positive_int(payload["dim"], "dim")
    gens = payload["generators"]
    if not isinstance(gens, list) or not gens:
        raise ValidationError("generators debe ser una lista no vacía")
    parsed = [InputValidators.validate_square_int_matrix(g, dim, f"generador {i}") for i, g in enumerate(gens)]
    S = SemigroupPresentation(dim=dim, generators=parsed)
    if payload.get("assume_unipotent") and not S.all_unipotent:
        bad = [i for i, flag in enumerate(S.unipotent) if not flag]
        raise HypothesisViolationError(f"generadores no unipotentes: {bad}")
    return S


def presentation_to_json(S: SemigroupPresentation) -> dict:
    return {"dim": S.dim, "generators": S.generators, "assume_unipotent": S.all_unipotent}
