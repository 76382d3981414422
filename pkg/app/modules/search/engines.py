"""
Motores de candidatos para la búsqueda de dilataciones. Cada motor produce pares
(Dilator, matriz) de forma perezosa y en orden canónico.
"""
from __future__ import annotations
import logging
from typing import Iterator, List, Optional, Tuple

from app.models.algebra import IntMatrix, IntPolyMatrix, SemigroupPresentation
from app.models.models import Dilator
from app.modules.cayley.cayley import iter_cayley_ball
from app.modules.polymat.polymat import eval_poly_matrix

logger = logging.getLogger(__name__)

Candidate = Tuple[Dilator, IntMatrix]


class Engine:
    """Interfaz común: dimensión de la acción y candidatos en orden canónico."""

    kind = "engine"

    def __init__(self, dim: int):
        self.dim = dim

    def candidates(self, limit: int) -> Iterator[Candidate]:
        raise NotImplementedError


class ScalarEngine(Engine):
    """x -> n x (acción diagonal n I en T^d), n = 1, 2, ..."""

    kind = "scalar"

    def candidates(self, limit: int) -> Iterator[Candidate]:
        for n in range(1, limit + 1):
            g = [[n if i == j else 0 for j in range(self.dim)] for i in range(self.dim)]
            yield Dilator(kind=self.kind, n=n), g


class PolyEngine(Engine):
    """x -> A(n) x, n = 1, 2, ..."""

    kind = "poly"

    def __init__(self, A: IntPolyMatrix):
        super().__init__(A.dim)
        self.A = A

    def candidates(self, limit: int) -> Iterator[Candidate]:
        for n in range(1, limit + 1):
            yield Dilator(kind=self.kind, n=n), eval_poly_matrix(self.A, n)


class GroupEngine(Engine):
    """Elementos de la bola de Cayley en BFS canónico (longitud, luego palabra)."""

    kind = "word"

    def __init__(self, S: SemigroupPresentation, radius: int, element_budget: int, threads: Optional[int] = None):
        super().__init__(S.dim)
        self.S = S
        self.radius = radius
        self.element_budget = element_budget
        self.threads = threads

    def candidates(self, limit: int) -> Iterator[Candidate]:
        emitted = 0
        for word, g in iter_cayley_ball(self.S, self.radius, self.element_budget, self.threads):
            if emitted >= limit:
                return
            emitted += 1
            yield Dilator(kind=self.kind, word=word, matrix=g), g


class _LazyCandidates:
    """Lista perezosa de los candidatos de un motor, indexable."""

    def __init__(self, engine: Engine, limit: int):
        self._iter = engine.candidates(limit)
        self._items: List[Candidate] = []
        self._done = False

    def get(self, index: int) -> Optional[Candidate]:
        while not self._done and len(self._items) <= index:
            try:
                self._items.append(next(self._iter))
            except StopIteration:
                self._done = True
        return self._items[index] if index < len(self._items) else None

    def exhausted_at(self, index: int) -> bool:
        return self.get(index) is None


class ProductEngine(Engine):
    """
    Acción por bloques de G_1 x G_2 en T^(d1 + d2). Los pares (i, j) se recorren por
    capas cuadradas ordenadas por (max(i, j), i, j).
    """

    kind = "product"

    def __init__(self, first: Engine, second: Engine):
        super().__init__(first.dim + second.dim)
        self.first = first
        self.second = second

    @staticmethod
    def shell(s: int) -> List[Tuple[int, int]]:
        return [(i, s) for i in range(s)] + [(s, j) for j in range(s + 1)]

    def candidates(self, limit: int) -> Iterator[Candidate]:
        left = _LazyCandidates(self.first, limit)
        right = _LazyCandidates(self.second, limit)
        d1, d2 = self.first.dim, self.second.dim
        emitted = 0
        s = 0
        while emitted < limit:
            if left.exhausted_at(s) and right.exhausted_at(s):
                return
            for i, j in self.shell(s):
                a, b = left.get(i), right.get(j)
                if a is None or b is None:
                    continue
                g = [row + [0] * d2 for row in a[1]] + [[0] * d1 + row for row in b[1]]
                yield Dilator(kind=self.kind, matrix=g, factors=[a[0], b[0]]), g
                emitted += 1
                if emitted >= limit:
                    return
            s += 1
