"""Generadores aleatorios de instancias algebraicas para los experimentos."""
from __future__ import annotations
from fractions import Fraction
from typing import List, Tuple

import numpy as np

from app.models.algebra import IntMatrix, SemigroupPresentation, identity_matrix
from app.modules.intlinalg.matrices import mat_mul


def random_int_matrix(rng: np.random.Generator, rows: int, cols: int, bound: int) -> IntMatrix:
    return [[int(v) for v in rng.integers(-bound, bound + 1, size=cols)] for _ in range(rows)]


def _transvection(d: int, i: int, j: int, c: int) -> IntMatrix:
    E = identity_matrix(d)
    E[i][j] = c
    return E


def random_unimodular(rng: np.random.Generator, d: int, steps: int = 6, bound: int = 2) -> Tuple[IntMatrix, IntMatrix]:
    """P unimodular como producto de transvecciones, junto con su inversa exacta."""
    P, P_inv = identity_matrix(d), identity_matrix(d)
    if d == 1:
        return P, P_inv
    for _ in range(steps):
        i, j = (int(v) for v in rng.choice(d, size=2, replace=False))
        c = int(rng.integers(-bound, bound + 1))
        P = mat_mul(P, _transvection(d, i, j, c))
        P_inv = mat_mul(_transvection(d, i, j, -c), P_inv)
    return P, P_inv


def random_unipotent(rng: np.random.Generator, d: int, bound: int = 3) -> IntMatrix:
    """P U P^-1 con U triangular superior unipotente."""
    U = identity_matrix(d)
    for i in range(d):
        for j in range(i + 1, d):
            U[i][j] = int(rng.integers(-bound, bound + 1))
    P, P_inv = random_unimodular(rng, d)
    return mat_mul(mat_mul(P, U), P_inv)


def random_unipotent_presentation(rng: np.random.Generator, d: int, generators: int) -> SemigroupPresentation:
    return SemigroupPresentation(dim=d, generators=[random_unipotent(rng, d) for _ in range(generators)])


def random_rational_vector(rng: np.random.Generator, d: int, denominator: int = 97) -> List[Fraction]:
    while True:
        vec = [Fraction(int(v), denominator) for v in rng.integers(-denominator, denominator + 1, size=d)]
        if any(vec):
            return vec


def trial_rngs(seed: int, trials: int) -> List[np.random.Generator]:
    """Un generador independiente por ensayo, derivado de la semilla maestra."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]
