from __future__ import annotations
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.models.algebra import GcdBoundFactorization, IntMatrix, SnfFactorization, identity_matrix, zero_matrix
from app.modules.intlinalg.matrices import mat_vec
from app.utils.validators import InputValidators, ValidationError

logger = logging.getLogger(__name__)


class _SnfState:
    """
    Matriz de trabajo A con transformaciones acumuladas tales que T0 = L * A * Rp
    en todo momento. Cada operación elemental sobre A aplica su inversa a L o Rp.
    """

    def __init__(self, T0: IntMatrix):
        self.A = [list(row) for row in T0]
        self.r = len(T0)
        self.d = len(T0[0])
        self.L = identity_matrix(self.r)
        self.Rp = identity_matrix(self.d)

    # fila_i += c * fila_j  =>  columna_j de L -= c * columna_i
    def add_row(self, i: int, j: int, c: int) -> None:
        if c == 0:
            return
        Ai, Aj = self.A[i], self.A[j]
        for col in range(self.d):
            Ai[col] += c * Aj[col]
        for row in self.L:
            row[j] -= c * row[i]

    # columna_i += c * columna_j  =>  fila_j de Rp -= c * fila_i
    def add_col(self, i: int, j: int, c: int) -> None:
        if c == 0:
            return
        for row in self.A:
            row[i] += c * row[j]
        Ri, Rj = self.Rp[i], self.Rp[j]
        for col in range(self.d):
            Rj[col] -= c * Ri[col]

    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        self.A[i], self.A[j] = self.A[j], self.A[i]
        for row in self.L:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for row in self.A:
            row[i], row[j] = row[j], row[i]
        self.Rp[i], self.Rp[j] = self.Rp[j], self.Rp[i]

    def negate_row(self, i: int) -> None:
        self.A[i] = [-x for x in self.A[i]]
        for row in self.L:
            row[i] = -row[i]

    def smallest_entry(self, t: int) -> Optional[Tuple[int, int]]:
        best = None
        for i in range(t, self.r):
            for j in range(t, self.d):
                v = self.A[i][j]
                if v and (best is None or abs(v) < abs(self.A[best[0]][best[1]])):
                    best = (i, j)
        return best

    def non_divisible(self, t: int) -> Optional[int]:
        p = self.A[t][t]
        for i in range(t + 1, self.r):
            for j in range(t + 1, self.d):
                if self.A[i][j] % p:
                    return i
        return None


def smith_normal_form(T0: Sequence[Sequence[int]]) -> SnfFactorization:
    """
    Forma normal de Smith por operaciones elementales exactas: T0 = L * D * Rp con
    L, Rp unimodulares, D diagonal no negativa y D_1 | D_2 | ... | D_k.
    """
    T0 = InputValidators.validate_int_matrix(T0, name="T0")
    st = _SnfState(T0)
    steps = min(st.r, st.d)
    k = 0
    for t in range(steps):
        while True:
            pos = st.smallest_entry(t)
            if pos is None:
                break
            st.swap_rows(t, pos[0])
            st.swap_cols(t, pos[1])
            p = st.A[t][t]
            for i in range(t + 1, st.r):
                st.add_row(i, t, -(st.A[i][t] // p))
            for j in range(t + 1, st.d):
                st.add_col(j, t, -(st.A[t][j] // p))
            if any(st.A[i][t] for i in range(t + 1, st.r)) or any(st.A[t][j] for j in range(t + 1, st.d)):
                continue
            bad_row = st.non_divisible(t)
            if bad_row is None:
                break
            st.add_row(t, bad_row, 1)
        if st.A[t][t] == 0:
            break
        if st.A[t][t] < 0:
            st.negate_row(t)
        k = t + 1

    divisors = [st.A[i][i] for i in range(steps)]
    D = zero_matrix(st.r, st.d)
    for i, v in enumerate(divisors):
        D[i][i] = v
    logger.debug(f"SNF {st.r}x{st.d}: divisores={divisors}, k={k}")
    return SnfFactorization(L=st.L, D=D, Rp=st.Rp, divisors=divisors, k=k)


def gcd_bound_factorize(T0: Sequence[Sequence[int]]) -> GcdBoundFactorization:
    """
    T0 = T * R con W = span(e_1..e_k): R = P_W * Rp (primeras k filas) y
    T = (L * D) restringida a W (primeras k columnas de L por D_1..D_k). Q = D_k.
    """
    snf = smith_normal_form(T0)
    if snf.k == 0:
        raise ValidationError("la matriz cero no admite factorización (k = 0)")
    k = snf.k
    R = [list(row) for row in snf.Rp[:k]]
    T = [[snf.L[i][j] * snf.divisors[j] for j in range(k)] for i in range(len(snf.L))]
    return GcdBoundFactorization(T=T, R=R, Q=snf.divisors[k - 1], d_prime=k)


def gcd_bound_fuzz(
    f: GcdBoundFactorization,
    trials: int,
    q_max: int,
    seed: Optional[int] = None,
    w_range: int = 50,
) -> bool:
    """Muestrea (w, q) con gcd(w, q) = 1 y comprueba gcd(T w, q) <= Q."""
    trials = InputValidators.validate_positive_int(trials, "trials")
    q_max = InputValidators.validate_positive_int(q_max, "q_max")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        q = int(rng.integers(1, q_max + 1))
        while True:
            w = [int(x) for x in rng.integers(-w_range, w_range + 1, size=f.d_prime)]
            if math.gcd(*w, q) == 1:
                break
        g = math.gcd(*mat_vec(f.T, w), q)
        if g > f.Q:
            logger.error(f"❌ gcd(Tw, q)={g} > Q={f.Q} para w={w}, q={q}")
            return False
    return True
