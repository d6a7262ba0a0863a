"""Exact phase-1 simplex for feasibility of {x >= 0 : A x = b} over the rationals.

Pivoting follows Bland's rule (lowest-index entering column, lowest-index
leaving basic variable among ratio ties), so runs are cycle-free and the
output is a deterministic function of (A, b).

On infeasibility the phase-1 optimal duals give a Farkas certificate y with
A^T y <= 0 and b^T y > 0: any x >= 0 with A x = b would force
b^T y = x^T A^T y <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)


@dataclass(frozen=True)
class FeasibilityResult:
    x: tuple[Fraction, ...] | None
    farkas: tuple[Fraction, ...] | None
    pivots: int

    @property
    def feasible(self) -> bool:
        return self.x is not None


def solve_feasibility(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> FeasibilityResult:
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return FeasibilityResult(tuple([ZERO] * n), None, 0)
    sign = [1 if bi >= 0 else -1 for bi in b]
    width = n + m + 1
    tab = []
    for i in range(m):
        row = [Fraction(sign[i]) * Fraction(v) for v in A[i]]
        row += [Fraction(1) if k == i else ZERO for k in range(m)]
        row.append(Fraction(sign[i]) * Fraction(b[i]))
        tab.append(row)
    basis = [n + i for i in range(m)]
    z = [-sum((tab[i][j] for i in range(m)), ZERO) for j in range(n)] + [ZERO] * m
    z.append(-sum((tab[i][-1] for i in range(m)), ZERO))

    pivots = 0
    while True:
        enter = next((j for j in range(width - 1) if z[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        # phase 1 is bounded below by 0, so an entering column always has a positive entry
        assert leave is not None
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [u - f * v for u, v in zip(tab[i], tab[leave])]
        if z[enter] != 0:
            f = z[enter]
            z = [u - f * v for u, v in zip(z, tab[leave])]
        basis[leave] = enter
        pivots += 1

    objective = -z[-1]
    if objective > 0:
        y = tuple(Fraction(sign[i]) * (1 - z[n + i]) for i in range(m))
        return FeasibilityResult(None, y, pivots)
    x = [ZERO] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = tab[i][-1]
    return FeasibilityResult(tuple(x), None, pivots)


def verify_farkas(A, b, y) -> bool:
    """Independent check that y certifies infeasibility of {x >= 0 : A x = b}."""
    m = len(A)
    n = len(A[0]) if m else 0
    for j in range(n):
        if sum((A[i][j] * y[i] for i in range(m)), ZERO) > 0:
            return False
    return sum((b[i] * y[i] for i in range(m)), ZERO) > 0
