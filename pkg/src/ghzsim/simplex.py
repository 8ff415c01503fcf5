"""Exact rational feasibility of ``{x >= 0 : A x = b}`` via Phase-I simplex.

Small dense tableau implementation over :class:`fractions.Fraction`, so
every boundary question (feasible at visibility 1/2, infeasible just
above) is decided exactly.  Pivoting uses Dantzig's rule and falls back to
Bland's rule inside long degenerate runs, which keeps the method finite.
An infeasible system yields a
Farkas certificate ``y`` with ``y·A <= 0`` componentwise and ``y·b > 0``,
which :func:`verify_farkas` re-checks from scratch, independently of the
solver's internal state.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    solution: Optional[List[Fraction]]  # structural variable values if feasible
    certificate: Optional[List[Fraction]]  # Farkas vector if infeasible
    infeasibility_gap: Fraction  # Phase-I optimum: 0 iff feasible
    iterations: int


def solve_feasibility(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> FeasibilityResult:
    """Decide whether ``rows · x = rhs`` admits a non-negative solution."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    if any(len(row) != n for row in rows) or len(rhs) != m:
        raise ValueError("inconsistent system dimensions")

    zero, one = Fraction(0), Fraction(1)
    flip = [one if rhs[i] >= 0 else -one for i in range(m)]
    # tableau rows: [structural | artificial | rhs]
    tableau: List[List[Fraction]] = []
    for i in range(m):
        row = [flip[i] * Fraction(v) for v in rows[i]]
        row.extend(one if j == i else zero for j in range(m))
        row.append(flip[i] * Fraction(rhs[i]))
        tableau.append(row)
    width = n + m + 1

    # crash basis: a structural column that is a unit vector for a row can
    # start basic there, so only the remaining rows need a basic artificial
    # (all artificial columns are kept, passively, to read the dual off)
    basis = [n + i for i in range(m)]
    column_hits = [[] for _ in range(n)]
    for i in range(m):
        for j in range(n):
            if tableau[i][j]:
                column_hits[j].append(i)
    for j in range(n):
        if len(column_hits[j]) == 1:
            i = column_hits[j][0]
            if basis[i] >= n and tableau[i][j] == 1:
                basis[i] = j

    # reduced-cost row for min(sum of basic artificials): z_j - c_j
    obj = [zero] * width
    for i in range(m):
        if basis[i] >= n:
            for j in range(width):
                if tableau[i][j]:
                    obj[j] += tableau[i][j]
    for j in range(n, n + m):
        obj[j] -= one

    # artificials never enter: the crash ones never were basic, the others
    # are driven out and stay out
    blocked = [False] * n + [basis[i] != n + i for i in range(m)]
    iterations = 0
    stalled = 0  # degenerate steps in a row; Bland's rule kicks in when stuck
    while True:
        enter = -1
        if stalled < 32:
            best_cost = zero  # Dantzig: most positive reduced cost
            for j in range(n + m):
                if not blocked[j] and obj[j] > best_cost:
                    best_cost, enter = obj[j], j
        else:
            for j in range(n + m):  # Bland: guaranteed finite
                if not blocked[j] and obj[j] > 0:
                    enter = j
                    break
        if enter < 0:
            break
        leave, best = -1, None
        for i in range(m):
            coeff = tableau[i][enter]
            if coeff > 0:
                ratio = tableau[i][-1] / coeff
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            raise ArithmeticError("Phase-I objective is bounded; this cannot happen")
        stalled = stalled + 1 if best == 0 else 0
        pivot_row = tableau[leave]
        pivot = pivot_row[enter]
        if pivot != 1:
            tableau[leave] = pivot_row = [v / pivot for v in pivot_row]
        for i in range(m):
            if i != leave and tableau[i][enter]:
                factor = tableau[i][enter]
                row = tableau[i]
                tableau[i] = [row[k] - factor * pivot_row[k] for k in range(width)]
        if obj[enter]:
            factor = obj[enter]
            obj = [obj[k] - factor * pivot_row[k] for k in range(width)]
        if basis[leave] >= n:
            blocked[basis[leave]] = True
        basis[leave] = enter
        iterations += 1

    # current sum of artificial variables: basic ones carry their rhs value
    gap = sum(
        (tableau[i][-1] for i in range(m) if basis[i] >= n), start=zero
    )
    if gap == 0:
        solution = [zero] * n
        for i, var in enumerate(basis):
            if var < n:
                solution[var] = tableau[i][-1]
        return FeasibilityResult(True, solution, None, gap, iterations)

    # dual values: for artificial column j, reduced cost = y_j - 1
    certificate = [flip[i] * (obj[n + i] + one) for i in range(m)]
    return FeasibilityResult(False, None, certificate, gap, iterations)


def verify_farkas(
    rows: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
    certificate: Sequence[Fraction],
) -> bool:
    """Independent exact check that ``certificate`` proves infeasibility."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    if len(certificate) != m:
        return False
    for j in range(n):
        if sum(certificate[i] * rows[i][j] for i in range(m)) > 0:
            return False
    return sum(certificate[i] * rhs[i] for i in range(m)) > 0
