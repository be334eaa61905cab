"""Exact two-phase simplex over the rationals (Bland's rule).

Solves ``min c.w  s.t.  A w = b, w >= 0``. Infeasible problems come back with
a Farkas vector ``h`` satisfying ``h.A_j >= 0`` for every column and
``h.b < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

try:  # gmpy2 rationals are a drop-in, much faster scalar
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded"
    x: Optional[list] = None
    objective: Optional[Fraction] = None
    farkas: Optional[list] = None


class _Tableau:
    def __init__(self, A, b):
        self.m = len(A)
        self.n = len(A[0]) if A else 0
        self.rows = []
        self.flipped = []
        for i in range(self.m):
            row = [_Q(v) for v in A[i]]
            rhs = _Q(b[i])
            flip = rhs < 0
            if flip:
                row = [-v for v in row]
                rhs = -rhs
            art = [_Q(0)] * self.m
            art[i] = _Q(1)
            self.rows.append(row + art + [rhs])
            self.flipped.append(flip)
        self.basis = [self.n + i for i in range(self.m)]
        self.width = self.n + self.m

    def pivot(self, r, c):
        prow = self.rows[r]
        pv = prow[c]
        if pv != 1:
            prow = [v / pv for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        self.basis[r] = c

    def reduced_costs(self, cost):
        # r_j = c_j - c_B B^-1 A_j over the current tableau
        red = list(cost) + [_Q(0)]
        for i, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.rows[i]
                for j in range(self.width + 1):
                    if row[j]:
                        red[j] -= cb * row[j]
        return red

    def run(self, cost, allowed):
        """Bland's-rule simplex on the current basis. Returns False if unbounded."""
        red = self.reduced_costs(cost)
        while True:
            enter = next((j for j in allowed if red[j] < 0), None)
            if enter is None:
                return True
            best, leave = None, None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return False
            self.pivot(leave, enter)
            prow = self.rows[leave]
            f = red[enter]
            for j in range(self.width + 1):
                if prow[j]:
                    red[j] -= f * prow[j]


def solve(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    t = _Tableau(A, b)
    n, m = t.n, t.m
    phase1 = [_Q(0)] * n + [_Q(1)] * m
    t.run(phase1, range(n))
    infeas = sum((t.rows[i][-1] for i, bv in enumerate(t.basis) if bv >= n), _Q(0))
    if infeas > 0:
        red = t.reduced_costs(phase1)
        # phase-1 duals y_i = 1 - r_{artificial i}; certificate h = -y on the original rows
        farkas = []
        for i in range(m):
            y = 1 - red[n + i]
            if t.flipped[i]:
                y = -y
            farkas.append(_to_fraction(-y))
        return LPResult("infeasible", farkas=farkas)
    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if t.basis[i] >= n:
            col = next((j for j in range(n) if t.rows[i][j]), None)
            if col is not None:
                t.pivot(i, col)
    cost = [_Q(v) for v in c] + [_Q(0)] * m
    if any(cost[:n]):
        if not t.run(cost, range(n)):
            return LPResult("unbounded")
    x = [Fraction(0)] * n
    for i, bv in enumerate(t.basis):
        if bv < n:
            x[bv] = _to_fraction(t.rows[i][-1])
    obj = sum((Fraction(v) * xi for v, xi in zip(c, x) if v), Fraction(0))
    return LPResult("optimal", x=x, objective=obj)


def feasible_point(A, b) -> LPResult:
    """Find ``w >= 0`` with ``A w = b`` or a Farkas certificate."""
    return solve([0] * (len(A[0]) if A else 0), A, b)
