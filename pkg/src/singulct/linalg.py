"""Small exact linear algebra: sparse row reduction, nullspaces, simplex.

Everything here works over ``Fraction`` (or over a prime field when a
modulus is given) so results are exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class SparseEchelon:
    """Incremental row echelon form of sparse rows ``{column: value}``.

    Pivots are taken at the largest column index of each reduced row.  With
    ``modulus`` set, arithmetic is in GF(modulus).
    """

    def __init__(self, modulus: int | None = None):
        self.modulus = modulus
        self.pivots: dict[int, dict[int, object]] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _normalize(self, row: dict) -> dict:
        p = self.modulus
        if p is None:
            return {k: Fraction(v) for k, v in row.items() if v}
        out = {}
        for k, v in row.items():
            v = int(v) % p
            if v:
                out[k] = v
        return out

    def add(self, row: dict) -> bool:
        """Reduce ``row`` against the pivots; return True if it raised the rank."""
        row = self._normalize(row)
        p = self.modulus
        while row:
            lead = max(row)
            piv = self.pivots.get(lead)
            if piv is None:
                c = row[lead]
                if p is None:
                    inv = 1 / c
                    self.pivots[lead] = {k: v * inv for k, v in row.items()}
                else:
                    inv = pow(c, -1, p)
                    self.pivots[lead] = {k: v * inv % p for k, v in row.items()}
                return True
            c = row[lead]
            for k, v in piv.items():
                nv = row.get(k, 0) - c * v
                if p is not None:
                    nv %= p
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        return False


def nullspace(rows: Sequence[Sequence[int]], ncols: int) -> list[list[Fraction]]:
    """Basis of the right nullspace of an integer/rational matrix."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivcols = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivcols.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivcols]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivcols):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


def primitive_integer(v: Iterable[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    v = [Fraction(x) for x in v]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


class LPResult:
    __slots__ = ("status", "value", "x")

    def __init__(self, status: str, value=None, x=None):
        self.status = status
        self.value = value
        self.x = x

    def __repr__(self):
        return f"LPResult({self.status!r}, value={self.value}, x={self.x})"


def solve_lp(c, A_ub=(), b_ub=(), A_eq=(), b_eq=()) -> LPResult:
    """Minimize ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    Exact two-phase tableau simplex over Fractions with Bland's rule, so it
    terminates on degenerate problems.  ``status`` is one of ``optimal``,
    ``infeasible`` or ``unbounded``.
    """
    nx = len(c)
    rows, rhs = [], []
    n_slack = len(A_ub)
    for k, (a, b) in enumerate(zip(A_ub, b_ub)):
        slack = [Fraction(0)] * n_slack
        slack[k] = Fraction(1)
        rows.append([Fraction(x) for x in a] + slack)
        rhs.append(Fraction(b))
    for a, b in zip(A_eq, b_eq):
        rows.append([Fraction(x) for x in a] + [Fraction(0)] * n_slack)
        rhs.append(Fraction(b))
    nv = nx + n_slack
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
    nrow = len(rows)
    # artificial variable per row
    tab = [rows[i] + [Fraction(int(i == j)) for j in range(nrow)] + [rhs[i]] for i in range(nrow)]
    basis = [nv + i for i in range(nrow)]
    ntot = nv + nrow

    phase1 = [Fraction(0)] * nv + [Fraction(1)] * nrow
    _run_simplex(tab, basis, phase1, ntot)
    if _objective(tab, basis, phase1) != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis where possible
    for i, bv in enumerate(basis):
        if bv >= nv:
            j = next((j for j in range(nv) if tab[i][j] != 0), None)
            if j is not None:
                _pivot(tab, basis, i, j)
    keep = [i for i, bv in enumerate(basis) if bv < nv]
    tab = [tab[i][:nv] + [tab[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]

    cost = [Fraction(x) for x in c] + [Fraction(0)] * n_slack
    if not _run_simplex(tab, basis, cost, nv):
        return LPResult("unbounded")
    x = [Fraction(0)] * nv
    for i, bv in enumerate(basis):
        x[bv] = tab[i][-1]
    return LPResult("optimal", sum(ci * xi for ci, xi in zip(cost, x)), x[:nx])


def _objective(tab, basis, cost):
    return sum(cost[bv] * tab[i][-1] for i, bv in enumerate(basis))


def _pivot(tab, basis, r, j):
    inv = Fraction(1) / tab[r][j]
    tab[r] = [x * inv for x in tab[r]]
    for i in range(len(tab)):
        if i != r and tab[i][j] != 0:
            f = tab[i][j]
            tab[i] = [a - f * b for a, b in zip(tab[i], tab[r])]
    basis[r] = j


def _run_simplex(tab, basis, cost, ncols) -> bool:
    """Minimize; returns False if unbounded."""
    while True:
        # reduced costs
        entering = None
        for j in range(ncols):
            if j in basis:
                continue
            rc = cost[j] - sum(cost[bv] * tab[i][j] for i, bv in enumerate(basis))
            if rc < 0:
                entering = j
                break
        if entering is None:
            return True
        best = None
        for i in range(len(tab)):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(tab, basis, best[1], entering)
