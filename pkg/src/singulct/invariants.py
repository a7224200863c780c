"""Singularity invariants: lct of pair ideals, minimal exponents, Milnor numbers.

Two closed families are supported end to end -- the diagonal hypersurface
``x1^d + ... + xn^d`` and the generic ``n x n`` determinant -- together with
any polynomial whose pair ideal ``(f) + J_f^2`` is monomial.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import NamedTuple, Sequence, Union

import numpy as np

from .exact import (
    INF,
    MonomialIdeal,
    Polynomial,
    box_monomials,
    ord_w,
    partial_derivative,
)
from .linalg import SparseEchelon, nullspace, primitive_integer, solve_lp

Value = Union[Fraction, float]  # float only ever means INF


class InconclusiveError(RuntimeError):
    """A bounded search could not certify its answer."""


class UnsupportedError(ValueError):
    """No supported pathway computes the requested invariant."""


class MilnorError(RuntimeError):
    """Colength did not stabilize (non-isolated singularity or ceiling hit)."""


class SearchResult(NamedTuple):
    value: Value
    witness: tuple
    certified: bool


# --------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class IdealPresentation:
    generators: tuple[Polynomial, ...]

    def __post_init__(self):
        gens = []
        for g in self.generators:
            if g not in gens:
                gens.append(g)
        if not gens:
            raise ValueError("ideal presentation needs at least one generator")
        if len({g.nvars for g in gens}) != 1:
            raise ValueError("generators have different variable counts")
        if all(g.is_zero() for g in gens):
            raise ValueError("all generators are zero")
        object.__setattr__(self, "generators", tuple(gens))

    @property
    def nvars(self) -> int:
        return self.generators[0].nvars

    def is_monomial(self) -> bool:
        return all(g.is_zero() or g.is_monomial() for g in self.generators)

    def monomial_ideal(self) -> MonomialIdeal:
        return MonomialIdeal.from_polynomials(self.generators)


@dataclass(frozen=True)
class FamilyDescriptor:
    kind: str
    n: int
    d: int | None = None

    def __post_init__(self):
        if self.kind == "diagonal":
            if self.d is None or self.n < 2 or self.d < 2:
                raise ValueError("diagonal family needs n >= 2 and d >= 2")
        elif self.kind == "determinantal":
            if self.n < 2:
                raise ValueError("determinantal family needs n >= 2")
            if self.d is not None:
                raise ValueError("determinantal family takes no degree")
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")

    @classmethod
    def diagonal(cls, n: int, d: int) -> FamilyDescriptor:
        return cls("diagonal", n, d)

    @classmethod
    def determinantal(cls, n: int) -> FamilyDescriptor:
        return cls("determinantal", n)

    @classmethod
    def parse(cls, text: str) -> FamilyDescriptor:
        """``diag:n,d`` or ``det:n``."""
        m = re.fullmatch(r"\s*diag(?:onal)?:(\d+),(\d+)\s*", text)
        if m:
            return cls.diagonal(int(m.group(1)), int(m.group(2)))
        m = re.fullmatch(r"\s*det(?:erminantal)?:(\d+)\s*", text)
        if m:
            return cls.determinantal(int(m.group(1)))
        raise ValueError(f"cannot parse family {text!r}; expected diag:n,d or det:n")

    @property
    def key(self) -> str:
        return f"diag:{self.n},{self.d}" if self.kind == "diagonal" else f"det:{self.n}"

    def variable_names(self) -> list[str]:
        if self.kind == "diagonal":
            return [f"x{i + 1}" for i in range(self.n)]
        return [f"x{i + 1}{j + 1}" for i in range(self.n) for j in range(self.n)]

    def polynomial(self) -> Polynomial:
        if self.kind == "diagonal":
            return sum(
                (Polynomial.monomial([self.d if j == i else 0 for j in range(self.n)]) for i in range(self.n)),
                Polynomial.zero(self.n),
            )
        n = self.n
        terms = {}
        for perm in permutations(range(n)):
            inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
            e = [0] * (n * n)
            for i, j in enumerate(perm):
                e[i * n + j] = 1
            terms[tuple(e)] = -1 if inversions % 2 else 1
        return Polynomial(n * n, terms)


@dataclass(frozen=True)
class BFunctionRoots:
    """Root multiset of a Bernstein-Sato polynomial, sorted descending."""

    roots: tuple[tuple[Fraction, int], ...]

    def __post_init__(self):
        agg: Counter = Counter()
        for r, mult in self.roots:
            if mult < 1:
                raise ValueError("multiplicities must be positive")
            agg[Fraction(r)] += mult
        if not agg:
            raise ValueError("empty root list")
        if any(r >= 0 for r in agg):
            raise ValueError("b-function roots must be negative")
        object.__setattr__(self, "roots", tuple(sorted(agg.items(), reverse=True)))

    @classmethod
    def yano_diagonal(cls, n: int, d: int) -> BFunctionRoots:
        """Roots of (s+1) * prod over 1 <= b_i <= d-1 of (s + sum b_i / d)."""
        sums = Counter({0: 1})
        for _ in range(n):
            nxt: Counter = Counter()
            for s, c in sums.items():
                for b in range(1, d):
                    nxt[s + b] += c
            sums = nxt
        roots = [(Fraction(-1), 1)] + [(Fraction(-s, d), c) for s, c in sums.items()]
        return cls(tuple(roots))

    @classmethod
    def determinantal(cls, n: int) -> BFunctionRoots:
        return cls(tuple((Fraction(-i), 1) for i in range(1, n + 1)))

    @classmethod
    def monomial(cls, exponent: Sequence[int]) -> BFunctionRoots:
        """prod_i prod_{k=1}^{a_i} (s + k/a_i) for the monomial x^a."""
        roots = [(Fraction(-k, a), 1) for a in exponent if a for k in range(1, a + 1)]
        return cls(tuple(roots))


@dataclass
class InvariantBundle:
    lct_pair: Value
    lct_f: Value
    min_exp: Value | None
    milnor: int | None
    rational_singularities: bool
    provenance: dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "lct_pair": self.lct_pair,
            "lct_f": self.lct_f,
            "min_exp": self.min_exp,
            "milnor": self.milnor,
            "rational_singularities": self.rational_singularities,
            "provenance": dict(sorted(self.provenance.items())),
        }


# --------------------------------------------------------------------------
# ideals

def jacobian_ideal(f: Polynomial) -> IdealPresentation:
    """``[f, df/dx1, ..., df/dxn]``; ``f`` itself is included."""
    if f.is_zero():
        raise ValueError("Jacobian ideal of the zero polynomial")
    return IdealPresentation((f,) + tuple(partial_derivative(f, i) for i in range(f.nvars)))


def _partials(f: Polynomial) -> list[Polynomial]:
    return [g for g in (partial_derivative(f, i) for i in range(f.nvars)) if not g.is_zero()]


def pair_ideal(f: Polynomial) -> IdealPresentation:
    """Generators of ``(f) + J_f^2``, presented as ``(f) + (partials)^2``."""
    if f.is_zero():
        raise ValueError("pair ideal of the zero polynomial")
    parts = _partials(f)
    prods = [parts[i] * parts[j] for i in range(len(parts)) for j in range(i, len(parts))]
    return IdealPresentation((f,) + tuple(prods))


# --------------------------------------------------------------------------
# monomial lct

def _facet_normals(points: Sequence[tuple[int, ...]], n: int) -> set[tuple[int, ...]]:
    """Nonnegative primitive normals of hyperplanes spanned by points and axes.

    Every facet of a Newton polyhedron with a nonnegative normal is cut out
    by such a hyperplane, so the optimal weight is among these.
    """
    out = set()
    for s in range(1, min(n, len(points)) + 1):
        for pts in combinations(points, s):
            base = pts[0]
            diffs = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
            for axes in combinations(range(n), n - s):
                rows = diffs + [[int(j == i) for j in range(n)] for i in axes]
                ns = nullspace(rows, n)
                if len(ns) != 1:
                    continue
                v = primitive_integer(ns[0])
                if all(x <= 0 for x in v):
                    v = tuple(-x for x in v)
                if all(x >= 0 for x in v) and any(v):
                    out.add(v)
    return out


def monomial_lct_search(ideal: MonomialIdeal, bound: int | None = None) -> SearchResult:
    """Minimize ``sum(w) / ord_w(ideal)`` over candidate weights.

    Candidates are the box ``0 <= w_i <= bound`` (default: the largest total
    degree of a generator) together with the facet normals of the Newton
    polyhedron.  The returned value is an upper bound on the lct; it is not
    certified here.
    """
    if ideal.is_zero():
        raise ValueError("lct of the zero ideal")
    if ideal.is_unit():
        return SearchResult(INF, (), True)
    n = ideal.nvars
    gens = np.array(ideal.generators, dtype=np.int64)
    if bound is None:
        bound = int(gens.sum(axis=1).max())
    grid = np.stack(np.meshgrid(*[np.arange(bound + 1)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    normals = sorted(_facet_normals(ideal.generators, n))
    if normals:
        grid = np.concatenate([grid, np.array(normals, dtype=np.int64)])
    grid = grid[grid.any(axis=1)]
    orders = (grid @ gens.T).min(axis=1)
    keep = orders > 0
    grid, orders = grid[keep], orders[keep]
    sums = grid.sum(axis=1)
    approx = sums / orders
    lo = approx.min()
    best = None
    for idx in np.flatnonzero(approx <= lo * (1 + 1e-9)):
        val = Fraction(int(sums[idx]), int(orders[idx]))
        w = tuple(int(x) for x in grid[idx])
        if best is None or val < best[0] or (val == best[0] and (sum(w), w) < (sum(best[1]), best[1])):
            best = (val, w)
    return SearchResult(best[0], best[1], False)


def newton_lct_lp(ideal: MonomialIdeal) -> Value:
    """lct as ``1/t`` with ``t`` minimal such that ``t*(1,...,1)`` is in the Newton polyhedron."""
    if ideal.is_zero():
        raise ValueError("lct of the zero ideal")
    if ideal.is_unit():
        return INF
    n, gens = ideal.nvars, ideal.generators
    k = len(gens)
    # variables: lambda_1..lambda_k, t
    c = [0] * k + [1]
    A_ub = [[g[i] for g in gens] + [-1] for i in range(n)]
    res = solve_lp(c, A_ub, [0] * n, [[1] * k + [0]], [1])
    if res.status != "optimal":
        raise RuntimeError(f"Newton polyhedron LP returned {res.status}")
    return 1 / res.value


def in_scaled_newton_polyhedron(ideal: MonomialIdeal, c: Fraction) -> bool:
    """Whether ``(1,...,1)`` lies in ``c * Newt(ideal)``.

    True certifies ``lct(ideal) >= c``: for every weight ``w`` the point
    ``(1/c)(1,...,1)`` dominates a convex combination of generators, so
    ``ord_w <= sum(w) / c``.
    """
    if c <= 0:
        raise ValueError("scale must be positive")
    n, gens = ideal.nvars, ideal.generators
    t = 1 / Fraction(c)
    A_ub = [[g[i] for g in gens] for i in range(n)]
    res = solve_lp([0] * len(gens), A_ub, [t] * n, [[1] * len(gens)], [1])
    return res.status == "optimal"


def lct_monomial(ideal: MonomialIdeal, bound: int | None = None) -> Value:
    """Exact lct of a monomial ideal: weight search certified by LP feasibility.

    >>> lct_monomial(MonomialIdeal(2, [(2, 0), (0, 3)]))
    Fraction(5, 6)
    """
    res = monomial_lct_search(ideal, bound)
    if res.value == INF:
        return INF
    if not in_scaled_newton_polyhedron(ideal, res.value):
        raise InconclusiveError(f"weight search bound too small for {ideal}")
    return res.value


# --------------------------------------------------------------------------
# diagonal family

def lct_diagonal_pair(n: int, d: int) -> Fraction:
    """``min{(n+d-2)/(2d-2), n/d}`` cross-checked against the lattice search."""
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    value = min(Fraction(n + d - 2, 2 * d - 2), Fraction(n, d))
    raw = raw_min_diagonal(n, d, d + 2)
    if raw.value != value:
        raise AssertionError(f"closed form {value} disagrees with search {raw.value} at n={n}, d={d}")
    return value


def raw_min_diagonal(n: int, d: int, bound: int) -> SearchResult:
    """Minimize ``(n b + a) / min{d b + a, (2d-2) b}`` over ``0 <= a, b <= bound``, ``b >= 1``."""
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    if bound < 1:
        raise ValueError("bound must be positive")
    best = None
    for b in range(1, bound + 1):
        for a in range(bound + 1):
            val = Fraction(n * b + a, min(d * b + a, (2 * d - 2) * b))
            if best is None or val < best[0]:
                best = (val, (a, b))
    closed = min(Fraction(n + d - 2, 2 * d - 2), Fraction(n, d))
    return SearchResult(best[0], best[1], best[0] <= closed)


# --------------------------------------------------------------------------
# determinantal family

def _check_partition(lam: Sequence[int]) -> None:
    if any(x < 0 for x in lam):
        raise ValueError("partition entries must be nonnegative")
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise ValueError("partition must be weakly decreasing")


def orbit_codimension(lam: Sequence[int]) -> int:
    _check_partition(lam)
    return sum(x * (2 * i - 1) for i, x in enumerate(lam, start=1))


def orbit_contact_order(lam: Sequence[int]) -> int:
    _check_partition(lam)
    return min(sum(lam), 2 * sum(lam[1:]))


def _partitions(n: int, total: int, cap: int | None = None):
    """Weakly decreasing n-tuples with sum <= total, ordered by sum then lex descending."""
    def rec(k, remaining, cap):
        if k == 0:
            yield ()
            return
        for x in range(min(cap, remaining), -1, -1):
            for rest in rec(k - 1, remaining - x, x):
                yield (x,) + rest

    for s in range(total + 1):
        for lam in rec(n, s, s if cap is None else cap):
            if sum(lam) == s:
                yield lam


def determinantal_lower_bound(n: int) -> Fraction:
    """Certified lower bound 2 for codim/contact over partitions with ``lambda_2 > 0``.

    Checks that ``sum (2i-1) lambda_i - 4 sum_{i>=2} lambda_i`` is a
    nonnegative combination of the cone inequalities ``lambda_i -
    lambda_{i+1} >= 0`` and ``lambda_n >= 0`` (telescoping coefficients).
    Together with ``contact <= 2 sum_{i>=2} lambda_i`` this gives ratio >= 2.
    """
    form = [Fraction(2 * i - 1 - (4 if i >= 2 else 0)) for i in range(1, n + 1)]
    coeffs = []
    acc = Fraction(0)
    for a in form:
        acc += a
        coeffs.append(acc)
    if any(c < 0 for c in coeffs):
        raise AssertionError("lower-bound certificate failed")
    return Fraction(2)


def lct_determinantal_pair(n: int, bound: int = 4) -> SearchResult:
    """Minimize codimension / contact order over partitions with ``lambda_2 > 0``."""
    if n < 2:
        raise ValueError("need n >= 2")
    if bound < 1:
        raise ValueError("bound must be positive")
    best = None
    for lam in _partitions(n, bound * n):
        if lam[1] == 0:
            continue
        val = Fraction(orbit_codimension(lam), orbit_contact_order(lam))
        if best is None or val < best[0]:
            best = (val, lam)
    lower = determinantal_lower_bound(n)
    return SearchResult(best[0], best[1], best[0] == lower)


# --------------------------------------------------------------------------
# minimal exponents

def min_exp_from_bfunction(roots: BFunctionRoots) -> Value:
    """Negative of the largest root of ``b_f(s)/(s+1)``; ``INF`` if nothing remains."""
    remaining = []
    found = False
    for r, mult in roots.roots:
        if r == -1 and not found:
            found = True
            mult -= 1
        if mult:
            remaining.append(r)
    if not found:
        raise ValueError("-1 is not a root of the b-function")
    if not remaining:
        return INF
    return -max(remaining)


def min_exp_family(fam: FamilyDescriptor) -> Fraction:
    if fam.kind == "diagonal":
        return min_exp_from_bfunction(BFunctionRoots.yano_diagonal(fam.n, fam.d))
    return min_exp_from_bfunction(BFunctionRoots.determinantal(fam.n))


def lct_from_min_exp(alpha: Value) -> Value:
    if alpha <= 0:
        raise ValueError("minimal exponent must be positive")
    return min(alpha, Fraction(1))


# --------------------------------------------------------------------------
# Milnor number

def _colength(gens: Sequence[Polynomial], k: int, modulus: int | None) -> int:
    n = gens[0].nvars
    box = box_monomials(n, k)
    index = {m: i for i, m in enumerate(box)}
    ech = SparseEchelon(modulus)
    for g in gens:
        terms = g.terms
        for m in box:
            row = {}
            for e, c in terms.items():
                prod = tuple(a + b for a, b in zip(m, e))
                if max(prod) < k:
                    row[index[prod]] = c if modulus is None else c.numerator * pow(c.denominator, -1, modulus)
            if row:
                ech.add(row)
    return len(box) - ech.rank


_MILNOR_PRIMES = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563, 2147483549)


def milnor_number(
    f: Polynomial,
    k_max: int = 32,
    max_box: int = 200_000,
    modular: bool = False,
    seed: int = 0,
) -> int:
    """Local Milnor number at the origin: colength of the partials.

    Computes the colength of ``(df/dx_i) + (x_1^K, ..., x_n^K)`` for
    ``K = 1, 2, ...``.  Equal values at consecutive ``K`` put every
    ``x_i^K`` in the local ideal (Nakayama), so the stabilized value is the
    local colength.

    With ``modular=True`` ranks are taken modulo two distinct 31-bit primes
    that must agree, and the stabilized value is spot-checked exactly.
    """
    n = f.nvars
    origin = (0,) * n
    parts = _partials(f)
    if f.constant_term() != 0:
        raise ValueError("origin is not on the hypersurface")
    if any(g.terms.get(origin, 0) != 0 for g in parts) or not parts:
        raise ValueError("hypersurface is smooth at the origin")
    primes = None
    if modular:
        primes = random.Random(seed).sample(_MILNOR_PRIMES, 2)
        bad = [p for p in primes if any(c.denominator % p == 0 for g in parts for c in g.terms.values())]
        if bad:
            modular = False
    prev = None
    for k in range(1, k_max + 1):
        if k**n > max_box:
            break
        if modular:
            vals = {_colength(parts, k, p) for p in primes}
            cur = vals.pop() if len(vals) == 1 else _colength(parts, k, None)
        else:
            cur = _colength(parts, k, None)
        if prev is not None and cur == prev:
            if modular and _colength(parts, k, None) != cur:
                return milnor_number(f, k_max, max_box, modular=False)
            return cur
        prev = cur
    raise MilnorError("colength did not stabilize; singularity is not isolated or the ceiling is too low")


# --------------------------------------------------------------------------
# pathways and classification

def diagonal_descriptor(f: Polynomial) -> FamilyDescriptor | None:
    """Recognize ``sum c_i x_i^d`` (all variables, all ``c_i != 0``, ``n, d >= 2``)."""
    n = f.nvars
    if n < 2 or len(f.terms) != n:
        return None
    degs = set()
    seen = set()
    for e in f.terms:
        nz = [i for i, k in enumerate(e) if k]
        if len(nz) != 1:
            return None
        seen.add(nz[0])
        degs.add(e[nz[0]])
    if len(seen) != n or len(degs) != 1:
        return None
    d = degs.pop()
    return FamilyDescriptor.diagonal(n, d) if d >= 2 else None


def lct_pair_with_pathway(f: Polynomial) -> tuple[Value, str]:
    """lct of ``(f) + J_f^2`` and the pathway label used to compute it."""
    fam = diagonal_descriptor(f)
    if fam is not None:
        return lct_diagonal_pair(fam.n, fam.d), "closed-form"
    pres = pair_ideal(f)
    if pres.is_monomial():
        return lct_monomial(pres.monomial_ideal()), "search"
    raise UnsupportedError("pair ideal is not monomial and f is not a recognized family")


def lct_pair_family(fam: FamilyDescriptor, bound: int = 4) -> Fraction:
    if fam.kind == "diagonal":
        return lct_diagonal_pair(fam.n, fam.d)
    res = lct_determinantal_pair(fam.n, bound)
    if not res.certified:
        raise InconclusiveError(f"partition bound {bound} too small for n={fam.n}")
    return res.value


@dataclass
class Classification:
    rational: bool
    certificate: dict

    def __bool__(self):
        return self.rational


def classify_rational_singularities(
    target: FamilyDescriptor | IdealPresentation | MonomialIdeal,
) -> Classification:
    """Rational singularities iff ``lct((f) + J_f^2) > 1``.

    When the minimal exponent is known the certificate also records the
    independent check ``min_exp > 1``.
    """
    alpha = None
    if isinstance(target, FamilyDescriptor):
        lct = lct_pair_family(target)
        pathway = "closed-form" if target.kind == "diagonal" else "search"
        alpha = min_exp_family(target)
    elif isinstance(target, IdealPresentation):
        if not target.is_monomial():
            raise UnsupportedError("only monomial pair ideals are supported")
        lct = lct_monomial(target.monomial_ideal())
        pathway = "search"
    elif isinstance(target, MonomialIdeal):
        lct = lct_monomial(target)
        pathway = "search"
    else:
        raise UnsupportedError(f"unsupported input {type(target).__name__}")
    rational = lct > 1
    cert = {"lct_pair": lct, "pathway": pathway}
    if alpha is not None:
        cert["min_exp"] = alpha
        cert["min_exp_agrees"] = (alpha > 1) == rational
    return Classification(rational, cert)


def _monomial_min_exp(f: Polynomial) -> Value | None:
    if not f.is_monomial():
        return None
    (e,) = f.terms
    if not any(e):
        return None
    return min_exp_from_bfunction(BFunctionRoots.monomial(e))


def family_bundle(fam: FamilyDescriptor, milnor_box: int = 4096) -> InvariantBundle:
    lct_pair = lct_pair_family(fam)
    alpha = min_exp_family(fam)
    prov = {
        "lct_pair": "closed-form" if fam.kind == "diagonal" else "search",
        "lct_f": "closed-form",
        "min_exp": "closed-form",
        "rational_singularities": "closed-form" if fam.kind == "diagonal" else "search",
    }
    milnor = None
    if fam.kind == "diagonal":
        if fam.d**fam.n <= milnor_box:
            milnor = milnor_number(fam.polynomial())
            prov["milnor"] = "colength"
        else:
            milnor = (fam.d - 1) ** fam.n
            prov["milnor"] = "closed-form"
    else:
        prov["milnor"] = "unavailable"
    return InvariantBundle(
        lct_pair=lct_pair,
        lct_f=lct_from_min_exp(alpha),
        min_exp=alpha,
        milnor=milnor,
        rational_singularities=lct_pair > 1,
        provenance=prov,
    )


def polynomial_bundle(f: Polynomial) -> InvariantBundle:
    """Invariants of an arbitrary polynomial through whichever pathway applies."""
    fam = diagonal_descriptor(f)
    if fam is not None:
        return family_bundle(fam)
    lct_pair, path = lct_pair_with_pathway(f)
    prov = {"lct_pair": path, "rational_singularities": path}
    alpha = INF if lct_pair == INF else _monomial_min_exp(f)
    if alpha is not None:
        prov["min_exp"] = "closed-form"
        lct_f = lct_from_min_exp(alpha)
        prov["lct_f"] = "closed-form"
    else:
        prov["min_exp"] = "unavailable"
        lct_f = min(lct_pair, Fraction(1))
        prov["lct_f"] = path
    milnor = None
    try:
        milnor = milnor_number(f)
        prov["milnor"] = "colength"
    except (ValueError, MilnorError):
        prov["milnor"] = "unavailable"
    return InvariantBundle(
        lct_pair=lct_pair,
        lct_f=lct_f,
        min_exp=alpha,
        milnor=milnor,
        rational_singularities=lct_pair > 1,
        provenance=prov,
    )
