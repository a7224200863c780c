"""Exact arithmetic substrate: sparse polynomials, monomial ideals, weights.

Coefficients are :class:`fractions.Fraction` throughout.  The positive
infinity used for the order of the zero ideal (and for thresholds of the
unit ideal) is ``math.inf``; it compares totally against Fractions.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

INF = math.inf

Exponent = tuple[int, ...]


class ParseError(ValueError):
    """Malformed polynomial text; ``pos`` is the 0-based offending offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def grlex_key(e: Exponent) -> tuple:
    return (sum(e), e)


class Polynomial:
    """Immutable sparse multivariate polynomial with rational coefficients."""

    __slots__ = ("_n", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        clean: dict[Exponent, Fraction] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != nvars or any(k < 0 for k in e):
                raise ValueError(f"bad exponent vector {e} for {nvars} variables")
            c = Fraction(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
                if not clean[e]:
                    del clean[e]
        self._n = nvars
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, nvars: int) -> Polynomial:
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c) -> Polynomial:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> Polynomial:
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff=1) -> Polynomial:
        return cls(len(exponent), {tuple(exponent): coeff})

    @property
    def nvars(self) -> int:
        return self._n

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        """Terms in descending graded-lex order."""
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def has_integer_coefficients(self) -> bool:
        return all(c.denominator == 1 for c in self._terms.values())

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self._n, Fraction(0))

    # arithmetic
    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other._n != self._n:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self._n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self._n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self._n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self._n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Polynomial.constant(self._n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self._n, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._n, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self._n}, {self.to_string()!r})"

    def __str__(self):
        return self.to_string()

    def to_string(self, names: Sequence[str] | None = None) -> str:
        names = list(names) if names is not None else default_names(self._n)
        if len(names) != self._n:
            raise ValueError("wrong number of variable names")
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def default_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"(\d+\.\d*|\d*\.\d+)|(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.)")


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m.group(1) is not None:
            toks.append(("float", m.group(1), pos))
        elif m.group(2) is not None:
            toks.append(("int", int(m.group(2)), pos))
        elif m.group(3) is not None:
            toks.append(("name", m.group(3), pos))
        else:
            ch = m.group(4)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", pos)
            toks.append((ch, ch, pos))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, names: Sequence[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.names = list(names)
        self.index = {v: k for k, v in enumerate(self.names)}
        self.n = len(self.names)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        p = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {self.peek()[1]!r}", pos)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if q.degree() > 0 or q.is_zero():
                    raise ParseError("division only by a nonzero constant", pos)
                p = p * Polynomial.constant(self.n, 1 / q.constant_term())
        return p

    def unary(self) -> Polynomial:
        kind = self.peek()[0]
        if kind == "-":
            self.take()
            return -self.unary()
        if kind == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise ParseError("exponent must be a nonnegative integer literal", pos)
            base = base**val
            if self.peek()[0] == "^":
                raise ParseError("chained exponent", self.peek()[2])
        return base

    def atom(self) -> Polynomial:
        kind, val, pos = self.take()
        if kind == "int":
            return Polynomial.constant(self.n, val)
        if kind == "name":
            if val not in self.index:
                raise ParseError(f"unknown variable {val!r}", pos)
            return Polynomial.variable(self.n, self.index[val])
        if kind == "(":
            p = self.expr()
            k2, _, pos2 = self.take()
            if k2 != ")":
                raise ParseError("expected ')'", pos2)
            return p
        if kind == "float":
            raise ParseError("non-integer literal", pos)
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {val!r}", pos)


def parse_polynomial(text: str, names: Sequence[str]) -> Polynomial:
    """Parse ``text`` over the variables ``names``.

    Grammar: integer literals, identifiers, ``+ - * ^``, parentheses and
    unary minus; ``^`` binds tightest and takes an integer literal.  Division
    by a nonzero constant is also accepted so that rational coefficients
    survive a print/parse round trip.

    >>> parse_polynomial("x^2 + y^3", ["x", "y"]).terms
    {(2, 0): Fraction(1, 1), (0, 3): Fraction(1, 1)}
    """
    if not names:
        raise ValueError("at least one variable name is required")
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable names")
    return _Parser(text, names).parse()


# --------------------------------------------------------------------------
# calculus and evaluation

def partial_derivative(f: Polynomial, i: int) -> Polynomial:
    if not 0 <= i < f.nvars:
        raise IndexError(f"variable index {i} out of range for {f.nvars} variables")
    out = {}
    for e, c in f.terms.items():
        k = e[i]
        if k:
            e2 = list(e)
            e2[i] = k - 1
            out[tuple(e2)] = c * k
    return Polynomial(f.nvars, out)


def is_prime(p: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit inputs."""
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def prime_power_decompose(q: int) -> tuple[int, int]:
    """Return ``(p, m)`` with ``q == p**m``; raise if ``q`` is not a prime power."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    for p in range(2, math.isqrt(q) + 1):
        if q % p == 0:
            m = 0
            while q % p == 0:
                q //= p
                m += 1
            if q != 1:
                raise ValueError("modulus is not a prime power")
            return p, m
    return q, 1


def eval_mod(f: Polynomial, point: Sequence[int], modulus: int) -> int:
    """``f(point) mod modulus`` with Python big integers."""
    prime_power_decompose(modulus)
    if not f.has_integer_coefficients():
        raise ValueError("evalMod needs integer coefficients")
    if len(point) != f.nvars:
        raise ValueError("point has wrong dimension")
    if any(not 0 <= x < modulus for x in point):
        raise ValueError("point entries must lie in [0, modulus)")
    total = 0
    for e, c in f.terms.items():
        t = c.numerator % modulus
        for x, k in zip(point, e):
            if k:
                t = t * pow(x, k, modulus) % modulus
        total = (total + t) % modulus
    return total


# --------------------------------------------------------------------------
# monomial ideals and weights

def _divides(a: Exponent, b: Exponent) -> bool:
    return all(x <= y for x, y in zip(a, b))


class MonomialIdeal:
    """Monomial ideal stored by its minimal generators.

    An empty generator set is the zero ideal (``is_zero``).
    """

    __slots__ = ("nvars", "generators")

    def __init__(self, nvars: int, generators: Iterable[Sequence[int]] = ()):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        gens = {tuple(int(k) for k in g) for g in generators}
        for g in gens:
            if len(g) != nvars or any(k < 0 for k in g):
                raise ValueError(f"bad exponent vector {g}")
        minimal = [g for g in gens if not any(h != g and _divides(h, g) for h in gens)]
        self.nvars = nvars
        self.generators: tuple[Exponent, ...] = tuple(sorted(minimal, key=grlex_key))

    @classmethod
    def from_polynomials(cls, polys: Sequence[Polynomial]) -> MonomialIdeal:
        """Ideal of single-term polynomials; raises if any has several terms."""
        if not polys:
            raise ValueError("no generators")
        n = polys[0].nvars
        gens = []
        for p in polys:
            if p.is_zero():
                continue
            if not p.is_monomial():
                raise ValueError(f"{p} is not a monomial")
            gens.append(next(iter(p.terms)))
        return cls(n, gens)

    def is_zero(self) -> bool:
        return not self.generators

    def is_unit(self) -> bool:
        return (0,) * self.nvars in self.generators

    def contains(self, e: Sequence[int]) -> bool:
        return any(_divides(g, tuple(e)) for g in self.generators)

    def __mul__(self, other: MonomialIdeal) -> MonomialIdeal:
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        return MonomialIdeal(
            self.nvars,
            (tuple(a + b for a, b in zip(g, h)) for g in self.generators for h in other.generators),
        )

    def __add__(self, other: MonomialIdeal) -> MonomialIdeal:
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        return MonomialIdeal(self.nvars, self.generators + other.generators)

    def __eq__(self, other):
        if not isinstance(other, MonomialIdeal):
            return NotImplemented
        return self.nvars == other.nvars and self.generators == other.generators

    def __hash__(self):
        return hash((self.nvars, self.generators))

    def __repr__(self):
        return f"MonomialIdeal({self.nvars}, {list(self.generators)})"


class WeightVector(tuple):
    """Nonnegative integer weights, not all zero (a monomial valuation)."""

    def __new__(cls, weights: Iterable[int]):
        w = tuple(int(x) for x in weights)
        if not w or any(x < 0 for x in w) or not any(w):
            raise ValueError(f"invalid weight vector {w}")
        return super().__new__(cls, w)

    def log_discrepancy(self) -> int:
        return sum(self)


def ord_w(w: Sequence[int], target: MonomialIdeal | Polynomial):
    """Weighted order of an ideal or polynomial; ``INF`` for zero."""
    if isinstance(target, MonomialIdeal):
        exps: Iterable[Exponent] = target.generators
        n = target.nvars
    elif isinstance(target, Polynomial):
        exps = target.terms.keys()
        n = target.nvars
    else:
        raise TypeError("target must be a MonomialIdeal or Polynomial")
    if len(w) != n:
        raise ValueError("dimension mismatch between weight and target")
    best = INF
    for e in exps:
        v = sum(a * b for a, b in zip(w, e))
        if v < best:
            best = v
    return best


def box_monomials(nvars: int, k: int) -> list[Exponent]:
    """All exponent vectors with entries ``< k``, in graded-lex order."""
    return sorted(product(range(k), repeat=nvars), key=grlex_key)
