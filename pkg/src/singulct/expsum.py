"""Exact residue histograms and exponential sums modulo prime powers.

Enumeration is exact integer counting, vectorized with numpy over
contiguous ranges of the point lattice ``(Z/p^m)^n``.  Ranges are
independent, so they can be farmed out to worker processes and merged by
integer addition; the result does not depend on the partitioning.  Complex
values are evaluated afterwards from the counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact import INF, Polynomial, is_prime
from .invariants import IdealPresentation, pair_ideal

DEFAULT_BUDGET = 10**8
CHUNK = 1 << 20
# int64 products of two residues must not overflow
MAX_MODULUS = 3_037_000_499


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"enumeration needs {required} points, budget is {budget}")
        self.required = required
        self.budget = budget


def resolve_budget(budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get("SINGULCT_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class PrimePowerModulus:
    p: int
    m: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.m < 1:
            raise ValueError("exponent m must be positive")
        if self.p**self.m > MAX_MODULUS:
            raise ValueError(f"modulus {self.p}^{self.m} exceeds {MAX_MODULUS}")

    @property
    def value(self) -> int:
        return self.p**self.m


@dataclass(frozen=True)
class SubschemeSpec:
    """Closed subscheme Z given by generators; membership is tested mod p."""

    generators: tuple[Polynomial, ...] = ()
    name: str = "custom"

    @classmethod
    def full_space(cls) -> SubschemeSpec:
        return cls((), "full")

    @classmethod
    def hypersurface_of(cls, f: Polynomial) -> SubschemeSpec:
        return cls((f,), "hyp")

    @classmethod
    def origin_only(cls, nvars: int) -> SubschemeSpec:
        return cls(tuple(Polynomial.variable(nvars, i) for i in range(nvars)), "origin")

    @classmethod
    def preset(cls, name: str, f: Polynomial) -> SubschemeSpec:
        if name in ("full", "fullSpace"):
            return cls.full_space()
        if name in ("hyp", "hypersurfaceOfF"):
            return cls.hypersurface_of(f)
        if name in ("origin", "originOnly"):
            return cls.origin_only(f.nvars)
        raise ValueError(f"unknown subscheme preset {name!r}")


# --------------------------------------------------------------------------
# vectorized enumeration

def _compile(f: Polynomial, modulus: int) -> list[tuple[int, tuple[int, ...]]]:
    if not f.has_integer_coefficients():
        raise ValueError("exponential sums need integer coefficients")
    return [(int(c.numerator) % modulus, e) for e, c in f.items()]


def _evaluate(compiled, coords, modulus, cache) -> np.ndarray:
    acc = np.zeros(coords[0].shape, dtype=np.int64)
    for c, e in compiled:
        if c == 0:
            continue
        term = np.full(coords[0].shape, c, dtype=np.int64)
        for i, k in enumerate(e):
            if k:
                term = term * _power(coords, i, k, modulus, cache) % modulus
        acc = (acc + term) % modulus
    return acc


def _power(coords, i, k, modulus, cache):
    key = (i, k)
    if key not in cache:
        if k == 1:
            cache[key] = coords[i] % modulus
        else:
            cache[key] = _power(coords, i, k - 1, modulus, cache) * (coords[i] % modulus) % modulus
    return cache[key]


def _coords(start: int, stop: int, modulus: int, n: int) -> list[np.ndarray]:
    idx = np.arange(start, stop, dtype=np.int64)
    return [(idx // modulus ** (n - 1 - i)) % modulus for i in range(n)]


def _zmask_table(z: SubschemeSpec, p: int, n: int) -> np.ndarray | None:
    if not z.generators:
        return None
    coords = _coords(0, p**n, p, n)
    ok = np.ones(p**n, dtype=bool)
    for g in z.generators:
        if g.nvars != n:
            raise ValueError("subscheme generator has the wrong variable count")
        ok &= _evaluate(_compile(g, p), coords, p, {}) == 0
    return ok


def _admissible(coords, table, p, n):
    if table is None:
        return None
    flat = np.zeros(coords[0].shape, dtype=np.int64)
    for i in range(n):
        flat = flat * p + coords[i] % p
    return table[flat]


def _task(args):
    kind, compiled, modulus, p, n, table, start, stop, level = args
    coords = _coords(start, stop, modulus, n)
    mask = _admissible(coords, table, p, n)
    cache: dict = {}
    if kind == "hist":
        vals = _evaluate(compiled[0], coords, modulus, cache)
        if mask is not None:
            vals = vals[mask]
        return np.bincount(vals, minlength=modulus).astype(np.int64)
    if kind == "count":
        ok = np.ones(coords[0].shape, dtype=bool) if mask is None else mask
        q = p**level
        for comp in compiled:
            ok &= _evaluate(comp, coords, modulus, cache) % q == 0
        return int(ok.sum())
    if kind == "loc":
        fvals = _evaluate(compiled[0], coords, modulus, cache)
        q = p**level
        f_ok = fvals % q == 0
        pair_ok = np.ones(coords[0].shape, dtype=bool)
        for comp in compiled[1:]:
            pair_ok &= _evaluate(comp, coords, modulus, cache) % q == 0
        if mask is not None:
            fvals, f_ok, pair_ok = fvals[mask], f_ok[mask], pair_ok[mask]
        return np.stack([
            np.bincount(fvals, minlength=modulus),
            np.bincount(fvals[f_ok], minlength=modulus),
            np.bincount(fvals[pair_ok], minlength=modulus),
        ]).astype(np.int64)
    raise ValueError(kind)


def _run(kind, compiled, mod: PrimePowerModulus, n, z, budget, workers, level=0):
    total = mod.value**n
    budget = resolve_budget(budget)
    if total > budget:
        raise BudgetExceeded(total, budget)
    table = _zmask_table(z, mod.p, n)
    tasks = [
        (kind, compiled, mod.value, mod.p, n, table, s, min(s + CHUNK, total), level)
        for s in range(0, total, CHUNK)
    ]
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_task, tasks))
    else:
        parts = [_task(t) for t in tasks]
    out = parts[0]
    for part in parts[1:]:
        out = out + part
    return out


# --------------------------------------------------------------------------
# public operations

@dataclass(frozen=True)
class ResidueHistogram:
    modulus: PrimePowerModulus
    nvars: int
    counts: np.ndarray = field(repr=False, compare=False)

    def total(self) -> int:
        return int(self.counts.sum())


def residue_histogram(
    f: Polynomial,
    mod: PrimePowerModulus,
    z: SubschemeSpec | None = None,
    budget: int | None = None,
    workers: int = 1,
) -> ResidueHistogram:
    """Counts ``c_r`` of admissible points ``x mod p^m`` with ``f(x) = r``.

    A point is admissible when its reduction mod p lies on ``z``.
    """
    z = z or SubschemeSpec.full_space()
    counts = _run("hist", [_compile(f, mod.value)], mod, f.nvars, z, budget, workers)
    return ResidueHistogram(mod, f.nvars, counts)


def cyclotomic_zero(coeffs: np.ndarray, p: int) -> bool:
    """Whether ``sum_j coeffs[j] * zeta^j`` vanishes for a primitive ``p^m``-th root.

    The integer relations among the powers of ``zeta`` are spanned by the
    coset sums ``sum_k zeta^(t + k p^(m-1))``, so the element is zero exactly
    when the coefficients are constant on each coset of ``p^(m-1) Z``.
    """
    q = len(coeffs)
    rows = np.asarray(coeffs).reshape(p, q // p)
    return bool((rows == rows[0]).all())


def _twisted(counts: np.ndarray, a: int, modulus: int) -> np.ndarray:
    out = np.zeros(modulus, dtype=np.int64)
    r = np.arange(modulus, dtype=np.int64)
    np.add.at(out, (a * r) % modulus, counts)
    return out


def _evaluate_sum(coeffs: np.ndarray, modulus: int, scale: int) -> complex:
    nz = np.flatnonzero(coeffs)
    angles = 2 * np.pi * (nz / modulus)
    w = coeffs[nz].astype(np.float64)
    re = math.fsum((w * np.cos(angles)).tolist())
    im = math.fsum((w * np.sin(angles)).tolist())
    return complex(re / scale, im / scale)


@dataclass(frozen=True)
class ExpSumValue:
    histogram: ResidueHistogram = field(repr=False)
    twist: int
    value: complex
    exact_zero: bool

    @property
    def abs(self) -> float:
        return 0.0 if self.exact_zero else abs(self.value)


def exp_sum_from_histogram(hist: ResidueHistogram, twist: int = 1) -> ExpSumValue:
    """``p^(-mn) sum_r c_r exp(2 pi i a r / p^m)``.

    Terms are accumulated in increasing order of ``a*r mod p^m`` with
    correctly rounded summation, so the value is reproducible bit for bit;
    the absolute error is below ``p^m * 2^-50``.
    """
    mod = hist.modulus
    if twist % mod.p == 0:
        raise ValueError(f"twist {twist} is not a unit mod {mod.p}")
    coeffs = _twisted(hist.counts, twist % mod.value, mod.value)
    zero = cyclotomic_zero(coeffs, mod.p)
    value = 0j if zero else _evaluate_sum(coeffs, mod.value, mod.value**hist.nvars)
    return ExpSumValue(hist, twist, value, zero)


def exp_sum(
    f: Polynomial,
    mod: PrimePowerModulus,
    z: SubschemeSpec | None = None,
    twist: int = 1,
    budget: int | None = None,
) -> ExpSumValue:
    if twist % mod.p == 0:
        raise ValueError(f"twist {twist} is not a unit mod {mod.p}")
    return exp_sum_from_histogram(residue_histogram(f, mod, z, budget), twist)


def point_count(
    gens: IdealPresentation | Sequence[Polynomial],
    mod: PrimePowerModulus,
    z: SubschemeSpec | None = None,
    budget: int | None = None,
    workers: int = 1,
) -> int:
    """Number of ``x mod p^j`` (``j = mod.m``) where every generator vanishes mod ``p^j``."""
    polys = gens.generators if isinstance(gens, IdealPresentation) else tuple(gens)
    if not polys:
        raise ValueError("no generators")
    z = z or SubschemeSpec.full_space()
    compiled = [_compile(g, mod.value) for g in polys]
    return int(_run("count", compiled, mod, polys[0].nvars, z, budget, workers, level=mod.m))


def default_twists(p: int, m: int) -> list[int]:
    q = p**m
    if q <= 256:
        return [a for a in range(1, q) if a % p]
    return list(range(1, min(p - 1, 8) + 1))


def resolve_twists(p: int, m: int, choice) -> list[int]:
    """``None`` for the default rule, ``"all"`` for every unit, or ``k`` for the first ``k`` units."""
    if choice is None:
        return default_twists(p, m)
    q = p**m
    if choice == "all":
        return [a for a in range(1, q) if a % p]
    k = int(choice)
    if k < 1:
        raise ValueError("twist count must be positive")
    out = []
    a = 1
    while len(out) < k and a < q:
        if a % p:
            out.append(a)
        a += 1
    return out


@dataclass(frozen=True)
class DecayRecord:
    p: int
    m: int
    twists: tuple[int, ...]
    max_abs: float
    exponent: float
    all_exact_zero: bool


@dataclass
class DecayProfile:
    records: list[DecayRecord]
    sigma_hat_by_prime: dict[int, float]
    sigma_hat: float

    def record(self, p: int, m: int) -> DecayRecord:
        return next(r for r in self.records if r.p == p and r.m == m)


def decay_exponent(max_abs: float, p: int, m: int, all_zero: bool) -> float:
    if all_zero:
        return INF
    if max_abs <= 0:
        return INF
    return max(0.0, -math.log(max_abs, p) / m)


def decay_profile(
    f: Polynomial,
    z: SubschemeSpec | None,
    primes: Sequence[int],
    m_max: int,
    twists=None,
    budget: int | None = None,
    workers: int = 1,
) -> DecayProfile:
    """Empirical decay exponents ``s(p, m) = -log_p(max_a |E|) / m``.

    Rows with ``m = 1`` are recorded but do not enter ``sigma_hat``.
    """
    if not primes:
        raise ValueError("empty prime list")
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    records = []
    by_prime: dict[int, float] = {}
    for p in sorted(set(primes)):
        best = INF
        for m in range(1, m_max + 1):
            mod = PrimePowerModulus(p, m)
            hist = residue_histogram(f, mod, z, budget, workers)
            tw = resolve_twists(p, m, twists)
            vals = [exp_sum_from_histogram(hist, a) for a in tw]
            max_abs = max(v.abs for v in vals)
            all_zero = all(v.exact_zero for v in vals)
            s = decay_exponent(max_abs, p, m, all_zero)
            records.append(DecayRecord(p, m, tuple(tw), max_abs, s, all_zero))
            if m >= 2:
                best = min(best, s)
        by_prime[p] = best
    return DecayProfile(records, by_prime, min(by_prime.values()))


def bound_constants(profile: DecayProfile, sigma: float | Fraction) -> dict[int, float]:
    """Per prime, ``max_{m >= 2} max|E(p^m)| * p^(m sigma)``."""
    out: dict[int, float] = {}
    for r in profile.records:
        if r.m < 2:
            continue
        v = 0.0 if r.all_exact_zero else r.max_abs * float(r.p) ** (r.m * float(sigma))
        out[r.p] = max(out.get(r.p, 0.0), v)
    return out


# --------------------------------------------------------------------------
# localization

@dataclass
class LocalizationRow:
    twist: int
    full: complex
    restricted_f: complex
    restricted_pair: complex
    max_discrepancy: float
    complement_f_zero: bool
    complement_pair_zero: bool


@dataclass
class LocalizationReport:
    p: int
    m: int
    threshold: int
    above_threshold: bool
    rows: list[LocalizationRow]

    @property
    def max_discrepancy(self) -> float:
        return max(r.max_discrepancy for r in self.rows)

    @property
    def certified(self) -> bool:
        return all(r.complement_f_zero and r.complement_pair_zero for r in self.rows)


def localization_check(
    f: Polynomial,
    mod: PrimePowerModulus,
    z: SubschemeSpec | None = None,
    twists=None,
    threshold: int | None = None,
    budget: int | None = None,
    workers: int = 1,
) -> LocalizationReport:
    """Compare ``E`` with its restrictions to ``ord f >= m-1`` and ``ord (f)+J_f^2 >= m-1``.

    The complements (full minus restricted) are tested for exact vanishing in
    the cyclotomic integers, one test per twist.
    """
    if mod.m < 2:
        raise ValueError("localization needs m >= 2")
    if threshold is None:
        threshold = f.degree()
    z = z or SubschemeSpec.full_space()
    pair = pair_ideal(f).generators[1:]
    compiled = [_compile(f, mod.value)] + [_compile(g, mod.value) for g in pair]
    hists = _run("loc", compiled, mod, f.nvars, z, budget, workers, level=mod.m - 1)
    full, rf, rp = (ResidueHistogram(mod, f.nvars, h) for h in hists)
    comp_f = ResidueHistogram(mod, f.nvars, hists[0] - hists[1])
    comp_p = ResidueHistogram(mod, f.nvars, hists[0] - hists[2])
    rows = []
    for a in resolve_twists(mod.p, mod.m, twists):
        e0 = exp_sum_from_histogram(full, a).value
        e1 = exp_sum_from_histogram(rf, a).value
        e2 = exp_sum_from_histogram(rp, a).value
        rows.append(LocalizationRow(
            twist=a,
            full=e0,
            restricted_f=e1,
            restricted_pair=e2,
            max_discrepancy=max(abs(e0 - e1), abs(e0 - e2), abs(e1 - e2)),
            complement_f_zero=exp_sum_from_histogram(comp_f, a).exact_zero,
            complement_pair_zero=exp_sum_from_histogram(comp_p, a).exact_zero,
        ))
    return LocalizationReport(mod.p, mod.m, threshold, mod.p > threshold, rows)
