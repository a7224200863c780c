import cmath
import math
from collections import Counter
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singulct.exact import INF, Polynomial, eval_mod, parse_polynomial
from singulct.expsum import (
    BudgetExceeded,
    PrimePowerModulus,
    SubschemeSpec,
    bound_constants,
    cyclotomic_zero,
    decay_exponent,
    decay_profile,
    default_twists,
    exp_sum,
    exp_sum_from_histogram,
    localization_check,
    point_count,
    residue_histogram,
    resolve_budget,
    resolve_twists,
)


def P(text, names):
    return parse_polynomial(text, names)


def brute_hist(f, q, p, z=()):
    """Oracle: loop over every point with exact modular evaluation."""
    out = Counter()
    for x in product(range(q), repeat=f.nvars):
        if all(eval_mod(g, tuple(v % p for v in x), p) == 0 for g in z):
            out[eval_mod(f, x, q)] += 1
    return out


def brute_sum(f, q, p, a=1, z=()):
    total = 0j
    for x in product(range(q), repeat=f.nvars):
        if all(eval_mod(g, tuple(v % p for v in x), p) == 0 for g in z):
            total += cmath.exp(2j * math.pi * a * eval_mod(f, x, q) / q)
    return total / q**f.nvars


def hist_dict(h):
    return {r: int(c) for r, c in enumerate(h.counts) if c}


# --------------------------------------------------------------------------
# histograms

def test_histogram_x_squared_mod_9():
    h = residue_histogram(P("x^2", ["x"]), PrimePowerModulus(3, 2))
    assert hist_dict(h) == {0: 3, 1: 2, 4: 2, 7: 2}
    assert hist_dict(h) == dict(brute_hist(P("x^2", ["x"]), 9, 3))


def test_histogram_linear_is_uniform():
    h = residue_histogram(P("x", ["x"]), PrimePowerModulus(5, 1))
    assert list(h.counts) == [1] * 5


def test_histogram_restricted_to_hypersurface():
    f = P("x^2", ["x"])
    h = residue_histogram(f, PrimePowerModulus(3, 2), SubschemeSpec.hypersurface_of(f))
    assert hist_dict(h) == {0: 3}


small_polys = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-4, 4), min_size=1, max_size=4
).map(lambda t: Polynomial(2, t))
moduli = st.sampled_from([(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)])


@settings(max_examples=40, deadline=None)
@given(small_polys, moduli, st.sampled_from(["full", "hyp", "origin"]))
def test_histogram_matches_brute_force(f, pm, zname):
    p, m = pm
    q = p**m
    z = SubschemeSpec.preset(zname, f)
    h = residue_histogram(f, PrimePowerModulus(p, m), z)
    assert hist_dict(h) == dict(brute_hist(f, q, p, z.generators))


@settings(max_examples=40, deadline=None)
@given(small_polys, moduli)
def test_histogram_total(f, pm):
    p, m = pm
    assert residue_histogram(f, PrimePowerModulus(p, m)).total() == p ** (m * 2)


def test_histogram_independent_of_worker_count():
    f = P("x^3 + 2*x*y^2 + y", ["x", "y"])
    mod = PrimePowerModulus(7, 3)
    one = residue_histogram(f, mod)
    many = residue_histogram(f, mod, workers=3)
    assert np.array_equal(one.counts, many.counts)


def test_chunk_boundaries_do_not_matter(monkeypatch):
    import singulct.expsum as es

    f = P("x^2 + x*y + 3*y^3", ["x", "y"])
    mod = PrimePowerModulus(5, 2)
    ref = residue_histogram(f, mod).counts
    monkeypatch.setattr(es, "CHUNK", 37)
    assert np.array_equal(residue_histogram(f, mod).counts, ref)
    assert np.array_equal(residue_histogram(f, mod, workers=2).counts, ref)


# --------------------------------------------------------------------------
# sums

def test_exp_sum_x_squared_mod_9():
    v = exp_sum(P("x^2", ["x"]), PrimePowerModulus(3, 2))
    assert abs(v.abs - 1 / 3) < 1e-12
    assert abs(v.value - brute_sum(P("x^2", ["x"]), 9, 3)) < 1e-12


@pytest.mark.parametrize("p, m", [(3, 1), (5, 3), (7, 2)])
def test_linear_sum_is_exact_zero(p, m):
    v = exp_sum(P("x", ["x"]), PrimePowerModulus(p, m))
    assert v.exact_zero and v.value == 0 and v.abs == 0.0


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("m", [2, 4, 6])
def test_quadratic_sum_magnitude(p, m):
    v = exp_sum(P("x^2", ["x"]), PrimePowerModulus(p, m))
    assert abs(v.abs - p ** (-m / 2)) < 1e-9
    assert not v.exact_zero


def test_twist_must_be_unit():
    with pytest.raises(ValueError):
        exp_sum(P("x^2", ["x"]), PrimePowerModulus(3, 2), twist=3)


@settings(max_examples=40, deadline=None)
@given(small_polys, moduli, st.integers(1, 30))
def test_sum_properties(f, pm, a):
    p, m = pm
    q = p**m
    if a % p == 0:
        a += 1
    mod = PrimePowerModulus(p, m)
    hist = residue_histogram(f, mod)
    v = exp_sum_from_histogram(hist, a)
    assert abs(v.value - brute_sum(f, q, p, a)) < 1e-9
    assert v.abs <= 1 + 1e-12
    # twisting by a equals the untwisted sum of a*f
    af = Polynomial.constant(2, a) * f
    assert abs(exp_sum(af, mod).value - v.value) < 1e-9
    # twist -a gives the complex conjugate
    conj = exp_sum_from_histogram(hist, q - a % q)
    assert abs(conj.value - v.value.conjugate()) < 1e-9
    # exact-zero flag agrees with the floating value
    if v.exact_zero:
        assert abs(brute_sum(f, q, p, a)) < 1e-9


def test_sum_restricted_to_origin():
    f = P("x^2 + y^2", ["x", "y"])
    mod = PrimePowerModulus(5, 2)
    v = exp_sum(f, mod, SubschemeSpec.origin_only(2))
    assert abs(v.value - brute_sum(f, 25, 5, 1, SubschemeSpec.origin_only(2).generators)) < 1e-12


def test_cyclotomic_zero_oracle():
    assert cyclotomic_zero(np.array([1, 1, 1]), 3)
    assert cyclotomic_zero(np.array([2, 0, 5, 2, 0, 5, 2, 0, 5]), 3)
    assert not cyclotomic_zero(np.array([1, 0, 0, 0, 0]), 5)
    assert not cyclotomic_zero(np.array([1, 1, 0, 1, 1, 0, 1, 1, 1]), 3)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(3, 2), (5, 1), (2, 3)]), st.data())
def test_cyclotomic_zero_agrees_with_numerics(pm, data):
    p, m = pm
    q = p**m
    coeffs = np.array(data.draw(st.lists(st.integers(-2, 2), min_size=q, max_size=q)))
    value = sum(int(c) * cmath.exp(2j * math.pi * j / q) for j, c in enumerate(coeffs))
    assert cyclotomic_zero(coeffs, p) == (abs(value) < 1e-9)


# --------------------------------------------------------------------------
# point counts

@pytest.mark.parametrize("j, count", [(1, 1), (2, 3), (3, 3)])
def test_point_count_x_squared(j, count):
    assert point_count([P("x^2", ["x"])], PrimePowerModulus(3, j)) == count


def test_point_count_against_brute_force():
    f = P("x^3 + y^3", ["x", "y"])
    for j in (1, 2):
        q = 7**j
        brute = sum(1 for x in product(range(q), repeat=2) if eval_mod(f, x, q) == 0)
        assert point_count([f], PrimePowerModulus(7, j)) == brute


def test_point_count_of_ideal_needs_all_generators():
    gens = [P("x", ["x", "y"]), P("y^2", ["x", "y"])]
    brute = sum(1 for x, y in product(range(9), repeat=2) if x % 9 == 0 and (y * y) % 9 == 0)
    assert brute == 3
    assert point_count(gens, PrimePowerModulus(3, 2)) == brute
    with pytest.raises(ValueError):
        point_count([], PrimePowerModulus(3, 2))


# --------------------------------------------------------------------------
# budget, moduli, twists

def test_budget_exceeded():
    f = P("x^2 + y^2", ["x", "y"])
    with pytest.raises(BudgetExceeded) as info:
        residue_histogram(f, PrimePowerModulus(7, 3), budget=1000)
    assert info.value.required == 7**6 and info.value.budget == 1000


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("SINGULCT_BUDGET", "12")
    assert resolve_budget() == 12
    assert resolve_budget(5) == 5
    with pytest.raises(BudgetExceeded):
        residue_histogram(P("x", ["x"]), PrimePowerModulus(5, 2))
    monkeypatch.delenv("SINGULCT_BUDGET")
    assert resolve_budget() == 10**8


@pytest.mark.parametrize("p, m", [(4, 1), (3, 0), (2, 40)])
def test_bad_moduli(p, m):
    with pytest.raises(ValueError):
        PrimePowerModulus(p, m)


def test_twist_rules():
    assert default_twists(3, 2) == [1, 2, 4, 5, 7, 8]
    assert default_twists(7, 3) == [1, 2, 3, 4, 5, 6]
    assert default_twists(17, 2) == list(range(1, 9))
    assert resolve_twists(3, 2, 3) == [1, 2, 4]
    assert resolve_twists(3, 1, "all") == [1, 2]
    with pytest.raises(ValueError):
        resolve_twists(3, 2, 0)


def test_unknown_preset():
    with pytest.raises(ValueError):
        SubschemeSpec.preset("nowhere", P("x", ["x"]))


# --------------------------------------------------------------------------
# decay profiles

def test_decay_exponent_edge_cases():
    assert decay_exponent(0.0, 5, 2, True) == INF
    assert decay_exponent(1.0, 5, 2, False) == 0.0
    assert decay_exponent(1 / 25, 5, 2, False) == pytest.approx(1.0)


def test_decay_profile_x_squared():
    prof = decay_profile(P("x^2", ["x"]), None, [3, 5], 4)
    for r in prof.records:
        assert abs(r.exponent - 0.5) < 1e-6
    assert abs(prof.sigma_hat - 0.5) < 1e-6
    assert max(bound_constants(prof, 0.5).values()) == pytest.approx(1.0)


def test_decay_profile_linear_is_infinite():
    prof = decay_profile(P("x", ["x"]), None, [3, 5], 3)
    assert prof.sigma_hat == INF
    assert all(r.all_exact_zero for r in prof.records)
    assert bound_constants(prof, 1.0) == {3: 0.0, 5: 0.0}


def test_decay_profile_cubic_pair():
    prof = decay_profile(P("x1^3 + x2^3", ["x1", "x2"]), None, [5, 7], 3)
    assert prof.record(5, 2).exponent == pytest.approx(1.0)
    assert prof.record(7, 3).exponent == pytest.approx(2 / 3)
    assert abs(prof.sigma_hat - 2 / 3) < 0.15


def test_decay_profile_validation():
    f = P("x^2", ["x"])
    with pytest.raises(ValueError):
        decay_profile(f, None, [], 3)
    with pytest.raises(ValueError):
        decay_profile(f, None, [3], 1)


# --------------------------------------------------------------------------
# localization

@pytest.mark.parametrize("text, names", [("x^2", "x"), ("x1^2 + x2^2", "x1,x2"), ("x1^3 + x2^3", "x1,x2")])
@pytest.mark.parametrize("p, m", [(5, 2), (5, 3), (7, 2)])
def test_localization_identities(text, names, p, m):
    f = P(text, names.split(","))
    rep = localization_check(f, PrimePowerModulus(p, m))
    assert rep.above_threshold
    assert rep.certified
    assert rep.max_discrepancy < 1e-9


def test_localization_restricted_sum_by_brute_force():
    f = P("x^2", ["x"])
    rep = localization_check(f, PrimePowerModulus(5, 3), twists=1)
    brute = sum(cmath.exp(2j * math.pi * (x * x) / 125) for x in range(125) if (x * x) % 25 == 0) / 125
    assert abs(rep.rows[0].restricted_f - brute) < 1e-12
    assert abs(rep.rows[0].full - brute) < 1e-12


def test_localization_below_threshold_is_flagged():
    rep = localization_check(P("x^3", ["x"]), PrimePowerModulus(3, 2))
    assert not rep.above_threshold


def test_localization_needs_level_two():
    with pytest.raises(ValueError):
        localization_check(P("x^2", ["x"]), PrimePowerModulus(5, 1))
