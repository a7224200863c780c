"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line, whatever the
outcome, so ``pytest -v -s`` or the captured output shows the scoreboard.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import product

import pytest

from singulct.exact import INF, MonomialIdeal, parse_polynomial
from singulct.expsum import PrimePowerModulus, decay_profile, exp_sum, localization_check
from singulct.harness import PASS, RunConfig, run_full_suite, to_json, verify_moi_bound, verify_point_count_slope
from singulct.invariants import (
    FamilyDescriptor,
    classify_rational_singularities,
    lct_determinantal_pair,
    lct_diagonal_pair,
    lct_pair_family,
    milnor_number,
    min_exp_family,
    monomial_lct_search,
    newton_lct_lp,
    raw_min_diagonal,
)

F = Fraction


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(k, label):
        ok = False
        try:
            yield
            ok = True
        finally:
            with capsys.disabled():
                print(f"\ncriterion {k:>2}: {'PASS' if ok else 'FAIL'}  {label}")

    return run


def test_criterion_01_determinantal(criterion):
    with criterion(1, "determinantal lct of the pair ideal is 2 at (1,1,0,...)"):
        for n in (2, 3, 4):
            t = time.perf_counter()
            res = lct_determinantal_pair(n)
            elapsed = time.perf_counter() - t
            assert res.value == 2
            assert res.witness == (1, 1) + (0,) * (n - 2)
            assert res.certified
            assert elapsed < 1.0


def test_criterion_02_diagonal(criterion):
    with criterion(2, "diagonal closed form and raw search agree for 2 <= n, d <= 6"):
        t = time.perf_counter()
        for n, d in product(range(2, 7), repeat=2):
            closed = min(F(n + d - 2, 2 * d - 2), F(n, d))
            assert lct_diagonal_pair(n, d) == closed
            assert raw_min_diagonal(n, d, d + 2).value == closed
        assert time.perf_counter() - t < 1.0


def test_criterion_03_thm_b_grid(criterion):
    with criterion(3, "min_exp >= lct_pair on the grid, strict exactly for 3 <= d < n"):
        for fam in RunConfig().grid():
            alpha, lct = min_exp_family(fam), lct_pair_family(fam)
            assert alpha >= lct
            strict = fam.kind == "diagonal" and 3 <= fam.d < fam.n
            assert (alpha > lct) == strict, fam.key


def test_criterion_04_rational_singularities(criterion):
    with criterion(4, "RS iff d < n (diagonal), RS for det n <= 4, agrees with min_exp > 1"):
        for fam in RunConfig().grid():
            res = classify_rational_singularities(fam)
            expected = fam.d < fam.n if fam.kind == "diagonal" else True
            assert res.rational == expected, fam.key
            assert res.rational == (min_exp_family(fam) > 1)


def _staircase(n, d):
    return sum(1 for a in product(range(d), repeat=n) if all(x < d - 1 for x in a))


def test_criterion_05_milnor(criterion):
    with criterion(5, "Milnor numbers of diagonal members and the cusp"):
        t = time.perf_counter()
        for n in (2, 3, 4):
            for d in (2, 3, 4, 5):
                mu = milnor_number(FamilyDescriptor.diagonal(n, d).polynomial())
                assert mu == _staircase(n, d) == (d - 1) ** n
        assert milnor_number(parse_polynomial("x^3 - y^2", ["x", "y"])) == 2
        assert time.perf_counter() - t < 30.0


def test_criterion_06_monomial_lct_oracle(criterion):
    with criterion(6, "weight search equals LP-certified lct on 200 random monomial ideals"):
        rng = random.Random(20240601)
        done = 0
        while done < 200:
            n = rng.randint(1, 3)
            gens = [tuple(rng.randint(0, 6) for _ in range(n)) for _ in range(rng.randint(1, 5))]
            ideal = MonomialIdeal(n, gens)
            if ideal.is_unit():
                continue
            assert monomial_lct_search(ideal).value == newton_lct_lp(ideal), gens
            done += 1


def test_criterion_07_expsum_fixtures(criterion):
    with criterion(7, "|E(x^2, p^m)| = p^(-m/2) and s = 1/2; E(x) is exactly zero"):
        sq = parse_polynomial("x^2", ["x"])
        for p in (3, 5, 7):
            for m in (2, 4, 6):
                assert abs(exp_sum(sq, PrimePowerModulus(p, m)).abs - p ** (-m / 2)) < 1e-9
            prof = decay_profile(sq, None, [p], 6, twists=1)
            for m in (2, 4, 6):
                assert abs(prof.record(p, m).exponent - 0.5) < 1e-6
        lin = parse_polynomial("x", ["x"])
        for p in (3, 5, 7):
            for m in range(1, 7):
                assert exp_sum(lin, PrimePowerModulus(p, m)).exact_zero


def test_criterion_08_equality_regime(criterion):
    with criterion(8, "sigma_hat for x1^3 + x2^3 within 2/3 +- 0.15 with a bounded constant"):
        t = time.perf_counter()
        f = parse_polynomial("x1^3 + x2^3", ["x1", "x2"])
        rep = verify_moi_bound(f, primes=(5, 7), m_max=3, epsilon=0.1, tolerance=0.15, names=["x1", "x2"])
        v = rep.verdicts["moi[x1^3 + x2^3]"]
        assert v.detail["lct_pair"] == F(2, 3)
        assert abs(v.detail["sigma_hat"] - 2 / 3) <= 0.15
        consts = rep.profiles["moi[x1^3 + x2^3]"]["bound_constants"]
        assert set(consts) == {"5", "7"} and all(c <= 1.0 for c in consts.values())
        assert v.status == PASS
        assert time.perf_counter() - t < 120.0


def test_criterion_09_localization(criterion):
    with criterion(9, "localization identities with exact-zero complements"):
        for text, names in (("x^2", "x"), ("x1^2 + x2^2", "x1,x2"), ("x1^3 + x2^3", "x1,x2")):
            f = parse_polynomial(text, names.split(","))
            for p in (5, 7):
                for m in (2, 3):
                    rep = localization_check(f, PrimePowerModulus(p, m))
                    assert rep.certified, (text, p, m)
                    assert rep.max_discrepancy < 1e-9


def test_criterion_10_point_count_slope(criterion):
    with criterion(10, "point-count slope for diag(2,3) at p = 7"):
        fam = FamilyDescriptor.diagonal(2, 3)
        rep = verify_point_count_slope(fam, 7, 0.15)
        v = rep.verdicts["pointcount[diag:2,3]@7"]
        assert v.detail["slope"] >= float(lct_pair_family(fam)) - 0.15
        assert v.status == PASS


def test_criterion_11_determinism(criterion):
    with criterion(11, "two full-suite runs give byte-identical JSON"):
        a = to_json(run_full_suite(RunConfig()))
        b = to_json(run_full_suite(RunConfig()))
        assert a.encode() == b.encode()
        assert '"status":"pass"' in a
