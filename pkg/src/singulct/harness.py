"""Verification suites, report assembly and persistence."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .exact import INF, Polynomial, default_names, parse_polynomial
from .expsum import (
    BudgetExceeded,
    PrimePowerModulus,
    SubschemeSpec,
    bound_constants,
    decay_profile,
    localization_check,
    point_count,
    resolve_budget,
)
from .invariants import (
    FamilyDescriptor,
    InconclusiveError,
    InvariantBundle,
    family_bundle,
    lct_from_min_exp,
    lct_pair_family,
    lct_pair_with_pathway,
    min_exp_family,
    pair_ideal,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class RunConfig:
    diagonal_n: tuple[int, int] = (2, 6)
    diagonal_d: tuple[int, int] = (2, 6)
    determinantal_n: tuple[int, int] = (2, 4)
    moi_cases: tuple[tuple[str, str, tuple[int, ...], int], ...] = (
        ("x^2", "x", (3, 5, 7), 6),
        ("x1^3 + x2^3", "x1,x2", (5, 7), 3),
        ("x", "x", (3, 5), 3),
    )
    localization_polys: tuple[tuple[str, str], ...] = (
        ("x^2", "x"),
        ("x1^2 + x2^2", "x1,x2"),
        ("x1^3 + x2^3", "x1,x2"),
    )
    localization_primes: tuple[int, ...] = (5, 7)
    localization_levels: tuple[int, ...] = (2, 3)
    pointcount_family: str = "diag:2,3"
    pointcount_prime: int = 7
    z: str = "full"
    twists: object = None
    epsilon: float = 0.1
    tolerance: float = 0.15
    bound_cap: float = 1.0
    localization_tol: float = 1e-9
    budget: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.tolerance <= 0 or self.epsilon <= 0 or self.localization_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.budget is not None and self.budget <= 0:
            raise ValueError("budget must be positive")

    def grid(self) -> list[FamilyDescriptor]:
        out = [
            FamilyDescriptor.diagonal(n, d)
            for n in range(self.diagonal_n[0], self.diagonal_n[1] + 1)
            for d in range(self.diagonal_d[0], self.diagonal_d[1] + 1)
        ]
        out += [
            FamilyDescriptor.determinantal(n)
            for n in range(self.determinantal_n[0], self.determinantal_n[1] + 1)
        ]
        return out


@dataclass
class Verdict:
    status: str
    detail: dict = field(default_factory=dict)
    counterexample: dict | None = None

    def as_dict(self) -> dict:
        out = {"status": self.status, "detail": self.detail}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class Report:
    kind: str
    inputs: dict = field(default_factory=dict)
    bundles: dict[str, InvariantBundle] = field(default_factory=dict)
    profiles: dict[str, dict] = field(default_factory=dict)
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    version: str = __version__

    @property
    def status(self) -> str:
        states = {v.status for v in self.verdicts.values()}
        if FAIL in states:
            return FAIL
        if INCONCLUSIVE in states:
            return INCONCLUSIVE
        return PASS

    def merge(self, other: Report, prefix: str, nest: bool = True) -> None:
        for k, v in other.bundles.items():
            self.bundles[k] = v
        for k, v in other.profiles.items():
            self.profiles[k] = v
        for k, v in other.verdicts.items():
            self.verdicts[f"{prefix}/{k}" if nest else k] = v
        self.inputs[prefix] = other.inputs

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "version": self.version,
            "inputs": self.inputs,
            "invariants": {k: b.as_dict() for k, b in self.bundles.items()},
            "profiles": self.profiles,
            "verdicts": {k: v.as_dict() for k, v in self.verdicts.items()},
            "status": self.status,
            "notes": ["only Q_p sums over Z/p^mZ; unramified extensions not supported",
                      "sigma_hat is an empirical estimate over sampled twists"]
            if self.profiles else [],
        }


# --------------------------------------------------------------------------
# family reports and the lct / minimal-exponent checks

def _thm_b_verdict(fam: FamilyDescriptor, alpha, lct) -> Verdict:
    relation = "equality" if alpha == lct else "strict" if alpha > lct else "violated"
    detail = {"min_exp": alpha, "lct_pair": lct, "relation": relation}
    if alpha >= lct:
        return Verdict(PASS, detail)
    return Verdict(FAIL, detail, {"family": fam.key})


def run_family_report(fam: FamilyDescriptor) -> Report:
    """Invariants of one family member, with the ``thmA`` (classification) and ``thmB`` (inequality) verdicts."""
    report = Report("family", {"family": fam.key})
    try:
        bundle = family_bundle(fam)
    except InconclusiveError as exc:
        report.verdicts["thmB"] = Verdict(INCONCLUSIVE, {"reason": str(exc)})
        return report
    report.bundles[fam.key] = bundle
    report.verdicts["thmB"] = _thm_b_verdict(fam, bundle.min_exp, bundle.lct_pair)
    lct_f = lct_from_min_exp(bundle.min_exp)
    identity = lct_f == min(bundle.lct_pair, Fraction(1))
    saito = (bundle.min_exp > 1) == bundle.rational_singularities
    detail = {
        "lct_f": lct_f,
        "min_lct_pair_1": min(bundle.lct_pair, Fraction(1)),
        "rational_singularities": bundle.rational_singularities,
        "min_exp_gt_1": bundle.min_exp > 1,
    }
    if identity and saito:
        report.verdicts["thmA"] = Verdict(PASS, detail)
    else:
        report.verdicts["thmA"] = Verdict(FAIL, detail, {"family": fam.key})
    return report


def verify_thm_b(grid: Sequence[FamilyDescriptor]) -> Report:
    """Exact check ``min_exp >= lct(pair ideal)`` on every grid member."""
    if not grid:
        raise ValueError("empty grid")
    report = Report("thmB", {"grid": [fam.key for fam in grid]})
    for fam in grid:
        try:
            lct = lct_pair_family(fam)
        except InconclusiveError as exc:
            report.verdicts[fam.key] = Verdict(INCONCLUSIVE, {"reason": str(exc)})
            continue
        report.verdicts[fam.key] = _thm_b_verdict(fam, min_exp_family(fam), lct)
    return report


def _profile_dict(profile, lct, sigma, constants) -> dict:
    return {
        "records": [
            {
                "p": r.p,
                "m": r.m,
                "twists": len(r.twists),
                "max_abs": r.max_abs,
                "exponent": r.exponent,
                "all_exact_zero": r.all_exact_zero,
            }
            for r in profile.records
        ],
        "sigma_hat_by_prime": {str(p): s for p, s in profile.sigma_hat_by_prime.items()},
        "sigma_hat": profile.sigma_hat,
        "lct_pair": lct,
        "sigma": sigma,
        "bound_constants": {str(p): c for p, c in constants.items()},
        "provenance": "enumeration",
    }


def verify_moi_bound(
    f: Polynomial,
    z: str = "full",
    primes: Sequence[int] = (3, 5, 7),
    m_max: int = 4,
    epsilon: float = 0.1,
    tolerance: float = 0.15,
    bound_cap: float = 1.0,
    twists=None,
    budget: int | None = None,
    workers: int = 1,
    names: Sequence[str] | None = None,
) -> Report:
    """Compare exponential-sum decay with ``lct((f) + J_f^2)``.

    Passes when ``max|E(p^m)| * p^(m (lct - epsilon))`` stays below
    ``bound_cap`` for ``2 <= m <= m_max`` and, if ``lct <= 1``, the empirical
    ``sigma_hat`` is within ``tolerance`` of ``lct``.
    """
    names = list(names) if names else default_names(f.nvars)
    key = f"moi[{f.to_string(names)}]"
    report = Report("moi", {
        "poly": f.to_string(names), "z": z, "primes": list(primes), "m_max": m_max,
        "epsilon": epsilon, "tolerance": tolerance, "bound_cap": bound_cap,
    })
    lct, path = lct_pair_with_pathway(f)
    zspec = SubschemeSpec.preset(z, f)
    try:
        profile = decay_profile(f, zspec, primes, m_max, twists, budget, workers)
    except BudgetExceeded as exc:
        report.verdicts[key] = Verdict(INCONCLUSIVE, {"reason": str(exc)})
        return report
    if lct == INF:
        report.profiles[key] = _profile_dict(profile, lct, None, {})
        ok = profile.sigma_hat == INF
        detail = {"lct_pair": lct, "lct_pathway": path, "sigma_hat": profile.sigma_hat, "bound": "vacuous"}
        report.verdicts[key] = Verdict(PASS if ok else FAIL, detail, None if ok else {"poly": report.inputs["poly"]})
        return report
    sigma = float(lct) - epsilon
    constants = bound_constants(profile, sigma)
    report.profiles[key] = _profile_dict(profile, lct, sigma, constants)
    bounded = all(c <= bound_cap for c in constants.values())
    matched = True
    if lct <= 1:
        matched = abs(profile.sigma_hat - float(lct)) <= tolerance
    detail = {
        "lct_pair": lct,
        "lct_pathway": path,
        "sigma_hat": profile.sigma_hat,
        "bounded": bounded,
        "equality_regime": lct <= 1,
        "sigma_matches_lct": matched,
        "below_degree_threshold": [p for p in sorted(set(primes)) if p <= f.degree()],
    }
    if bounded and matched:
        report.verdicts[key] = Verdict(PASS, detail)
    else:
        bad = next(
            (r for r in profile.records if r.m >= 2 and (r.max_abs * r.p ** (r.m * sigma) > bound_cap or not matched)),
            None,
        )
        cex = {"poly": report.inputs["poly"], "z": z}
        if bad is not None:
            cex.update(primes=[bad.p], m_max=bad.m)
        report.verdicts[key] = Verdict(FAIL, detail, cex)
    return report


def verify_localization(
    cases: Sequence[tuple[Polynomial, Sequence[str]]],
    primes: Sequence[int] = (5, 7),
    levels: Sequence[int] = (2, 3),
    z: str = "full",
    tol: float = 1e-9,
    twists=None,
    budget: int | None = None,
    workers: int = 1,
) -> Report:
    """Unrestricted vs. restricted sums; complements must vanish exactly."""
    report = Report("localization", {
        "polys": [f.to_string(n) for f, n in cases], "primes": list(primes), "levels": list(levels), "tol": tol,
    })
    for f, names in cases:
        text = f.to_string(names)
        for p in primes:
            for m in levels:
                key = f"loc[{text}]@{p}^{m}"
                try:
                    rep = localization_check(
                        f, PrimePowerModulus(p, m), SubschemeSpec.preset(z, f), twists, budget=budget, workers=workers
                    )
                except BudgetExceeded as exc:
                    report.verdicts[key] = Verdict(INCONCLUSIVE, {"reason": str(exc)})
                    continue
                detail = {
                    "threshold": rep.threshold,
                    "twists": len(rep.rows),
                    "max_discrepancy": rep.max_discrepancy,
                    "complements_exact_zero": rep.certified,
                    "full": [rep.rows[0].full.real, rep.rows[0].full.imag],
                }
                if not rep.above_threshold:
                    report.verdicts[key] = Verdict(INCONCLUSIVE, {**detail, "reason": "p not above degree threshold"})
                elif rep.certified and rep.max_discrepancy <= tol:
                    report.verdicts[key] = Verdict(PASS, detail)
                else:
                    report.verdicts[key] = Verdict(FAIL, detail, {"poly": text, "p": p, "m": m})
    return report


def largest_feasible_level(p: int, n: int, budget: int) -> int:
    j = 0
    while p ** ((j + 1) * n) <= budget:
        j += 1
    return j


def verify_point_count_slope(
    fam: FamilyDescriptor, p: int = 7, tolerance: float = 0.15, budget: int | None = None, workers: int = 1
) -> Report:
    """``-log_p(N_j / p^(jn)) / j`` for the pair ideal at the largest feasible ``j``."""
    budget = resolve_budget(budget)
    f = fam.polynomial()
    n = f.nvars
    lct = lct_pair_family(fam)
    report = Report("pointcount", {"family": fam.key, "p": p, "tolerance": tolerance})
    j = largest_feasible_level(p, n, budget)
    key = f"pointcount[{fam.key}]@{p}"
    if j < 1:
        report.verdicts[key] = Verdict(INCONCLUSIVE, {"reason": "budget too small for j=1"})
        return report
    counts = {}
    for level in range(1, j + 1):
        counts[level] = point_count(pair_ideal(f), PrimePowerModulus(p, level), budget=budget, workers=workers)
    slopes = {level: -math.log(c / p ** (level * n), p) / level for level, c in counts.items()}
    detail = {
        "lct_pair": lct,
        "levels": {str(k): {"count": counts[k], "slope": slopes[k]} for k in counts},
        "j": j,
        "slope": slopes[j],
    }
    if slopes[j] >= float(lct) - tolerance:
        report.verdicts[key] = Verdict(PASS, detail)
    else:
        report.verdicts[key] = Verdict(FAIL, detail, {"family": fam.key, "p": p, "j": j})
    return report


def _parse_case(text: str, names: str) -> tuple[Polynomial, list[str]]:
    vs = [v.strip() for v in names.split(",") if v.strip()]
    return parse_polynomial(text, vs), vs


def run_suite(name: str, config: RunConfig) -> Report:
    if name == "thmB":
        return verify_thm_b(config.grid())
    if name == "families":
        report = Report("families", {"grid": [fam.key for fam in config.grid()]})
        for fam in config.grid():
            report.merge(run_family_report(fam), fam.key)
        return report
    if name == "moi":
        report = Report("moi")
        for text, names, primes, m_max in config.moi_cases:
            f, vs = _parse_case(text, names)
            sub = verify_moi_bound(
                f, config.z, primes, m_max, config.epsilon, config.tolerance, config.bound_cap,
                config.twists, config.budget, config.workers, vs,
            )
            report.merge(sub, f"moi[{text}]", nest=False)
        return report
    if name == "localization":
        cases = [_parse_case(t, n) for t, n in config.localization_polys]
        return verify_localization(
            cases, config.localization_primes, config.localization_levels, config.z,
            config.localization_tol, config.twists, config.budget, config.workers,
        )
    if name == "pointcount":
        return verify_point_count_slope(
            FamilyDescriptor.parse(config.pointcount_family), config.pointcount_prime,
            config.tolerance, config.budget, config.workers,
        )
    raise ValueError(f"unknown suite {name!r}")


SUITES = ("families", "thmB", "moi", "localization", "pointcount")


def run_full_suite(config: RunConfig | None = None) -> Report:
    config = config or RunConfig()
    report = Report("full")
    for name in SUITES:
        report.merge(run_suite(name, config), name)
    return report


# --------------------------------------------------------------------------
# serialization

def _scalar(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _json(v, out: list) -> None:
    import json

    v = _scalar(v)
    if isinstance(v, dict):
        out.append("{")
        for i, k in enumerate(sorted(v, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _json(v[k], out)
        out.append("}")
    elif isinstance(v, (list, tuple)):
        out.append("[")
        for i, x in enumerate(v):
            if i:
                out.append(",")
            _json(x, out)
        out.append("]")
    elif isinstance(v, bool):
        out.append("true" if v else "false")
    elif v is None:
        out.append("null")
    elif isinstance(v, int):
        out.append(str(v))
    elif isinstance(v, float):
        out.append(format(v, ".17g"))
    else:
        out.append(json.dumps(str(v)))


def to_json(report: Report | dict) -> str:
    """Canonical JSON: sorted keys, rationals as ``"num/den"``, floats to 17 digits."""
    data = report.as_dict() if isinstance(report, Report) else report
    out: list[str] = []
    _json(data, out)
    return "".join(out) + "\n"


CSV_COLUMNS = ["n", "d", "lct_pair", "lct_f", "min_exp", "milnor", "rs"]


def _family_or_none(key: str) -> FamilyDescriptor | None:
    try:
        return FamilyDescriptor.parse(key)
    except ValueError:
        return None


def to_csv(report: Report) -> str:
    """Flat table of the invariant bundles, one row per family member or polynomial."""
    keys = list(report.bundles)
    fams = [_family_or_none(k) for k in keys]
    if any(f is None for f in fams):
        lead = ["poly"]
    else:
        lead = ["kind"] if any(f.kind != "diagonal" for f in fams) else []
        lead += ["n", "d"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(lead + CSV_COLUMNS[2:])
    for key, fam in zip(keys, fams):
        b = report.bundles[key]
        if "poly" in lead:
            head = [key]
        else:
            head = ([fam.kind] if "kind" in lead else []) + [fam.n, "" if fam.d is None else fam.d]
        row = [b.lct_pair, b.lct_f, b.min_exp, b.milnor, "true" if b.rational_singularities else "false"]
        w.writerow(head + [_csv_cell(x) for x in row])
    return buf.getvalue()


def _csv_cell(x):
    if x is None:
        return ""
    v = _scalar(x)
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def emit_report(report: Report, fmt: str, path: str | Path | None) -> str:
    """Render ``report`` as ``json`` or ``csv``; write it to ``path`` when given."""
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
    return text
