"""Command line entry point.

Exit codes: 0 pass, 1 fail (or I/O error), 2 inconclusive, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .exact import ParseError, parse_polynomial
from .expsum import BudgetExceeded, SubschemeSpec, decay_profile
from .harness import (
    FAIL,
    INCONCLUSIVE,
    SUITES,
    Report,
    RunConfig,
    Verdict,
    _profile_dict,
    emit_report,
    run_family_report,
    run_full_suite,
    run_suite,
    verify_moi_bound,
)
from .invariants import FamilyDescriptor, InconclusiveError, UnsupportedError, polynomial_bundle

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _twists(text: str):
    if text == "all":
        return "all"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("twists must be 'all' or a positive integer")
    if k < 1:
        raise argparse.ArgumentTypeError("twists must be positive")
    return k


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="singulct", description=__doc__.splitlines()[0])
    parser.add_argument("--budget", type=int, default=None,
                        help="point budget for enumerations (default: $SINGULCT_BUDGET or 1e8)")
    parser.add_argument("--workers", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_output(p, formats=("json", "csv")):
        p.add_argument("--format", choices=formats, default="json")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")

    def add_poly(p, required=False):
        p.add_argument("--poly", required=required)
        p.add_argument("--vars", default=None, help="comma-separated variable names")

    p = sub.add_parser("invariants", help="lct, minimal exponent, Milnor number, RS flag")
    p.add_argument("--family", help="diag:n,d or det:n")
    add_poly(p)
    add_output(p)

    p = sub.add_parser("expsum", help="exponential-sum decay profile")
    add_poly(p, required=True)
    p.add_argument("--primes", type=_int_list, default=[3, 5, 7])
    p.add_argument("--mmax", type=int, default=4)
    p.add_argument("--z", choices=["full", "hyp", "origin"], default="full")
    p.add_argument("--twists", type=_twists, default=None)
    add_output(p, ("json",))

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    add_poly(p)
    p.add_argument("--primes", type=_int_list, default=None)
    p.add_argument("--mmax", type=int, default=None)
    p.add_argument("--z", choices=["full", "hyp", "origin"], default="full")
    p.add_argument("--twists", type=_twists, default=None)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=0.15)
    add_output(p)

    p = sub.add_parser("report", help="run every suite and persist the report")
    add_output(p)
    return parser


def _poly_from_args(args):
    if not args.vars:
        raise UsageError("--poly needs --vars")
    names = [v.strip() for v in args.vars.split(",") if v.strip()]
    try:
        return parse_polynomial(args.poly, names), names
    except (ParseError, ValueError) as exc:
        raise UsageError(str(exc))


def _config(args, **kw) -> RunConfig:
    try:
        return RunConfig(budget=args.budget, workers=args.workers, **kw)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_invariants(args) -> Report:
    if bool(args.family) == bool(args.poly):
        raise UsageError("give exactly one of --family or --poly")
    if args.family:
        try:
            fam = FamilyDescriptor.parse(args.family)
        except ValueError as exc:
            raise UsageError(str(exc))
        return run_family_report(fam)
    f, names = _poly_from_args(args)
    key = f.to_string(names)
    report = Report("invariants", {"poly": key, "vars": names})
    try:
        report.bundles[key] = polynomial_bundle(f)
    except InconclusiveError as exc:
        report.verdicts["lct_pair"] = Verdict(INCONCLUSIVE, {"reason": str(exc)})
    return report


def cmd_expsum(args) -> Report:
    f, names = _poly_from_args(args)
    key = f"expsum[{f.to_string(names)}]"
    report = Report("expsum", {
        "poly": f.to_string(names), "primes": args.primes, "m_max": args.mmax, "z": args.z,
        "twists": args.twists if args.twists is not None else "default",
    })
    try:
        profile = decay_profile(f, SubschemeSpec.preset(args.z, f), args.primes, args.mmax,
                                args.twists, args.budget, args.workers)
    except BudgetExceeded as exc:
        report.verdicts[key] = Verdict(INCONCLUSIVE, {"reason": str(exc)})
        return report
    except ValueError as exc:
        raise UsageError(str(exc))
    report.profiles[key] = _profile_dict(profile, None, None, {})
    return report


def cmd_verify(args) -> Report:
    config = _config(args, epsilon=args.epsilon, tolerance=args.tol, z=args.z, twists=args.twists)
    if args.poly:
        if args.suite != "moi":
            raise UsageError("--poly is only used with --suite moi")
        f, names = _poly_from_args(args)
        return verify_moi_bound(
            f, args.z, args.primes or [3, 5, 7], args.mmax or 4, args.epsilon, args.tol,
            config.bound_cap, args.twists, args.budget, args.workers, names,
        )
    if args.suite == "all":
        return run_full_suite(config)
    return run_suite(args.suite, config)


def cmd_report(args) -> Report:
    return run_full_suite(_config(args))


COMMANDS = {"invariants": cmd_invariants, "expsum": cmd_expsum, "verify": cmd_verify, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.budget is not None and args.budget <= 0:
        parser.error("--budget must be positive")
    try:
        report = COMMANDS[args.command](args)
        text = emit_report(report, args.format, args.out)
    except (UsageError, UnsupportedError) as exc:
        print(f"singulct: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"singulct: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out is None:
        sys.stdout.write(text)
    status = report.status
    if status == FAIL:
        return EXIT_FAIL
    if status == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
