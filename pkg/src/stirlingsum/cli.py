"""Command-line surface.

Subcommands: ``list``, ``coeffs``, ``eval``, ``digamma``, ``recover``,
``verify``, ``bench``.  ``--json`` switches any of them to json-lines output
in which every high-precision number travels as a decimal string.  Exit
codes: 0 success, 2 usage or domain error, 3 numerical non-convergence;
``verify`` exits 1 when any variant fails its brute-force check.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from fractions import Fraction

from mpmath import mp, mpf

from . import catalog
from .constants import ReferenceMismatchError, format_decimal
from .exactnum import DomainError
from .transform import EvalContext, NonConvergenceError


def _rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _magnitude(x) -> str:
    return mp.nstr(x, 3)


def _ms(seconds: float) -> str:
    return f"{seconds * 1000:.3f}"


def _parse_count(text: str) -> int:
    """Integer counts, accepting scientific shorthand like ``1e6``."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise DomainError(f"not an integer: {text!r}") from None
    if not value.is_integer():
        raise DomainError(f"not an integer: {text!r}")
    return int(value)


def _parse_real(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a number: {text!r}") from None


def _print_record(args, record: dict, text_lines: list[str]) -> None:
    if args.json:
        print(json.dumps(record, separators=(",", ":")))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_list(args) -> int:
    ids = catalog.formula_ids()
    if args.family is not None:
        if args.family not in catalog.VARIANT_COUNTS:
            raise DomainError(f"unknown formula family {args.family}")
        ids = tuple(i for i in ids if i.family == args.family)
    for fid in ids:
        f = catalog.describe(fid)
        constants = [str(c) for c in f.constants]
        record = {
            "id": str(fid),
            "lhs": f.lhs,
            "constants": constants,
            "domain_min": f.domain_min,
            "alternating": f.alternating,
        }
        line = f"{fid}  {f.lhs}  [{', '.join(constants)}]  n>={f.domain_min}"
        _print_record(args, record, [line])
    return 0


def cmd_coeffs(args) -> int:
    values = catalog.coefficients(args.id, args.k)
    rendered = [_rational(c) for c in values]
    record = {"id": str(catalog.FormulaId.parse(args.id)), "k": args.k,
              "coefficients": rendered}
    lines = [f"{k} {text}" for k, text in enumerate(rendered, 1)]
    _print_record(args, record, lines)
    return 0


def cmd_eval(args) -> int:
    rep = catalog.evaluate(args.id, args.n, EvalContext(digits=args.digits))
    value = format_decimal(rep.value, args.digits)
    record = {
        "id": str(catalog.FormulaId.parse(args.id)),
        "n": args.n,
        "digits": args.digits,
        "value": value,
        "terms": rep.terms_used,
        "est_error": _magnitude(rep.est_error),
        "elapsed_ms": _ms(rep.elapsed),
    }
    lines = [
        f"value {value}",
        f"terms {rep.terms_used}",
        f"est_error {record['est_error']}",
        f"elapsed_ms {record['elapsed_ms']}",
    ]
    if args.compare:
        ref = catalog.brute_force(args.id, args.n, args.digits + 10)
        with mp.workdps(args.digits + 30):
            diff = abs(rep.value - ref)
        record["brute"] = format_decimal(ref, args.digits)
        record["difference"] = _magnitude(diff)
        lines += [f"brute {record['brute']}", f"difference {record['difference']}"]
    _print_record(args, record, lines)
    return 0


def cmd_digamma(args) -> int:
    x = _parse_real(args.x)
    t0 = time.perf_counter()
    value, terms, _ = catalog.digamma_details(x, args.digits)
    elapsed = time.perf_counter() - t0
    text = format_decimal(value, args.digits)
    record = {
        "x": args.x,
        "digits": args.digits,
        "value": text,
        "terms": terms,
        "elapsed_ms": _ms(elapsed),
    }
    lines = [text, f"terms {terms}", f"elapsed_ms {record['elapsed_ms']}"]
    _print_record(args, record, lines)
    return 0


def cmd_recover(args) -> int:
    res = catalog.recover_details(args.id, digits=args.digits, n0=args.n0)
    value = format_decimal(res.value, args.digits)
    record = {
        "id": str(catalog.FormulaId.parse(args.id)),
        "constant": str(res.constant),
        "digits": args.digits,
        "value": value,
        "n0": res.n0,
        "terms": res.terms_used,
    }
    lines = [
        f"constant {res.constant}",
        f"value {value}",
        f"n0 {res.n0}",
        f"terms {res.terms_used}",
    ]
    _print_record(args, record, lines)
    return 0


def cmd_verify(args) -> int:
    if args.all == (args.family is not None):
        raise DomainError("pass exactly one of --all or --family")
    if args.family is not None:
        if args.family not in catalog.VARIANT_COUNTS:
            raise DomainError(f"unknown formula family {args.family}")
        ids = [i for i in catalog.formula_ids() if i.family == args.family]
    else:
        ids = list(catalog.formula_ids())
    digits = args.digits
    tol = mpf(10) ** -(digits - 5)
    failures = 0
    for fid in ids:
        f = catalog.describe(fid)
        if args.n is not None:
            if args.n < f.domain_min:
                raise DomainError(f"{fid} needs n >= {f.domain_min}, got {args.n}")
            n_set = [args.n]
        else:
            n_set = sorted({f.domain_min + 2, 10, 100})
        max_diff = mpf(0)
        for n in n_set:
            rep = catalog.evaluate(fid, n, EvalContext(digits=digits))
            ref = catalog.brute_force(fid, n, digits + 10)
            with mp.workdps(digits + 30):
                max_diff = max(max_diff, abs(rep.value - ref))
        passed = max_diff < tol
        failures += not passed
        status = "pass" if passed else "fail"
        record = {
            "id": str(fid),
            "status": status,
            "n": n_set,
            "digits": digits,
            "max_difference": _magnitude(max_diff),
        }
        line = f"{fid} {status.upper()} max_diff {record['max_difference']}"
        _print_record(args, record, [line])
    summary = {"passed": len(ids) - failures, "failed": failures}
    _print_record(args, summary, [f"passed {summary['passed']} failed {failures}"])
    return 1 if failures else 0


def cmd_bench(args) -> int:
    runs: list[float] = []
    if args.target == "digamma":
        if args.x is None:
            raise DomainError("bench digamma needs --x")
        x = _parse_real(args.x)
        catalog.digamma_details(x, args.digits)  # warm the number caches
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            _, terms, _ = catalog.digamma_details(x, args.digits)
            runs.append(time.perf_counter() - t0)
        params = {"x": args.x}
    else:
        if args.id is None or args.n is None:
            raise DomainError("bench eval needs --id and -n")
        catalog.evaluate(args.id, args.n, EvalContext(digits=args.digits))
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            rep = catalog.evaluate(args.id, args.n, EvalContext(digits=args.digits))
            runs.append(time.perf_counter() - t0)
        terms = rep.terms_used
        params = {"id": str(catalog.FormulaId.parse(args.id)), "n": args.n}
    record = {
        "target": args.target,
        **params,
        "digits": args.digits,
        "runs": args.repeat,
        "median_ms": _ms(statistics.median(runs)),
        "min_ms": _ms(min(runs)),
        "terms": terms,
    }
    lines = [f"{key} {value}" for key, value in record.items()]
    _print_record(args, record, lines)
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stirlingsum",
        description="Convergent inverse-factorial series for classical sums.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="list the catalog formulas")
    p.add_argument("--family", type=int, default=None, help="restrict to one family")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("coeffs", help="exact series coefficients of a formula")
    p.add_argument("id", help="formula id, e.g. 1.1")
    p.add_argument("-k", type=int, required=True, help="number of coefficients")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("eval", help="evaluate a formula's right-hand side at n")
    p.add_argument("id")
    p.add_argument("-n", type=_parse_count, required=True)
    p.add_argument("-d", "--digits", type=int, default=30)
    p.add_argument("--compare", action="store_true",
                   help="also run brute force and report the difference")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("digamma", help="digamma function at x > 0")
    p.add_argument("x")
    p.add_argument("-d", "--digits", type=int, default=30)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_digamma)

    p = sub.add_parser("recover", help="recover the unknown head constant")
    p.add_argument("id")
    p.add_argument("-d", "--digits", type=int, default=30)
    p.add_argument("--n0", type=int, default=None, help="starting anchor (>= 2)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("verify", help="check formulas against brute force")
    p.add_argument("--all", action="store_true")
    p.add_argument("--family", type=int, default=None)
    p.add_argument("-n", type=_parse_count, default=None,
                   help="single n value (default: domain_min+2, 10, 100)")
    p.add_argument("-d", "--digits", type=int, default=30)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="wall-time benchmarks")
    p.add_argument("target", choices=["digamma", "eval"])
    p.add_argument("--x", default=None, help="digamma argument")
    p.add_argument("--id", default=None, help="formula id for eval")
    p.add_argument("-n", type=_parse_count, default=None)
    p.add_argument("-d", "--digits", type=int, default=30)
    p.add_argument("-r", "--repeat", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonConvergenceError as exc:
        rep = exc.report
        record = {
            "error": "non-convergence",
            "message": str(exc),
            "terms": rep.terms_used,
            "est_error": _magnitude(rep.est_error),
        }
        lines = [f"error non-convergence: {exc}"]
        # a recovery that never converged has no partial constant estimate;
        # the report's value there is a raw series fragment, not the target
        if args.command != "recover":
            record["partial_value"] = format_decimal(rep.value, getattr(args, "digits", 30))
            lines.append(f"partial_value {record['partial_value']}")
        lines += [f"terms {rep.terms_used}", f"est_error {record['est_error']}"]
        _print_record(args, record, lines)
        return 3
    except ReferenceMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
