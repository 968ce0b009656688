"""Command line front end.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 precision exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import lcm
from typing import Optional, Sequence

from .arith import sieve_primes
from .biquad import (
    EXCLUDED_PRIMES,
    HypothesisError,
    PrimeTriple,
    conductor,
    field_of_triple,
    hilbert_class_field,
    verify_unramified,
)
from .quadfield import DEFAULT_BITS, PrecisionError
from .splitting import CertificateError, density_estimate, generator_prime_count
from .witness import ResidueSearchError, construct_u, least_qnr3, least_qr3, verify_certificate

SCHEMA_VERSION = 1
DEFAULT_GENERATOR_BOUND = 10**5
DEFAULT_DENSITY_BOUND = 10**6

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECISION = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _jsonable(value):
    if isinstance(value, bool) or value is None or isinstance(value, (float, str)):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    raise TypeError(f"cannot serialise {type(value).__name__}")


def record(kind: str, **fields) -> str:
    """One json-lines record; integers become decimal strings."""
    return json.dumps({"schema_version": SCHEMA_VERSION, "record": kind, **_jsonable(fields)})


def _triple(args) -> PrimeTriple:
    try:
        return PrimeTriple(args.q, args.k, args.r)
    except ValueError as exc:
        raise InputError(f"invalid triple ({args.q},{args.k},{args.r}): {exc}") from exc


def _bound(args, positional: Optional[int], default: int) -> int:
    value = positional if positional is not None else (args.bound if args.bound is not None else default)
    if value < 1:
        raise InputError("bounds must be positive")
    return value


def _table(header: Sequence[str], rows: list[Sequence]) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# -- class-number -------------------------------------------------------------


def class_number_row(triple: PrimeTriple, bits: int = DEFAULT_BITS) -> dict:
    fld = field_of_triple(triple, bits)
    return {
        "q": triple.q,
        "k": triple.k,
        "r": triple.r,
        "h_q": fld.sub1.h,
        "h_kr": fld.sub2.h,
        "h_qkr": fld.sub3.h,
        "unit_index": fld.unit_index,
        "h_K": fld.h_K,
    }


_CN_HEADER = ("(q,k,r)", "h(q)", "h(kr)", "h(qkr)", "unit_index", "h_K")


def _cn_cells(row: dict) -> tuple:
    return (f"({row['q']},{row['k']},{row['r']})", row["h_q"], row["h_kr"], row["h_qkr"], row["unit_index"], row["h_K"])


def cmd_class_number(args) -> int:
    row = class_number_row(_triple(args), args.precision)
    if args.format == "json-lines":
        print(record("class_number", **row))
    else:
        print(_table(_CN_HEADER, [_cn_cells(row)]))
    return EXIT_OK


# -- enumerate ----------------------------------------------------------------


def canonical_triples(bound: int) -> list[PrimeTriple]:
    """Eligible (q, k, r) up to ``bound``, one per field Q(sqrt q, sqrt kr).

    {k, r} is unordered; r holds the prime = 1 mod 4 when only one of them is,
    otherwise k < r.
    """
    primes = [p for p in sieve_primes(bound) if p not in EXCLUDED_PRIMES]
    out = []
    for q in primes:
        for a, b in combinations([p for p in primes if p != q], 2):
            if a % 4 == 3 and b % 4 == 3:
                continue
            if a % 4 == 1 and b % 4 == 3:
                a, b = b, a
            out.append(PrimeTriple(q, a, b))
    return out


def _screen(job: tuple[list[PrimeTriple], int]) -> list[dict]:
    triples, bits = job
    rows = []
    for t in triples:
        fld = field_of_triple(t, 53)
        if 8 % (fld.sub1.h * fld.sub2.h * fld.sub3.h) or fld.h_K != 2:
            continue
        row = class_number_row(t, bits)
        if row["h_K"] == 2:
            rows.append(row)
    return rows


def enumerate_class_number_two(bound: int, bits: int = DEFAULT_BITS, workers: int = 1) -> list[dict]:
    """Rows with h_K = 2. A float64 pass screens every field; hits are recomputed at ``bits``.

    Since 4*h_K = Q*h1*h2*h3 with Q in {1, 2, 4, 8}, h_K = 2 needs h1*h2*h3 | 8,
    which rules most fields out before the costly unit index. Triples are
    grouped by q, so ``workers`` processes share no subfield work for Q(sqrt q).
    """
    by_q: dict[int, list[PrimeTriple]] = {}
    for t in canonical_triples(bound):
        by_q.setdefault(t.q, []).append(t)
    jobs = [(ts, bits) for ts in by_q.values()]
    if workers <= 1:
        parts = map(_screen, jobs)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_screen, jobs))
    rows = [row for part in parts for row in part]
    rows.sort(key=lambda r: (r["q"], r["k"], r["r"]))
    return rows


def cmd_enumerate(args) -> int:
    bound = _bound(args, args.limit, 0)
    rows = enumerate_class_number_two(bound, args.precision, args.threads) if bound >= 11 else []
    if args.format == "json-lines":
        for row in rows:
            print(record("enumerate", **row))
        return EXIT_OK
    for title, cls in (("q = 3 (mod 4)", 3), ("q = 1 (mod 4)", 1)):
        sub = [(f"({r['q']},{r['k']},{r['r']})", r["h_K"]) for r in rows if r["q"] % 4 == cls]
        print(title)
        print(_table(("(q,k,r)", "h_K"), sub))
        print()
    return EXIT_OK


# -- witness ------------------------------------------------------------------


def certificate_fields(cert, report) -> dict:
    prof = cert.sample_profile
    return {
        "q": cert.triple.q,
        "k": cert.triple.k,
        "r": cert.triple.r,
        "case_id": cert.case_id,
        "p1": cert.p1,
        "p2": cert.p2,
        "p3": cert.p3,
        "x0": cert.x0,
        "modulus": cert.modulus,
        "u": cert.u,
        "l": cert.l,
        "checks": dict(cert.checks),
        "sample_prime": cert.sample_prime,
        "sample_symbols": [prof.sym_q, prof.sym_k, prof.sym_r],
        "sample_f_K": prof.f_K,
        "sample_f_H": prof.f_H,
        "verified": report.passed,
        "verification": dict(report.checks),
        "notes": list(report.notes),
    }


def _eligible_triple(args) -> PrimeTriple:
    t = _triple(args)
    if not t.eligible:
        raise InputError(f"triple {t} is not eligible (need k or r = 1 mod 4, none of {sorted(EXCLUDED_PRIMES)})")
    return t


def cmd_witness(args) -> int:
    t = _eligible_triple(args)
    cert = construct_u(t)
    report = verify_certificate(cert)
    fields = certificate_fields(cert, report)
    if args.format == "json-lines":
        print(record("witness", **fields))
    else:
        for key in ("case_id", "p1", "p2", "p3", "x0", "modulus", "u", "l", "sample_prime"):
            print(f"{key:14} {fields[key]}")
        print(f"{'sample f_K/f_H':14} {fields['sample_f_K']}/{fields['sample_f_H']}")
        for name, ok in report.checks.items():
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
        for note in report.notes:
            print(f"NOTE  {note}")
    return EXIT_OK if report.passed else EXIT_FAIL


# -- density ------------------------------------------------------------------


def cmd_density(args) -> int:
    t = _triple(args)
    bound = _bound(args, args.X, DEFAULT_DENSITY_BOUND)
    if bound < 1000:
        raise InputError("density needs X >= 1000")
    rep = density_estimate(t, bound, args.threads)
    rows = [
        ("X_K", rep.count_XK, f"{rep.ratio_XK:.6f}", "0.250000"),
        ("X_H", rep.count_XH, f"{rep.ratio_XH:.6f}", "0.125000"),
        ("X_K\\X_H", rep.count_diff, f"{rep.ratio_diff:.6f}", "0.125000"),
    ]
    if args.format == "json-lines":
        print(
            record(
                "density",
                q=t.q, k=t.k, r=t.r, X=bound,
                total_primes=rep.total_primes,
                count_XK=rep.count_XK, count_XH=rep.count_XH, count_diff=rep.count_diff,
                ratio_XK=rep.ratio_XK, ratio_XH=rep.ratio_XH, ratio_diff=rep.ratio_diff,
                expected={"XK": 0.25, "XH": 0.125, "diff": 0.125},
            )
        )
    else:
        print(f"triple {t}  X = {bound}  unramified primes = {rep.total_primes}")
        print(_table(("set", "count", "ratio", "expected"), rows))
    return EXIT_OK


# -- verify-theorem -----------------------------------------------------------


@dataclass(frozen=True)
class Stage:
    name: str
    status: str  # PASS, FAIL or SKIP
    detail: str


def verify_theorem(t: PrimeTriple, bound: int = DEFAULT_GENERATOR_BOUND, bits: int = DEFAULT_BITS) -> list[Stage]:
    """Run every desk-checkable hypothesis for one triple, in order."""
    stages = []

    def add(name, ok, detail):
        stages.append(Stage(name, "PASS" if ok else "FAIL", detail))

    def skip(name, why):
        stages.append(Stage(name, "SKIP", why))

    add("eligibility", t.eligible, f"classes mod 4 = {t.classes_mod4}")
    try:
        row = class_number_row(t, bits)
        add("class_number", row["h_K"] == 2,
            f"h_K = {row['h_K']} (h = {row['h_q']},{row['h_kr']},{row['h_qkr']}, unit index {row['unit_index']})")
        h_ok = row["h_K"] == 2
    except PrecisionError as exc:
        add("class_number", False, str(exc))
        h_ok = False
    f_K = conductor((t.q, t.k * t.r))
    qkr = t.q * t.k * t.r
    l = 16 * qkr
    add("conductor", lcm(16, f_K) == l, f"f(K) = {f_K}, l = lcm(16, f(K)) = {l}")

    if not t.eligible:
        for name in ("hilbert_class_field", "unramified", "certificate", "generator_primes"):
            skip(name, "triple not eligible")
        return stages
    if h_ok:
        hcf = hilbert_class_field(t.q, t.k, t.r, bits)
        add("hilbert_class_field", True,
            f"H(K) = Q(sqrt {hcf.generators[0]}, sqrt {hcf.generators[1]}, sqrt {hcf.generators[2]}), conductor {hcf.conductor}")
    else:
        skip("hilbert_class_field", "h_K != 2")
    unr = verify_unramified(t.q, t.k, t.r)
    add("unramified", unr.ok,
        ", ".join(f"p={e.p}: Q(sqrt {e.auxiliary})" if e.ok else f"p={e.p}: none" for e in unr.evidence))
    try:
        cert = construct_u(t)
    except ResidueSearchError as exc:
        add("certificate", False, str(exc))
        skip("generator_primes", "no certificate")
        return stages
    report = verify_certificate(cert)
    add("certificate", report.passed,
        f"{cert.case_id}: p = ({cert.p1},{cert.p2},{cert.p3}), x0 = {cert.x0}, u = {cert.u}, l = {cert.l}")
    try:
        primes, count = generator_prime_count(t, cert.u, cert.modulus, bound)
        head = ", ".join(map(str, primes[:5])) + (", ..." if count > 5 else "")
        add("generator_primes", True, f"{count} primes <= {bound} in u + {cert.modulus}Z, all in X_K\\X_H [{head}]")
    except CertificateError as exc:
        add("generator_primes", False, str(exc))
    return stages


def cmd_verify_theorem(args) -> int:
    t = _triple(args)
    bound = _bound(args, args.X, DEFAULT_GENERATOR_BOUND)
    stages = verify_theorem(t, bound, args.precision)
    notes = [
        "unit surjectivity onto (O_K/P)^*: not checked",
        "growth x/(log x)^2: qualitative only",
    ]
    if args.format == "json-lines":
        for s in stages:
            print(record("stage", q=t.q, k=t.k, r=t.r, stage=s.name, status=s.status, detail=s.detail))
        verdict = all(s.status == "PASS" for s in stages)
        print(record("verdict", q=t.q, k=t.k, r=t.r, X=bound, passed=verdict, notes=notes))
    else:
        print(f"verify-theorem {t}  X = {bound}")
        for s in stages:
            print(f"{s.status:4}  {s.name:20} {s.detail}")
        for n in notes:
            print(f"NOTE  {n}")
        verdict = all(s.status == "PASS" for s in stages)
        print(f"VERDICT {'PASS' if verdict else 'FAIL'}")
    return EXIT_OK if verdict else EXIT_FAIL


# -- residue-search -----------------------------------------------------------


def residue_search_range(bound: int) -> tuple[int, int, list[int], list[int]]:
    """Run both searches over every eligible prime below ``bound``; returns counts and failures."""
    qr_fail, qnr_fail = [], []
    n_qr = n_qnr = 0
    for p in sieve_primes(bound - 1):
        if p not in EXCLUDED_PRIMES:
            n_qr += 1
            try:
                least_qr3(p)
            except ResidueSearchError:
                qr_fail.append(p)
        if p >= 5:
            n_qnr += 1
            try:
                least_qnr3(p)
            except ResidueSearchError:
                qnr_fail.append(p)
    return n_qr, n_qnr, qr_fail, qnr_fail


def cmd_residue_search(args) -> int:
    if args.p is not None:
        p = args.p
        try:
            qr = least_qr3(p) if p not in EXCLUDED_PRIMES else None
            qnr = least_qnr3(p) if p >= 5 else None
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        if args.format == "json-lines":
            print(record("residue_search", p=p, least_qr3=qr, least_qnr3=qnr))
        else:
            print(f"p = {p}: least_qr3 = {qr if qr is not None else '-'}, least_qnr3 = {qnr if qnr is not None else '-'}")
        return EXIT_OK
    bound = _bound(args, None, 0)
    n_qr, n_qnr, qr_fail, qnr_fail = residue_search_range(bound)
    ok = not qr_fail and not qnr_fail
    if args.format == "json-lines":
        print(record("residue_range", bound=bound, checked_qr=n_qr, checked_qnr=n_qnr,
                     qr_failures=qr_fail, qnr_failures=qnr_fail, passed=ok))
    else:
        print(f"primes < {bound}: least_qr3 checked {n_qr}, failures {len(qr_fail)}; "
              f"least_qnr3 checked {n_qnr}, failures {len(qnr_fail)}")
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json-lines"), default="table")
    common.add_argument("--threads", type=int, default=1, help="worker processes for prime scans")
    common.add_argument("--precision", type=int, default=DEFAULT_BITS, help="bits for the class number sum")
    common.add_argument("--bound", type=int, default=None, help="prime bound X")

    parser = argparse.ArgumentParser(prog="biquadeuclid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def triple_cmd(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        for n in ("q", "k", "r"):
            p.add_argument(n, type=int)
        p.set_defaults(func=func)
        return p

    triple_cmd("class-number", cmd_class_number, "h_K with subfield breakdown")
    triple_cmd("witness", cmd_witness, "construct and verify the integer u")
    triple_cmd("density", cmd_density, "empirical splitting densities").add_argument("X", type=int, nargs="?")
    triple_cmd("verify-theorem", cmd_verify_theorem, "check every hypothesis").add_argument("X", type=int, nargs="?")

    p = sub.add_parser("enumerate", parents=[common], help="eligible triples with h_K = 2")
    p.add_argument("limit", type=int, nargs="?")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("residue-search", parents=[common], help="least prime (non-)residues = 3 mod 4")
    p.add_argument("p", type=int, nargs="?")
    p.set_defaults(func=cmd_residue_search)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.threads < 1 or args.precision < 1 or (args.bound is not None and args.bound < 1):
        print("error: --threads, --precision and --bound must be positive", file=sys.stderr)
        return EXIT_INPUT
    # reported class numbers always come from at least 128-bit sums
    args.precision = max(args.precision, DEFAULT_BITS)
    try:
        return args.func(args)
    except (InputError, HypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrecisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
