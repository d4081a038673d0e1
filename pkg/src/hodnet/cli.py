"""Command-line front end: ``hodnet construct|points|tvalue|wce|convergence|verify``.

Exit codes: 0 success, 2 bad arguments or input, 3 enumeration cap
exceeded, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .engine import (
    PointSet,
    apply_shift,
    default_shift_precision,
    generate_points,
    sample_shift,
    shift_sidecar,
)
from .errors import EnumerationCapExceeded, NumericalInconsistencyError
from .korobov import (
    KorobovOrder,
    convergence_csv,
    convergence_rows,
    fitted_slope,
    wce_shifted_mean,
    wce_squared,
)
from .nets import GeneratorSet, family_net
from .quality import certify, strict_t_dual
from .selfcheck import all_passed, format_report, run_checks

EXIT_OK = 0
EXIT_BAD_ARGS = 2
EXIT_CAP = 3
EXIT_VERIFY = 4


class _BadInput(Exception):
    pass


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _BadInput(f"cannot read {path}: {exc}") from exc


def _load_net(path: str) -> GeneratorSet:
    return GeneratorSet.from_json(_read_text(path))


def _beta(text: Optional[str], alpha: int) -> Fraction:
    if text is None:
        return Fraction(alpha)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise _BadInput(f"beta must be a rational p/q, got {text!r}") from exc


def _m_range(text: str) -> list[int]:
    try:
        lo, hi = (int(v) for v in text.split(".."))
    except ValueError as exc:
        raise _BadInput(f"--m-range must look like a..b, got {text!r}") from exc
    return list(range(lo, hi + 1))


def cmd_construct(args) -> int:
    if args.family == "interleaved":
        G = family_net(args.source, args.base, args.m, args.s, args.d)
    else:
        if args.d != 1:
            raise _BadInput("--d applies to the interleaved family only")
        G = family_net(args.family, args.base, args.m, args.s)
    _emit(G.to_json(), args.output)
    return EXIT_OK


def cmd_points(args) -> int:
    G = _load_net(args.net)
    P = generate_points(G)
    if args.shift_seed is not None:
        prec = args.shift_precision or max(G.m, default_shift_precision(G.b))
        sh = sample_shift(G.b, G.s, prec, args.shift_seed)
        P = apply_shift(P, sh)
        sidecar = args.sidecar or (f"{args.output}.shift.json" if args.output else "points.shift.json")
        Path(sidecar).write_text(shift_sidecar(sh, args.shift_seed), encoding="utf-8")
    _emit(P.to_csv(decimal=args.decimal), args.output)
    return EXIT_OK


def cmd_tvalue(args) -> int:
    G = _load_net(args.net)
    beta = _beta(args.beta, args.alpha)
    q = certify(G, args.alpha, beta, method=args.method)
    report = q.to_report(args.method)
    if args.method == "definition":
        try:
            other = strict_t_dual(G, args.alpha, beta)
        except EnumerationCapExceeded:
            other = None
        if other is not None and other.t != q.t:
            sys.stderr.write(f"definition search gives t={q.t}, dual route gives t={other.t}\n")
            _emit(_dump_json(report), args.output)
            return EXIT_VERIFY
    _emit(_dump_json(report), args.output)
    return EXIT_OK


def _load_points(path: str, base: Optional[int]) -> PointSet:
    text = _read_text(path)
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return generate_points(GeneratorSet.from_json(text))
    return PointSet.from_csv(text, base)


def cmd_wce(args) -> int:
    P = _load_points(args.input, args.base)
    ord = KorobovOrder(args.alpha, P.b)
    if args.shifted:
        res = wce_shifted_mean(P, ord, args.samples, args.seed)
        out = {"alpha": args.alpha, "mean": res.mean, "samples": args.samples, "seed": args.seed, "stderr": res.stderr}
    else:
        e2 = wce_squared(P, ord)
        out = {"alpha": args.alpha, "e": math.sqrt(e2), "e2": e2}
    _emit(_dump_json(out), args.output)
    return EXIT_OK


def cmd_convergence(args) -> int:
    ms = _m_range(args.m_range)
    nets = (family_net(args.family, args.base, m, args.s, args.d) for m in ms[:: args.step])
    rows = convergence_rows(nets, KorobovOrder(args.alpha, args.base))
    _emit(convergence_csv(rows, fitted_slope(rows)), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    net = _load_net(args.net) if args.net else None
    results = run_checks(net)
    sys.stdout.write(format_report(results))
    return EXIT_OK if all_passed(results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hodnet", description="Higher order digital nets over Z_b.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="write generating matrices as JSON")
    c.add_argument("family", choices=["hammersley", "faure", "identity", "interleaved"])
    c.add_argument("--base", "-b", type=int, default=2)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--s", type=int, default=None, help="dimension before interleaving")
    c.add_argument("--d", type=int, default=1)
    c.add_argument("--from", dest="source", choices=["hammersley", "faure", "identity"], default="hammersley")
    c.add_argument("--output", "-o")
    c.set_defaults(func=cmd_construct)

    pt = sub.add_parser("points", help="write the net's points as CSV")
    pt.add_argument("net")
    pt.add_argument("--shift-seed", type=int, default=None)
    pt.add_argument("--shift-precision", type=int, default=None)
    pt.add_argument("--sidecar", default=None, help="shift record path")
    pt.add_argument("--decimal", action="store_true")
    pt.add_argument("--output", "-o")
    pt.set_defaults(func=cmd_points)

    t = sub.add_parser("tvalue", help="strict t-value certification")
    t.add_argument("net")
    t.add_argument("--alpha", type=int, required=True)
    t.add_argument("--beta", default=None, help="rational p/q, default alpha")
    t.add_argument("--method", choices=["definition", "dual"], default="definition")
    t.add_argument("--output", "-o")
    t.set_defaults(func=cmd_tvalue)

    w = sub.add_parser("wce", help="worst-case error in the Korobov space")
    w.add_argument("input", help="net JSON or point CSV")
    w.add_argument("--alpha", type=int, required=True, choices=[1, 2, 3])
    w.add_argument("--base", type=int, default=None, help="base of a point CSV")
    w.add_argument("--shifted", action="store_true")
    w.add_argument("--samples", type=int, default=100)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--output", "-o")
    w.set_defaults(func=cmd_wce)

    cv = sub.add_parser("convergence", help="wce against N over a range of m")
    cv.add_argument("--family", choices=["hammersley", "faure", "identity"], required=True)
    cv.add_argument("--base", "-b", type=int, default=2)
    cv.add_argument("--s", type=int, default=None)
    cv.add_argument("--d", type=int, default=1)
    cv.add_argument("--alpha", type=int, required=True, choices=[1, 2, 3])
    cv.add_argument("--m-range", required=True, help="a..b inclusive")
    cv.add_argument("--step", type=int, default=1)
    cv.add_argument("--output", "-o")
    cv.set_defaults(func=cmd_convergence)

    v = sub.add_parser("verify", help="run the worked-example checks")
    v.add_argument("--net", default=None, help="replace the worked net (negative control)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "step", 1) < 1:
            raise _BadInput("--step must be >= 1")
        if getattr(args, "samples", 2) < 2:
            raise _BadInput("--samples must be >= 2")
        return args.func(args)
    except EnumerationCapExceeded as exc:
        sys.stderr.write(f"hodnet: enumeration cap exceeded: {exc}\n")
        return EXIT_CAP
    except NumericalInconsistencyError as exc:
        sys.stderr.write(f"hodnet: {exc}\n")
        return EXIT_VERIFY
    except (_BadInput, ValueError) as exc:
        sys.stderr.write(f"hodnet: {exc}\n")
        return EXIT_BAD_ARGS


if __name__ == "__main__":
    sys.exit(main())
