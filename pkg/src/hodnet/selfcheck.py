"""Published worked example and the self-check bundle run by ``hodnet verify``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as F
from typing import Optional

from .engine import generate_points
from .nets import GeneratorSet, golden_base_net, hammersley, interleave, interleave_t_bound
from .quality import NetQuality, is_talphabeta_net, propagation_derive, strict_t, strict_t_dual

# interleaving of the 4-dimensional (1,4,4)-net with d = 2
WORKED_C1 = ((1, 0, 0, 0), (0, 0, 0, 1), (0, 1, 0, 0), (0, 0, 1, 0))
WORKED_C2 = ((1, 1, 1, 1), (0, 1, 1, 0), (0, 1, 0, 1), (1, 1, 0, 1))

WORKED_POINTS = (
    (F(0), F(0)), (F(1, 2), F(9, 16)), (F(1, 8), F(15, 16)), (F(5, 8), F(3, 8)),
    (F(1, 16), F(3, 4)), (F(9, 16), F(5, 16)), (F(3, 16), F(3, 16)), (F(11, 16), F(5, 8)),
    (F(1, 4), F(11, 16)), (F(3, 4), F(1, 8)), (F(3, 8), F(1, 4)), (F(7, 8), F(13, 16)),
    (F(5, 16), F(7, 16)), (F(13, 16), F(7, 8)), (F(7, 16), F(1, 2)), (F(15, 16), F(1, 16)),
)


def worked_net() -> GeneratorSet:
    return interleave(golden_base_net(), 2)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _check_points(G: GeneratorSet) -> CheckResult:
    pts = generate_points(G).fractions()
    if len(pts) != len(WORKED_POINTS):
        return CheckResult("worked-example points", False, f"{len(pts)} points, expected 16")
    bad = [n for n, (p, q) in enumerate(zip(pts, WORKED_POINTS)) if tuple(p) != q]
    if bad:
        n = bad[0]
        got = ", ".join(str(v) for v in pts[n])
        want = ", ".join(str(v) for v in WORKED_POINTS[n])
        return CheckResult("worked-example points", False, f"point mismatch at n={n}: got ({got}), expected ({want})")
    return CheckResult("worked-example points", True, "16 of 16 match")


def _check_t(G: GeneratorSet, alpha: int, expect: int, label: str) -> CheckResult:
    t_def = strict_t(G, alpha).t
    t_dual = strict_t_dual(G, alpha).t
    ok = t_def == expect and t_dual == expect
    return CheckResult(f"{label} strict t at alpha={alpha}", ok, f"t={t_def} (dual route t={t_dual}, expected {expect})")


def run_checks(net: Optional[GeneratorSet] = None) -> list[CheckResult]:
    """Run every published-value check; ``net`` replaces the worked net."""
    G = worked_net() if net is None else net
    out = []
    if G.b != 2 or G.m != 4 or G.s != 2:
        return [CheckResult("worked-example net shape", False, f"b={G.b}, m={G.m}, s={G.s}, expected 2, 4, 2")]
    mats_ok = tuple(map(tuple, G.matrices[0].tolist())) == WORKED_C1 and tuple(
        map(tuple, G.matrices[1].tolist())
    ) == WORKED_C2
    out.append(CheckResult("worked-example generating matrices", mats_ok))
    out.append(_check_points(G))
    out.append(_check_t(G, 1, 1, "worked net"))
    out.append(_check_t(G, 2, 3, "worked net"))
    out.append(_check_t(hammersley(2, 4), 2, 4, "Hammersley m=4"))
    for m in (2, 4, 6, 8):
        out.append(_check_t(interleave(hammersley(2, m), 2), 2, 0, f"interleaved Hammersley m={m}"))
    out.append(
        CheckResult(
            "interleaving bound values",
            interleave_t_bound(1, 2, 2, 2) == 4 and interleave_t_bound(0, 1, 2, 2) == 1,
        )
    )
    derived = propagation_derive(NetQuality(3, 2, 2), 1, 4)
    out.append(
        CheckResult(
            "smoothness reduction (3,2,2) -> alpha'=1",
            (derived.t, derived.alpha, derived.beta) == (2, 1, 1) and is_talphabeta_net(G, 2, 1, 1),
            f"got ({derived.t}, {derived.alpha}, {derived.beta})",
        )
    )
    out.extend(_walsh_checks())
    return out


def _walsh_checks() -> list[CheckResult]:
    from .korobov import KorobovOrder, r_coeff, walsh_bernoulli_integral

    o = KorobovOrder(2)
    out = [CheckResult("r(0,0) = 1", r_coeff(0, 0, o).value == 1)]
    out.append(CheckResult("r(0,k) = 0 for k < 16", all(abs(r_coeff(0, k, o).value) == 0 for k in range(1, 16))))
    worst = 0.0
    for k in range(1, 9):
        for m in range(1, 4):
            lhs = r_coeff(k * 2**m, k * 2**m, o).real
            rhs = 2.0 ** (-4 * m) * r_coeff(k, k, o).real
            worst = max(worst, abs(lhs - rhs) / rhs)
    out.append(CheckResult("r(b^m k) = b^(-2 alpha m) r(k)", worst <= 1e-12, f"max rel. deviation {worst:.1e}"))
    vanish = max(abs(walsh_bernoulli_integral(k, 2, o)) for k in (3, 5, 6, 7, 9, 10))
    out.append(CheckResult("I_2(k) = 0 for two or more nonzero digits", vanish <= 1e-12, f"max |I_2| {vanish:.1e}"))
    return out


def format_report(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed} passed, {failed} failed")
    return "\n".join(lines) + "\n"


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)


__all__ = [
    "WORKED_C1",
    "WORKED_C2",
    "WORKED_POINTS",
    "CheckResult",
    "worked_net",
    "run_checks",
    "format_report",
    "all_passed",
]
