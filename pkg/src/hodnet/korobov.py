"""Korobov kernel, worst-case errors and Walsh coefficients of the kernel.

The kernel of smoothness alpha is

    K_alpha(x, y) = 1 + kappa * B_{2 alpha}(|x - y|),
    kappa = (-1)**(alpha + 1) (2 pi)**(2 alpha) / (2 alpha)!,

with B_{2 alpha} the Bernoulli polynomial, and it is a product over
coordinates in higher dimension.

Walsh coefficients r(k, l) are integrals of the kernel against Walsh
functions. On a grid of b**a cells (a = number of base-b digits of
max(k, l)) both Walsh factors are constant, and the cell integrals of
|x - y|**j are polynomials in the cell distance. Every coefficient therefore
reduces to a few integer moments of the distance distribution of cell
pairs, which are counted exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Optional, Sequence

import mpmath
import numpy as np

from .engine import (
    PointSet,
    apply_shift,
    default_shift_precision,
    generate_points,
    sample_shift,
    walsh_exponent,
)
from .errors import EnumerationCapExceeded, NumericalInconsistencyError
from .gf import is_prime
from .nets import GeneratorSet
from .quality import dual_elements

# exact ascending coefficients of B_2, B_4, B_6
_BERNOULLI = {
    1: (Fraction(1, 6), Fraction(-1), Fraction(1)),
    2: (Fraction(-1, 30), Fraction(0), Fraction(1), Fraction(-2), Fraction(1)),
    3: (Fraction(1, 42), Fraction(0), Fraction(-1, 2), Fraction(0), Fraction(5, 2), Fraction(-3), Fraction(1)),
}

# b**(2a) cell pairs; k up to 2**13 in base 2 fits
DEFAULT_CELL_PAIR_CAP = 2**28

NEGATIVE_TOLERANCE = 1e-9

_MP_DPS = 50


@dataclass(frozen=True)
class KorobovOrder:
    """Smoothness alpha in {1, 2, 3} together with the Walsh base b.

    Attributes
    ----------
    alpha : int
    b : int
    bernoulli_coeffs : tuple of Fraction
        Ascending coefficients of B_{2 alpha}.
    """

    alpha: int
    b: int = 2

    def __post_init__(self):
        if self.alpha not in _BERNOULLI:
            raise ValueError(f"alpha must be 1, 2 or 3 (got {self.alpha})")
        if not is_prime(self.b):
            raise ValueError(f"base must be prime (got {self.b})")

    @property
    def bernoulli_coeffs(self) -> tuple[Fraction, ...]:
        return _BERNOULLI[self.alpha]

    def bernoulli(self, x):
        """B_{2 alpha}(x) by Horner's rule, in the dtype of x."""
        out = 0
        for c in reversed(self.bernoulli_coeffs):
            out = out * x + _as_dtype(c, x)
        return out

    def kappa_mp(self) -> mpmath.mpf:
        with mpmath.workdps(_MP_DPS):
            a = self.alpha
            return (-1) ** (a + 1) * (2 * mpmath.pi) ** (2 * a) / mpmath.factorial(2 * a)

    @property
    def kappa(self) -> float:
        return float(self.kappa_mp())

    def kappa_longdouble(self) -> np.longdouble:
        with mpmath.workdps(_MP_DPS):
            return np.longdouble(mpmath.nstr(self.kappa_mp(), 30))

    def zeta_sum(self) -> float:
        """2 zeta(2 alpha) = K(x, x) - 1."""
        return float(2 * mpmath.zeta(2 * self.alpha))


def _as_dtype(c: Fraction, x):
    if isinstance(x, np.ndarray) or isinstance(x, np.generic):
        dt = np.asarray(x).dtype
        if dt == np.longdouble:
            return np.longdouble(c.numerator) / np.longdouble(c.denominator)
        return dt.type(c.numerator / c.denominator)
    if isinstance(x, Fraction) or isinstance(x, int):
        return c
    return float(c)


def kernel(ord: KorobovOrder, x, y) -> float:
    """K_alpha(x, y); for vectors the one-dimensional factors are multiplied."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    f = 1.0 + ord.kappa * ord.bernoulli(np.abs(x - y))
    return float(np.prod(f, axis=-1)) if f.ndim == 1 else np.prod(f, axis=-1)


# ---------------------------------------------------------------------------
# worst-case error


def _exact_sum_1d(nums: np.ndarray, M: int, ord: KorobovOrder) -> Fraction:
    """sum_{n,h} B_{2 alpha}(|x_n - x_h|) exactly, for x = nums / M.

    Sorted prefix sums of integer powers give every sum_{n<h} (x_h - x_n)**p.
    """
    x = np.sort(np.asarray(nums, dtype=np.int64)).astype(object)
    N = len(x)
    coeffs = ord.bernoulli_coeffs
    pmax = len(coeffs) - 1
    powers = [np.ones(N, dtype=object)]
    for _ in range(pmax):
        powers.append(powers[-1] * x)
    # sums over n < h of x_n**i
    prefix = []
    for i in range(pmax + 1):
        c = np.cumsum(powers[i])
        prefix.append(np.concatenate(([0], c[:-1])))
    total = Fraction(N) * coeffs[0]  # diagonal pairs, |x - x| = 0
    for p, cp in enumerate(coeffs):
        if cp == 0:
            continue
        tp = 0
        for i in range(p + 1):
            tp += (-1) ** i * math.comb(p, i) * int(np.dot(powers[p - i], prefix[i]))
        total += 2 * cp * Fraction(tp, M**p)
    return total


def _direct_sum(P: PointSet, ord: KorobovOrder, block_elems: int = 1 << 20) -> np.longdouble:
    """sum_{n,h} (K(x_n, x_h) - 1) as the plain O(N^2) double sum in long double."""
    ld = np.longdouble
    M = P.denominator
    N, s = P.N, P.s
    kap = ord.kappa_longdouble()
    pts = P.points
    table = None
    if M <= 1 << 22:
        table = kap * ord.bernoulli(np.arange(M, dtype=ld) / ld(M))
    rows = max(1, block_elems // max(N, 1))
    total = ld(0)
    comp = ld(0)
    for start in range(0, N, rows):
        blk = pts[start:start + rows]
        g = np.zeros((len(blk), N), dtype=ld)
        for j in range(s):
            d = np.abs(blk[:, j, None] - pts[None, :, j])
            if table is not None:
                f = table[d]
            else:
                f = kap * ord.bernoulli(d.astype(ld) / ld(M))
            g += f + g * f
        part = np.sum(g)
        # Neumaier accumulation of the block partials
        t = total + part
        if abs(total) >= abs(part):
            comp += (total - t) + part
        else:
            comp += (part - t) + total
        total = t
    return total + comp


def wce_squared(P: PointSet, ord: KorobovOrder, method: str = "auto") -> float:
    """e^2(P, K_alpha) = -1 + N^-2 sum_{n,h} K_alpha(x_n, x_h).

    ``method`` is ``direct`` (the O(N^2) sum in long double), ``exact``
    (exact rational moments, one-dimensional sets only) or ``auto``, which
    takes ``exact`` when s = 1. Values below -1e-9 raise
    NumericalInconsistencyError; smaller negatives are clamped to 0.
    """
    if P.N < 1:
        raise ValueError("empty point set")
    if ord.b != P.b:
        ord = KorobovOrder(ord.alpha, P.b)
    if method == "auto":
        method = "exact" if P.s == 1 else "direct"
    if method == "exact":
        if P.s != 1:
            raise ValueError("exact method needs a one-dimensional point set")
        S = _exact_sum_1d(P.points[:, 0], P.denominator, ord)
        with mpmath.workdps(_MP_DPS):
            e2 = float(ord.kappa_mp() * mpmath.mpf(S.numerator) / S.denominator / P.N**2)
    elif method == "direct":
        e2 = float(_direct_sum(P, ord) / np.longdouble(P.N) ** 2)
    else:
        raise ValueError(f"unknown method {method!r}")
    if e2 < -NEGATIVE_TOLERANCE:
        raise NumericalInconsistencyError(f"squared worst-case error {e2} is negative")
    return max(e2, 0.0)


def wce(P: PointSet, ord: KorobovOrder, method: str = "auto") -> float:
    return math.sqrt(wce_squared(P, ord, method))


class ShiftedMean(NamedTuple):
    mean: float
    stderr: float


def wce_shifted_mean(
    G: GeneratorSet,
    ord: KorobovOrder,
    samples: int,
    seed=None,
    p: Optional[int] = None,
    shifts: Optional[Iterable] = None,
) -> ShiftedMean:
    """Monte Carlo mean of e^2 over i.i.d. digital shifts, with its standard error.

    ``G`` may also be a PointSet. ``shifts`` overrides sampling with an
    explicit sequence of DigitShift.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    P = G if isinstance(G, PointSet) else generate_points(G)
    if shifts is None:
        rng = np.random.default_rng(seed)
        if p is None:
            p = max(P.m, default_shift_precision(P.b))
        shifts = (sample_shift(P.b, P.s, p, rng) for _ in range(samples))
    vals = []
    for sh in shifts:
        vals.append(wce_squared(apply_shift(P, sh), ord))
        if len(vals) == samples:
            break
    if len(vals) < samples:
        raise ValueError("fewer shifts than samples")
    v = np.array(vals)
    return ShiftedMean(float(v.mean()), float(v.std(ddof=1) / math.sqrt(samples)))


# ---------------------------------------------------------------------------
# Walsh coefficients


@dataclass(frozen=True)
class RCoefficient:
    k: int
    l: int
    value: complex

    @property
    def real(self) -> float:
        return self.value.real


def _num_digits(k: int, b: int) -> int:
    a = 0
    while k:
        k //= b
        a += 1
    return a


@lru_cache(maxsize=4096)
def _distance_counts(k: int, l: int, b: int, a: int) -> np.ndarray:
    """counts[e, delta]: cell pairs (u, v) with |u - v| = delta and E_l(v) - E_k(u) = e mod b.

    E_k(u) is the Walsh exponent of k on cell u. Correlations of one-hot
    residue indicators are taken by FFT and rounded; every count is below
    b**a, far inside the exactly representable range.
    """
    N = b**a
    if N == 1:
        out = np.zeros((b, 1), dtype=np.int64)
        out[0, 0] = 1
        return out
    cells = np.arange(N, dtype=np.int64)
    ek = np.asarray(walsh_exponent(k, cells, b, a), dtype=np.int64) % b
    el = np.asarray(walsh_exponent(l, cells, b, a), dtype=np.int64) % b
    L = 2 * N
    A = np.zeros((b, N))
    B = np.zeros((b, N))
    A[ek, cells] = 1.0
    B[el, cells] = 1.0
    FA = np.conj(np.fft.rfft(A, n=L, axis=1))
    FB = np.fft.rfft(B, n=L, axis=1)
    out = np.zeros((b, N), dtype=np.int64)
    for e in range(b):
        prod = sum(FA[r] * FB[(r + e) % b] for r in range(b))
        c = np.rint(np.fft.irfft(prod, n=L)).astype(np.int64)
        # c[d] counts v - u = d, negative d wrapped to the end
        out[e, 0] = c[0]
        out[e, 1:] = c[1:N] + c[L - 1:N:-1]
    if out.sum() != N * N or out.min() < 0:
        raise ArithmeticError("cell pair counts are inconsistent")
    return out


def _moments(counts: np.ndarray, pmax: int) -> list[int]:
    """sum_{delta >= 1} counts[delta] * delta**p for p = 0..pmax, exactly."""
    n = len(counts)
    if n <= 1:
        return [0] * (pmax + 1)
    c = counts[1:]
    delta = np.arange(1, n, dtype=np.int64)
    if float(n) ** (pmax + 2) < 2.0**62:
        out, acc = [], c.copy()
        for _ in range(pmax + 1):
            out.append(int(acc.sum()))
            acc = acc * delta
        return out
    co = c.astype(object)
    do = delta.astype(object)
    out, acc = [], co
    for _ in range(pmax + 1):
        out.append(int(acc.sum()))
        acc = acc * do
    return out


def _cell_integral_sums(counts_e: np.ndarray, b: int, a: int, jmax: int) -> list[Fraction]:
    """S_j = sum over counted pairs of the cell integral of |x - y|**j, j = 0..jmax.

    Same cell: 2 / (b^(a(j+2)) (j+1)(j+2)). Cells at distance delta >= 1:
    ((delta+1)^(j+2) + (delta-1)^(j+2) - 2 delta^(j+2)) / (b^(a(j+2)) (j+1)(j+2)).
    """
    mom = _moments(counts_e, jmax)
    same = int(counts_e[0])
    out = []
    for j in range(jmax + 1):
        # the distinct-cell numerator is 2 sum_{i even >= 2} C(j+2, i) delta^(j+2-i)
        num = 2 * same
        for i in range(2, j + 3, 2):
            num += 2 * math.comb(j + 2, i) * mom[j + 2 - i]
        out.append(Fraction(num, b ** (a * (j + 2)) * (j + 1) * (j + 2)))
    return out


def _check_cap(b: int, a: int, cap: Optional[int]) -> None:
    cap = DEFAULT_CELL_PAIR_CAP if cap is None else cap
    if b ** (2 * a) > cap:
        raise EnumerationCapExceeded(f"{b}^{2 * a} cell pairs exceed the cap {cap}")


def _residue_sums(k: int, l: int, ord: KorobovOrder, cap: Optional[int]) -> list[Fraction]:
    """R_e = sum_j c_j * (cell-integral sum of |x-y|^j over pairs with residue e)."""
    b = ord.b
    a = _num_digits(max(k, l), b)
    _check_cap(b, a, cap)
    counts = _distance_counts(k, l, b, a)
    coeffs = ord.bernoulli_coeffs
    out = []
    for e in range(b):
        S = _cell_integral_sums(counts[e], b, a, len(coeffs) - 1)
        out.append(sum((c * s for c, s in zip(coeffs, S)), Fraction(0)))
    return out


def _root_sum(vals: Sequence[Fraction], b: int, scale) -> complex:
    """scale * sum_e omega_b**e vals[e] at high precision."""
    if b == 2:
        diff = vals[0] - vals[1]
        with mpmath.workdps(_MP_DPS):
            return complex(float(scale * mpmath.mpf(diff.numerator) / diff.denominator), 0.0)
    with mpmath.workdps(_MP_DPS):
        acc = mpmath.mpc(0)
        for e, v in enumerate(vals):
            if v:
                acc += mpmath.expjpi(mpmath.mpf(2 * e) / b) * mpmath.mpf(v.numerator) / v.denominator
        acc *= scale
        return complex(acc)


def r_coeff(k: int, l: int, ord: KorobovOrder, cap: Optional[int] = None) -> RCoefficient:
    """Walsh coefficient r_{b,alpha}(k, l) of the one-dimensional kernel.

    r(k, l) = int int K_alpha(x, y) conj(wal_k(x)) wal_l(y) dx dy, evaluated
    exactly up to the final rounding to a double.
    """
    if k < 0 or l < 0:
        raise ValueError("k and l must be non-negative")
    if k == 0 and l == 0:
        return RCoefficient(0, 0, complex(1.0))
    vals = _residue_sums(int(k), int(l), ord, cap)
    value = _root_sum(vals, ord.b, ord.kappa_mp())
    if k == l:
        value = complex(value.real, 0.0)
    return RCoefficient(int(k), int(l), value)


def r_vec(k: Sequence[int], ord: KorobovOrder, cap: Optional[int] = None) -> float:
    """r_{b,alpha}(k) = prod_j r(k_j, k_j)."""
    out = 1.0
    for kj in k:
        out *= r_coeff(int(kj), int(kj), ord, cap).real
    return out


def walsh_bernoulli_integral(k: int, j: int, ord: KorobovOrder, cap: Optional[int] = None) -> complex:
    """I_j(k) = int int |x - y|**j conj(wal_k(x)) wal_k(y) dx dy."""
    if k < 0 or j < 0:
        raise ValueError("k and j must be non-negative")
    b = ord.b
    a = _num_digits(int(k), b)
    _check_cap(b, a, cap)
    counts = _distance_counts(int(k), int(k), b, a)
    vals = [_cell_integral_sums(counts[e], b, a, j)[j] for e in range(b)]
    return _root_sum(vals, b, 1)


def r_table(K: int, ord: KorobovOrder, cap: Optional[int] = None) -> np.ndarray:
    """r(k, k) for k = 0..K-1."""
    return np.array([r_coeff(k, k, ord, cap).real for k in range(K)])


def rr_cauchy_check(k: int, l: int, ord: KorobovOrder, slack: float = 1e-12) -> bool:
    """|r(k, l)|^2 <= r(k, k) r(l, l), up to a relative slack."""
    rkl = abs(r_coeff(k, l, ord).value) ** 2
    bound = r_coeff(k, k, ord).real * r_coeff(l, l, ord).real
    return rkl <= bound * (1 + slack) + slack * 1e-300


# ---------------------------------------------------------------------------
# dual-net series


def _lifted_sums(G: GeneratorSet, ord: KorobovOrder, extension: int, fn) -> np.ndarray:
    """lifted[h] = sum_{l < b^extension} fn(r(h + b^m l)) for h < b^m."""
    if extension < 0:
        raise ValueError("extension must be >= 0")
    bm = G.b**G.m
    table = fn(r_table(bm * G.b**extension, KorobovOrder(ord.alpha, G.b)))
    return table.reshape(G.b**extension, bm).sum(axis=0)


def _dual_series(G: GeneratorSet, ord: KorobovOrder, extension: int, fn, cap) -> float:
    lifted = _lifted_sums(G, ord, extension, fn)
    weights = G.b ** np.arange(G.m, dtype=np.int64)
    total = float(lifted[0]) ** G.s
    for vecs in dual_elements(G, cap):
        idx = vecs @ weights  # (n, s) components of h
        total += math.fsum(np.prod(lifted[idx], axis=1))
    return total


def dual_wce_series(G: GeneratorSet, ord: KorobovOrder, extension: int = 0, cap=None) -> float:
    """Truncated mean square error over digital shifts: sum of r(k) over the dual net.

    Dual vectors are written k = h + b^m l with h in the dual net inside
    [0, b^m)^s (or h = 0) and every l_j < b^extension.
    """
    return _dual_series(G, ord, extension, lambda r: r, cap) - 1.0


def dual_sqrt_series(G: GeneratorSet, ord: KorobovOrder, extension: int = 0, cap=None) -> float:
    """Truncated sum of sqrt(r(k)) over the dual net, an upper-bound witness for e."""
    return _dual_series(G, ord, extension, np.sqrt, cap) - 1.0


def walsh_decay_ratios(ord: KorobovOrder, kmax: int) -> np.ndarray:
    """sqrt(r(k)) / q_{b,alpha}(k) for k = 1..kmax-1."""
    from .quality import mu_weight

    r = r_table(kmax, ord)
    q = np.array([float(ord.b) ** -mu_weight(k, ord.b, ord.alpha) for k in range(kmax)])
    return np.sqrt(r[1:]) / q[1:]


# ---------------------------------------------------------------------------
# convergence sweeps


@dataclass(frozen=True)
class ConvergenceRow:
    m: int
    N: int
    wce: float
    log_b_wce: float
    slope: float


def convergence_rows(nets: Iterable[GeneratorSet], ord: KorobovOrder) -> list[ConvergenceRow]:
    """wce per net; slope is the finite difference of log wce over log N."""
    rows: list[ConvergenceRow] = []
    for G in nets:
        e = wce(generate_points(G), KorobovOrder(ord.alpha, G.b))
        N = G.b**G.m
        lb = math.log(e, G.b) if e > 0 else -math.inf
        slope = math.nan
        if rows:
            prev = rows[-1]
            slope = (math.log(e) - math.log(prev.wce)) / (math.log(N) - math.log(prev.N))
        rows.append(ConvergenceRow(G.m, N, e, lb, slope))
    return rows


def fitted_slope(rows: Sequence[ConvergenceRow], top_half: bool = True) -> float:
    """Least-squares slope of log wce against log N.

    With ``top_half`` only the last ceil(n/2) rows (at least two) enter.
    """
    if len(rows) < 2:
        return math.nan
    use = rows[-max(2, -(-len(rows) // 2)):] if top_half else rows
    x = np.log([r.N for r in use])
    y = np.log([r.wce for r in use])
    return float(np.polyfit(x, y, 1)[0])


CONVERGENCE_HEADER = "m,N,wce,log_b(wce),slope"


def convergence_csv(rows: Sequence[ConvergenceRow], fitted: Optional[float] = None) -> str:
    lines = [CONVERGENCE_HEADER]
    for r in rows:
        slope = "" if math.isnan(r.slope) else repr(r.slope)
        lines.append(f"{r.m},{r.N},{r.wce!r},{r.log_b_wce!r},{slope}")
    if rows and fitted is not None and not math.isnan(fitted):
        lines.append(f"# fitted_slope={fitted!r}")
    return "\n".join(lines) + "\n"
