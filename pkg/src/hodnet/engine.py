"""Exact digital-net points, b-adic digit arithmetic, Walsh functions and digital shifts.

Coordinates are kept as integer numerators over b**m; nothing in this module
touches floating point except the complex value returned alongside a Walsh
exponent.
"""

from __future__ import annotations

import cmath
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .gf import is_prime, matmul_mod
from .nets import GeneratorSet

# b**p must stay below 2**63 so numerators fit int64
_INT64_LIMIT = 2**63


def default_shift_precision(b: int) -> int:
    """Digits of a base-b shift carrying about as much as a double's mantissa."""
    return int(math.floor(53 * math.log(2) / math.log(b) + 1e-12))


def _check_precision(b: int, m: int) -> None:
    if b**m >= _INT64_LIMIT:
        raise ValueError(f"precision b**m = {b}**{m} does not fit 64-bit numerators")


@dataclass(frozen=True, eq=False)
class PointSet:
    """N points in [0,1)^s with coordinates ``points[n, j] / b**m``."""

    b: int
    m: int
    points: np.ndarray

    def __post_init__(self):
        if not is_prime(self.b):
            raise ValueError(f"base {self.b} is not prime")
        _check_precision(self.b, self.m)
        pts = np.array(self.points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("points must be an N x s array")
        if pts.size and (pts.min() < 0 or pts.max() >= self.b**self.m):
            raise ValueError("numerators must lie in 0..b**m - 1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.b == other.b and self.m == other.m and np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash((self.b, self.m, self.points.tobytes()))

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> int:
        return self.points.shape[1]

    @property
    def denominator(self) -> int:
        return self.b**self.m

    def coords(self, dtype=np.float64) -> np.ndarray:
        return self.points.astype(dtype) / dtype(self.denominator)

    def fractions(self) -> list[tuple[Fraction, ...]]:
        den = self.denominator
        return [tuple(Fraction(int(v), den) for v in row) for row in self.points]

    def to_csv(self, decimal: bool = False) -> str:
        out = io.StringIO()
        out.write(",".join(f"j{j + 1}" for j in range(self.s)) + "\n")
        den = self.denominator
        if decimal:
            digits = math.ceil(self.m * math.log10(self.b)) + 2
            for row in self.points:
                out.write(",".join(_decimal(int(v), den, digits) for v in row) + "\n")
        else:
            for row in self.points:
                out.write(",".join(f"{int(v)}/{den}" for v in row) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, b: Optional[int] = None) -> "PointSet":
        """Parse the exact-fraction CSV written by :meth:`to_csv`.

        Denominators must be powers of ``b``; if ``b`` is omitted it is read
        off the denominators.
        """
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("j"):
            raise ValueError("point CSV must start with a j1,...,js header")
        s = len(lines[0].split(","))
        rows = []
        for ln in lines[1:]:
            cells = ln.split(",")
            if len(cells) != s:
                raise ValueError(f"row has {len(cells)} entries, expected {s}: {ln!r}")
            try:
                rows.append([Fraction(c) for c in cells])
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"bad coordinate in {ln!r}") from exc
        dens = {f.denominator for row in rows for f in row}
        if b is None:
            big = max(dens)
            b = 2 if big == 1 else _smallest_factor(big)
        m = 0
        for den in dens:
            e = 0
            while den % b == 0:
                den //= b
                e += 1
            if den != 1:
                raise ValueError(f"denominator is not a power of {b}")
            m = max(m, e)
        m = max(m, 1)
        scale = b**m
        pts = np.array([[int(f * scale) for f in row] for row in rows], dtype=np.int64)
        return cls(b, m, pts.reshape(len(rows), s))


def _decimal(num: int, den: int, digits: int) -> str:
    q = Fraction(num, den)
    scaled = round(q * 10**digits)
    return f"{scaled // 10**digits}.{scaled % 10**digits:0{digits}d}"


def _smallest_factor(n: int) -> int:
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f
        f += 1
    return n


def _digits_lsb(n: np.ndarray, b: int, m: int) -> np.ndarray:
    """Base-b digits of each entry, least significant first; shape (..., m)."""
    n = np.asarray(n, dtype=np.int64)
    powers = b ** np.arange(m, dtype=np.int64)
    return (n[..., None] // powers) % b


def generate_points(G: GeneratorSet) -> PointSet:
    """All b**m points of the digital net, in index order."""
    b, m = G.b, G.m
    _check_precision(b, m)
    idx = np.arange(b**m, dtype=np.int64)
    nvec = _digits_lsb(idx, b, m)
    # y_1 is the most significant output digit
    weights = b ** np.arange(m - 1, -1, -1, dtype=np.int64)
    cols = []
    for C in G.matrices:
        y = matmul_mod(nvec, C.data.T, b)
        cols.append(y @ weights)
    return PointSet(b, m, np.stack(cols, axis=1))


def _digitwise(x, y, b: int, m: int, sign: int):
    if b == 2:
        return np.bitwise_xor(x, y) if isinstance(x, np.ndarray) or isinstance(y, np.ndarray) else x ^ y
    out = 0
    p = 1
    for _ in range(m):
        out = out + ((x // p % b + sign * (y // p % b)) % b) * p
        p *= b
    return out


def digit_add(x, y, b: int, m: int):
    """Digit-wise addition mod b of numerators with m base-b digits (no carries)."""
    return _digitwise(x, y, b, m, 1)


def digit_sub(x, y, b: int, m: int):
    return _digitwise(x, y, b, m, -1)


class WalshValue(NamedTuple):
    exponent: int
    value: complex


def walsh_exponent(k: int, x, b: int, m: int):
    """Exponent e with wal_k(x) = omega_b**e, for x = numerator / b**m.

    Digits of x beyond the m-th are zero, so only the lowest m digits of k
    contribute. Works elementwise on integer arrays ``x``.
    """
    e = 0 * x
    i = 0
    k = int(k)
    while k and i < m:
        kappa = k % b
        if kappa:
            e = e + kappa * (x // b ** (m - 1 - i) % b)
        k //= b
        i += 1
    return e % b


def walsh_eval(k: int, x: int, b: int, m: int) -> WalshValue:
    """k-th base-b Walsh function at the b-adic rational x / b**m."""
    if k < 0:
        raise ValueError("k must be non-negative")
    e = int(walsh_exponent(k, int(x), b, m))
    return WalshValue(e, cmath.exp(2j * math.pi * e / b))


def walsh_net_sum(G: GeneratorSet, k: Sequence[int]) -> int:
    """(1/b^m) sum_n wal_k(x_n): 1 when k is 0 or in the dual net, else 0."""
    if len(k) != G.s:
        raise ValueError(f"k must have {G.s} components")
    acc = np.zeros(G.m, dtype=np.int64)
    for C, kj in zip(G.matrices, k):
        kvec = _digits_lsb(np.array(int(kj) % G.b**G.m), G.b, G.m)
        acc = (acc + C.data.T @ kvec) % G.b
    return int(not acc.any())


@dataclass(frozen=True, eq=False)
class DigitShift:
    """Shift digits sigma[j, i] (i = 0 is the b^-1 digit) for each coordinate j."""

    b: int
    digits: np.ndarray

    def __post_init__(self):
        d = np.array(self.digits, dtype=np.int64)
        if d.ndim != 2:
            raise ValueError("shift digits must be an s x p array")
        if d.size and (d.min() < 0 or d.max() >= self.b):
            raise ValueError(f"shift digits must lie in 0..{self.b - 1}")
        _check_precision(self.b, d.shape[1])
        d.setflags(write=False)
        object.__setattr__(self, "digits", d)

    @property
    def s(self) -> int:
        return self.digits.shape[0]

    @property
    def p(self) -> int:
        return self.digits.shape[1]

    def numerators(self) -> np.ndarray:
        """Shift of each coordinate as a numerator over b**p."""
        weights = self.b ** np.arange(self.p - 1, -1, -1, dtype=np.int64)
        return self.digits @ weights

    def to_dict(self) -> dict:
        return {"b": self.b, "p": self.p, "s": self.s, "digits": self.digits.tolist()}


def zero_shift(b: int, s: int, p: int) -> DigitShift:
    return DigitShift(b, np.zeros((s, p), dtype=np.int64))


def sample_shift(b: int, s: int, p: Optional[int] = None, seed=None) -> DigitShift:
    """i.i.d. uniform shift digits from a seeded PCG64 generator.

    ``seed`` may be an int or an existing ``numpy.random.Generator``.
    """
    if p is None:
        p = default_shift_precision(b)
    if p < 1:
        raise ValueError("shift precision must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    # Generator.integers draws without modulo bias for any b
    return DigitShift(b, rng.integers(0, b, size=(s, p), dtype=np.int64))


def apply_shift(P: PointSet, sh: DigitShift) -> PointSet:
    """Digitally shift every point; the result carries sh.p digits."""
    if sh.b != P.b:
        raise ValueError("base mismatch between point set and shift")
    if sh.s != P.s:
        raise ValueError(f"shift has {sh.s} coordinates, point set has {P.s}")
    if sh.p < P.m:
        raise ValueError("shift precision must be at least the point precision")
    ext = P.points * P.b ** (sh.p - P.m)
    z = digit_add(ext, sh.numerators()[None, :], P.b, sh.p)
    return PointSet(P.b, sh.p, z)


def exhaustive_shift_average(k: int, l: int, x1: int, x2: int, b: int, p: int) -> complex:
    """Average of wal_k(x1 + sigma) * conj(wal_l(x2 + sigma)) over all b**p digit shifts.

    x1, x2 are numerators over b**p; + is digit-wise. The average is
    accumulated as residue counts, so it is exact for b = 2.
    """
    _check_precision(b, p)
    sig = np.arange(b**p, dtype=np.int64)
    e = (walsh_exponent(k, digit_add(np.int64(x1), sig, b, p), b, p)
         - walsh_exponent(l, digit_add(np.int64(x2), sig, b, p), b, p)) % b
    counts = np.bincount(np.asarray(e, dtype=np.int64).ravel(), minlength=b)
    if b == 2:
        return complex((int(counts[0]) - int(counts[1])) / 2**p)
    total = sum(int(c) * cmath.exp(2j * math.pi * r / b) for r, c in enumerate(counts))
    return total / b**p


def shift_sidecar(sh: DigitShift, seed) -> str:
    return json.dumps({"seed": seed, **sh.to_dict()}, sort_keys=True, separators=(",", ":")) + "\n"
