"""Generating-matrix families and the row-interleaving construction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .gf import GFMatrix, is_prime


@dataclass(frozen=True)
class DeclaredQuality:
    """A (t, alpha, beta) claim attached to a generator set (never asserted strict)."""

    t: int
    alpha: int
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "beta", Fraction(self.beta))
        if self.t < 0 or self.alpha < 1 or not (0 < self.beta <= self.alpha):
            raise ValueError(f"invalid declared quality {self}")

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "alpha": self.alpha,
            "beta_num": self.beta.numerator,
            "beta_den": self.beta.denominator,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeclaredQuality":
        return cls(int(d["t"]), int(d["alpha"]), Fraction(int(d["beta_num"]), int(d["beta_den"])))


@dataclass(frozen=True)
class GeneratorSet:
    """Generating matrices C_1..C_s (each m x m over Z_b) of a digital net."""

    b: int
    m: int
    s: int
    matrices: tuple[GFMatrix, ...]
    declared_quality: Optional[DeclaredQuality] = None

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        if not is_prime(self.b):
            raise ValueError(f"base {self.b} is not prime")
        if self.m < 1 or self.s < 1:
            raise ValueError("need m >= 1 and s >= 1")
        if len(self.matrices) != self.s:
            raise ValueError(f"expected {self.s} matrices, got {len(self.matrices)}")
        for C in self.matrices:
            if C.base != self.b or C.shape != (self.m, self.m):
                raise ValueError("every matrix must be m x m over the common base")

    @classmethod
    def from_arrays(cls, b: int, arrays: Sequence, declared_quality=None) -> "GeneratorSet":
        mats = tuple(GFMatrix(a, b) for a in arrays)
        return cls(b, mats[0].rows, len(mats), mats, declared_quality)

    def stacked_transpose(self) -> np.ndarray:
        """The m x (s*m) system [C_1^T | ... | C_s^T] whose kernel is the dual net."""
        return np.hstack([C.data.T for C in self.matrices])

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "m": self.m,
            "s": self.s,
            "matrices": [C.tolist() for C in self.matrices],
            "declared_quality": None if self.declared_quality is None else self.declared_quality.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSet":
        try:
            b, m, s = int(d["b"]), int(d["m"]), int(d["s"])
            mats = tuple(GFMatrix(a, b) for a in d["matrices"])
            dq = d.get("declared_quality")
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed generator set: {exc}") from exc
        return cls(b, m, s, mats, None if dq is None else DeclaredQuality.from_dict(dq))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSet":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(payload)


@dataclass(frozen=True)
class SequenceGenerator:
    """Infinite generating matrices given by an entry oracle.

    ``entry(j, k, l)`` returns row k, column l (all 0-based) of C_{j+1}.
    """

    b: int
    s: int
    entry: Callable[[int, int, int], int] = field(compare=False)
    t_prime: Optional[int] = None

    def truncate(self, m: int) -> GeneratorSet:
        mats = []
        for j in range(self.s):
            a = [[self.entry(j, k, l) % self.b for l in range(m)] for k in range(m)]
            mats.append(GFMatrix(a, self.b))
        dq = None
        if self.t_prime is not None and self.t_prime <= m:
            dq = DeclaredQuality(self.t_prime, 1, Fraction(1))
        return GeneratorSet(self.b, m, self.s, tuple(mats), dq)


def hammersley(b: int, m: int) -> GeneratorSet:
    """Two-dimensional Hammersley net: identity and anti-diagonal matrices."""
    if m < 1:
        raise ValueError("m must be >= 1")
    eye = np.eye(m, dtype=np.int64)
    return GeneratorSet(
        b, m, 2, (GFMatrix(eye, b), GFMatrix(eye[::-1], b)), DeclaredQuality(0, 1, Fraction(1))
    )


def identity_net(b: int, m: int) -> GeneratorSet:
    """One-dimensional net with C_1 = I (the van der Corput net)."""
    return GeneratorSet(b, m, 1, (GFMatrix.identity(m, b),), DeclaredQuality(0, 1, Fraction(1)))


def _pascal_power_entry(b: int, j: int, k: int, l: int) -> int:
    # (P^j)[k][l] = binom(l, k) * j^(l-k)
    if k > l:
        return 0
    return (math.comb(l, k) % b) * pow(j, l - k, b) % b


def faure(b: int, m: int, s: int) -> GeneratorSet:
    """Faure net: C_j = P^(j-1) mod b with P[k][l] = binom(l, k)."""
    if not is_prime(b):
        raise ValueError(f"base {b} is not prime")
    if s > b:
        raise ValueError(f"Faure construction needs s <= b (s={s}, b={b})")
    if m < 1 or s < 1:
        raise ValueError("need m >= 1 and s >= 1")
    mats = tuple(
        GFMatrix([[_pascal_power_entry(b, j, k, l) for l in range(m)] for k in range(m)], b)
        for j in range(s)
    )
    return GeneratorSet(b, m, s, mats, DeclaredQuality(0, 1, Fraction(1)))


def faure_sequence(b: int, s: int) -> SequenceGenerator:
    if s > b:
        raise ValueError(f"Faure construction needs s <= b (s={s}, b={b})")
    return SequenceGenerator(b, s, lambda j, k, l: _pascal_power_entry(b, j, k, l), 0)


def golden_base_net() -> GeneratorSet:
    """The digital (1,4,4)-net over Z_2 used as the worked interleaving input."""
    ham = hammersley(2, 4)
    c3 = [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]]
    c4 = [[0, 1, 1, 0], [1, 1, 0, 1], [0, 0, 0, 1], [0, 0, 1, 0]]
    mats = ham.matrices + (GFMatrix(c3, 2), GFMatrix(c4, 2))
    return GeneratorSet(2, 4, 4, mats, DeclaredQuality(1, 1, Fraction(1)))


def interleave_t_bound(t_prime: int, s: int, d: int, alpha: int) -> int:
    """t-value guaranteed for the interleaved net: min(a,d) t' + ceil(s (d-1) min(a,d) / 2)."""
    if t_prime < 0 or min(s, d, alpha) < 1:
        raise ValueError("need t_prime >= 0 and s, d, alpha >= 1")
    g = min(alpha, d)
    return g * t_prime + -(-(s * (d - 1) * g) // 2)


def _interleave_rows(n_rows: int, j: int, d: int) -> list[tuple[int, int]]:
    # 0-based: row l of C_j^(d) is row l // d of C_{j*d + l % d}
    return [(j * d + l % d, l // d) for l in range(n_rows)]


def interleave(G: GeneratorSet, d: int) -> GeneratorSet:
    """Interleave the rows of d consecutive matrices into one.

    Row l of the j-th output matrix is row v of input matrix u, with the
    1-based relation l = (v - j) d + u and (j-1) d < u <= j d.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if G.s % d:
        raise ValueError(f"dimension {G.s} is not divisible by d={d}")
    if d == 1:
        return G
    s_out = G.s // d
    mats = []
    for j in range(s_out):
        rows = [G.matrices[u].data[v] for u, v in _interleave_rows(G.m, j, d)]
        mats.append(GFMatrix(np.array(rows), G.b))
    dq = None
    if G.declared_quality is not None:
        tq = G.declared_quality
        if tq.alpha == 1 and tq.beta == 1:
            dq = DeclaredQuality(interleave_t_bound(tq.t, s_out, d, d), d, Fraction(d))
    return GeneratorSet(G.b, G.m, s_out, tuple(mats), dq)


def deinterleave(G: GeneratorSet, d: int) -> GeneratorSet:
    """Inverse of :func:`interleave`; rows the interleaving never reads are zero."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1:
        return G
    out = [np.zeros((G.m, G.m), dtype=np.int64) for _ in range(G.s * d)]
    for j in range(G.s):
        for l, (u, v) in enumerate(_interleave_rows(G.m, j, d)):
            out[u][v] = G.matrices[j].data[l]
    return GeneratorSet(G.b, G.m, G.s * d, tuple(GFMatrix(a, G.b) for a in out))


def interleave_sequence(S: SequenceGenerator, d: int) -> SequenceGenerator:
    if d < 1:
        raise ValueError("d must be >= 1")
    if S.s % d:
        raise ValueError(f"dimension {S.s} is not divisible by d={d}")
    if d == 1:
        return S
    inner = S.entry

    def entry(j: int, k: int, l: int) -> int:
        return inner(j * d + k % d, k // d, l)

    t = None
    if S.t_prime is not None:
        t = interleave_t_bound(S.t_prime, S.s // d, d, d)
    # the truncation's declared (t, 1, 1) would be wrong here, so carry none
    return _InterleavedSequence(S.b, S.s // d, entry, t, d)


@dataclass(frozen=True)
class _InterleavedSequence(SequenceGenerator):
    d: int = 1

    def truncate(self, m: int) -> GeneratorSet:
        G = SequenceGenerator(self.b, self.s, self.entry).truncate(m)
        dq = None
        if self.t_prime is not None and self.t_prime <= self.d * m:
            dq = DeclaredQuality(self.t_prime, self.d, Fraction(self.d))
        return GeneratorSet(G.b, G.m, G.s, G.matrices, dq)


def d_b_bounds(s: int, alpha: int, b: int) -> tuple[float, float]:
    """Lower and upper bounds on the least t of a (t, alpha, s)-sequence over Z_b."""
    if s < 1 or alpha < 1:
        raise ValueError("need s, alpha >= 1")
    lower = alpha * (s / b - 1 - math.log(((b - 1) * s + b + 1) / 2, b)) + 1
    upper = (
        alpha * (s - 1) * (3 * b - 1) / (b - 1)
        - alpha * (2 * b + 4) * math.sqrt(s - 1) / math.sqrt(b * b - 1)
        + 2 * alpha
        + s * alpha * (alpha - 1) / 2
    )
    return lower, upper


def family_net(family: str, b: int, m: int, s: Optional[int] = None, d: int = 1) -> GeneratorSet:
    """Build a named family at size m, then interleave with factor d.

    ``family`` is one of ``identity`` (s = 1), ``hammersley`` (s = 2) or
    ``faure`` (s <= b). ``s`` is the dimension before interleaving.
    """
    if family == "identity":
        G = identity_net(b, m)
    elif family == "hammersley":
        G = hammersley(b, m)
    elif family == "faure":
        if s is None:
            raise ValueError("faure needs s")
        G = faure(b, m, s)
    else:
        raise ValueError(f"unknown family {family!r}")
    if s is not None and G.s != s:
        raise ValueError(f"{family} nets have s={G.s}, not {s}")
    return interleave(G, d)
