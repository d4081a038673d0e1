"""Exact linear algebra over the prime field Z_b.

Matrices are stored as small non-negative integers and every arithmetic step
is reduced mod b, so intermediate values never grow.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _inverse(a: int, b: int) -> int:
    return pow(int(a), b - 2, b)


class GFMatrix:
    """Immutable matrix over Z_b, b prime.

    Parameters
    ----------
    entries : array_like
        Two-dimensional integer data; every entry must already lie in
        ``0..b-1``.
    base : int
        The prime modulus b.
    """

    __slots__ = ("base", "_data")

    def __init__(self, entries, base: int):
        if not is_prime(base):
            raise ValueError(f"base {base} is not prime")
        data = np.array(entries, dtype=np.int64)
        if data.ndim != 2:
            if data.size == 0:
                data = data.reshape(0, 0)
            else:
                raise ValueError("GFMatrix needs two-dimensional entries")
        if data.size and (data.min() < 0 or data.max() >= base):
            raise ValueError(f"entries must lie in 0..{base - 1}")
        data.setflags(write=False)
        self.base = int(base)
        self._data = data

    @classmethod
    def identity(cls, n: int, base: int) -> "GFMatrix":
        return cls(np.eye(n, dtype=np.int64), base)

    @classmethod
    def zeros(cls, rows: int, cols: int, base: int) -> "GFMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), base)

    @property
    def data(self) -> np.ndarray:
        """Read-only ``(rows, cols)`` int64 view."""
        return self._data

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major entries."""
        return tuple(int(v) for v in self._data.ravel())

    def row(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._data[i])

    def tolist(self) -> list[list[int]]:
        return self._data.tolist()

    def transpose(self) -> "GFMatrix":
        return GFMatrix(self._data.T, self.base)

    @property
    def T(self) -> "GFMatrix":
        return self.transpose()

    def __matmul__(self, other: "GFMatrix") -> "GFMatrix":
        if not isinstance(other, GFMatrix):
            return NotImplemented
        if other.base != self.base:
            raise ValueError("base mismatch")
        return GFMatrix(matmul_mod(self._data, other._data, self.base), self.base)

    def __pow__(self, e: int) -> "GFMatrix":
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        result = np.eye(self.rows, dtype=np.int64)
        acc = self._data
        while e:
            if e & 1:
                result = matmul_mod(result, acc, self.base)
            acc = matmul_mod(acc, acc, self.base)
            e >>= 1
        return GFMatrix(result, self.base)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GFMatrix):
            return NotImplemented
        return (
            self.base == other.base
            and self.shape == other.shape
            and bool(np.array_equal(self._data, other._data))
        )

    def __hash__(self) -> int:
        return hash((self.base, self.shape, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"GFMatrix({self.tolist()!r}, base={self.base})"


def matmul_mod(a: np.ndarray, b_: np.ndarray, base: int) -> np.ndarray:
    """Product of integer matrices reduced mod ``base``.

    Entries are < base, so one product row sums at most ``n * (base-1)**2``;
    reduction after the matmul keeps everything far inside int64 for the sizes
    this package handles.
    """
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b_, dtype=np.int64)) % base


def _row_echelon(data: np.ndarray, base: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns.

    Pivot choice is the first nonzero entry in column order, which keeps the
    output deterministic.
    """
    a = np.array(data, dtype=np.int64) % base
    n_rows, n_cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        inv = _inverse(a[r, c], base)
        a[r] = (a[r] * inv) % base
        col = a[:, c].copy()
        col[r] = 0
        mask = col != 0
        if mask.any():
            a[mask] = (a[mask] - np.outer(col[mask], a[r])) % base
        pivots.append(c)
        r += 1
    return a, pivots


def rank(M: GFMatrix) -> int:
    """Z_b-rank of ``M``."""
    if M.rows == 0 or M.cols == 0:
        return 0
    _, pivots = _row_echelon(M.data, M.base)
    return len(pivots)


def rows_independent(rows: Sequence[Sequence[int]], b: int) -> bool:
    """True iff no nontrivial Z_b-combination of ``rows`` vanishes.

    The empty collection is independent.
    """
    rows = [tuple(int(v) for v in r) for r in rows]
    if not rows:
        return True
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("row vectors have mismatched lengths")
    if len(rows) > width:
        return False
    return rank(GFMatrix(rows, b)) == len(rows)


def nullspace_basis(M: GFMatrix) -> list[tuple[int, ...]]:
    """Basis of ``{v : M v = 0}`` over Z_b, one tuple per basis vector."""
    b = M.base
    n = M.cols
    if M.rows == 0:
        return [tuple(int(i == j) for i in range(n)) for j in range(n)]
    red, pivots = _row_echelon(M.data, b)
    pivot_set = set(pivots)
    basis = []
    for free in range(n):
        if free in pivot_set:
            continue
        v = np.zeros(n, dtype=np.int64)
        v[free] = 1
        for i, p in enumerate(pivots):
            v[p] = (-red[i, free]) % b
        basis.append(tuple(int(x) for x in v))
    check = matmul_mod(M.data, np.array(basis, dtype=np.int64).T, b) if basis else None
    if check is not None and check.any():
        raise ArithmeticError("nullspace vector failed M v = 0")
    return basis


class EchelonBasis:
    """Incrementally built echelon basis, used by the independence searches.

    ``add`` returns False as soon as an inserted vector reduces to zero, i.e.
    when the collection stops being independent. For b = 2 rows are packed
    into Python ints and reduced with XOR.
    """

    __slots__ = ("base", "_pivots")

    def __init__(self, base: int, pivots=None):
        self.base = base
        self._pivots = {} if pivots is None else pivots

    def copy(self) -> "EchelonBasis":
        return EchelonBasis(self.base, dict(self._pivots))

    def __len__(self) -> int:
        return len(self._pivots)

    def add(self, vec) -> bool:
        if self.base == 2:
            return self._add_binary(vec)
        b = self.base
        v = [int(x) % b for x in vec]
        for c in range(len(v)):
            x = v[c]
            if x == 0:
                continue
            prow = self._pivots.get(c)
            if prow is None:
                inv = _inverse(x, b)
                self._pivots[c] = [(y * inv) % b for y in v]
                return True
            v = [(y - x * z) % b for y, z in zip(v, prow)]
        return False

    def _add_binary(self, vec) -> bool:
        v = vec if isinstance(vec, int) else pack_binary(vec)
        while v:
            top = v.bit_length() - 1
            prow = self._pivots.get(top)
            if prow is None:
                self._pivots[top] = v
                return True
            v ^= prow
        return False


def pack_binary(vec: Iterable[int]) -> int:
    out = 0
    for x in vec:
        out = (out << 1) | (int(x) & 1)
    return out
