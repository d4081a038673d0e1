"""Quality parameters (t, alpha, beta) of digital nets.

Two routes compute the strict t-value:

* the definition search, which checks linear independence of every admissible
  selection of generating-matrix rows, and
* the dual route, which enumerates the dual net inside [0, b^m)^s and takes
  the minimum weight ``mu_{b,alpha}``.

The definition search is normative; the dual route is an independent check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .errors import EnumerationCapExceeded, enum_cap
from .gf import EchelonBasis, GFMatrix, nullspace_basis, pack_binary
from .nets import GeneratorSet

INFINITE = math.inf

Weight = Union[int, float]


def _as_fraction(beta) -> Fraction:
    if isinstance(beta, str):
        return Fraction(beta)
    if isinstance(beta, float):
        return Fraction(beta).limit_denominator(10**6)
    return Fraction(beta)


@dataclass(frozen=True)
class NetQuality:
    t: int
    alpha: int
    beta: Fraction
    strict: bool = False
    dual_min_weight: Optional[Weight] = None

    def __post_init__(self):
        object.__setattr__(self, "beta", _as_fraction(self.beta))
        if self.t < 0 or self.alpha < 1:
            raise ValueError("need t >= 0 and alpha >= 1")
        if not (0 < self.beta <= self.alpha):
            raise ValueError(f"beta must lie in (0, alpha], got {self.beta}")

    def check_range(self, m: int) -> None:
        if self.t > self.beta * m:
            raise ValueError(f"t={self.t} exceeds beta*m={self.beta * m}")

    def to_report(self, method: str) -> dict:
        w = self.dual_min_weight
        return {
            "t": self.t,
            "alpha": self.alpha,
            "beta": f"{self.beta.numerator}/{self.beta.denominator}",
            "strict": self.strict,
            "dual_min_weight": "infinite" if w == INFINITE else w,
            "method": method,
        }


@dataclass(frozen=True)
class AlphaWeight:
    """The weight mu_{b,alpha}: sum of the alpha leading digit positions."""

    b: int
    alpha: int

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")

    def __call__(self, k) -> int:
        if isinstance(k, (int, np.integer)):
            return mu_weight(int(k), self.b, self.alpha)
        return mu_weight_vec(k, self.b, self.alpha)


def mu_weight(k: int, b: int, alpha: int) -> int:
    if k < 0:
        raise ValueError("k must be non-negative")
    positions = []
    pos = 1
    while k:
        if k % b:
            positions.append(pos)
        k //= b
        pos += 1
    return sum(sorted(positions, reverse=True)[:alpha])


def mu_weight_vec(k: Sequence[int], b: int, alpha: int) -> int:
    return sum(mu_weight(int(kj), b, alpha) for kj in k)


def q_factor(k, b: int, alpha: int) -> float:
    """q_{b,alpha}(k) = b**(-mu_{b,alpha}(k)); k may be an int or a vector."""
    mu = mu_weight(int(k), b, alpha) if isinstance(k, (int, np.integer)) else mu_weight_vec(k, b, alpha)
    return float(b) ** (-mu)


# ---------------------------------------------------------------------------
# definition search


def _row_selections(m: int, alpha: int) -> list[tuple[int, tuple[int, ...]]]:
    """Maximal row selections of one matrix, as (weight, 1-based row indices).

    A selection with nu < alpha rows weighs the sum of its indices. With
    nu >= alpha only the alpha largest indices a_1 > ... > a_alpha count, so
    every row below a_alpha can be added for free; the maximal selection is
    {1..a_alpha} together with a_1..a_{alpha-1}. The empty selection is left
    out. Sorted by weight.
    """
    out = []
    for nu in range(1, min(alpha, m + 1)):
        for sel in itertools.combinations(range(1, m + 1), nu):
            out.append((sum(sel), sel))
    if alpha <= m:
        for top in itertools.combinations(range(1, m + 1), alpha):
            low = top[0]
            rows = tuple(range(1, low + 1)) + top[1:]
            out.append((sum(top), rows))
    out.sort()
    return out


def _packed_rows(C: GFMatrix):
    if C.base == 2:
        return [pack_binary(r) for r in C.data]
    return [tuple(int(v) for v in r) for r in C.data]


def find_dependent_selection(
    G: GeneratorSet, alpha: int, budget
) -> Optional[list[tuple[int, ...]]]:
    """A row selection of weight <= budget whose rows are linearly dependent.

    Returns the per-dimension 1-based row indices, or None when every
    admissible selection is independent.
    """
    if budget < 1:
        return None
    selections = _row_selections(G.m, alpha)
    rows = [_packed_rows(C) for C in G.matrices]
    s = G.s
    chosen: list[tuple[int, ...]] = [()] * s

    def dfs(j: int, basis: EchelonBasis, used) -> bool:
        if j == s:
            return False
        # dimension j left out
        if dfs(j + 1, basis, used):
            return True
        for w, sel in selections:
            if used + w > budget:
                break
            nb = basis.copy()
            ok = all(nb.add(rows[j][i - 1]) for i in sel)
            chosen[j] = sel
            if not ok:
                for jj in range(j + 1, s):
                    chosen[jj] = ()
                return True
            if dfs(j + 1, nb, used + w):
                return True
            chosen[j] = ()
        return False

    if dfs(0, EchelonBasis(G.b), 0):
        return list(chosen)
    return None


def is_talphabeta_net(G: GeneratorSet, t: int, alpha: int, beta) -> bool:
    """Whether G generates a digital (t, alpha, beta, m, s)-net."""
    beta = _as_fraction(beta)
    if alpha < 1 or not (0 < beta <= alpha):
        raise ValueError(f"need alpha >= 1 and 0 < beta <= alpha (alpha={alpha}, beta={beta})")
    if t < 0 or t > beta * G.m:
        raise ValueError(f"t={t} outside 0..beta*m={beta * G.m}")
    budget = beta * G.m - t
    return find_dependent_selection(G, alpha, budget) is None


def strict_t(G: GeneratorSet, alpha: int, beta=None) -> NetQuality:
    """Smallest t for which G is a (t, alpha, beta, m, s)-net (definition search).

    ``beta`` defaults to ``alpha``.
    """
    beta = Fraction(alpha) if beta is None else _as_fraction(beta)
    if alpha < 1 or not (0 < beta <= alpha):
        raise ValueError(f"need alpha >= 1 and 0 < beta <= alpha (alpha={alpha}, beta={beta})")
    lo, hi = 0, math.floor(beta * G.m)
    # hi always qualifies: the remaining budget is below 1
    while lo < hi:
        mid = (lo + hi) // 2
        if is_talphabeta_net(G, mid, alpha, beta):
            hi = mid
        else:
            lo = mid + 1
    return NetQuality(lo, alpha, beta, strict=True)


# ---------------------------------------------------------------------------
# dual route


def _mu_of_digits(digits: np.ndarray, alpha: int) -> np.ndarray:
    """mu for digit arrays of shape (..., m), least significant digit first."""
    m = digits.shape[-1]
    total = np.zeros(digits.shape[:-1], dtype=np.int64)
    seen = np.zeros(digits.shape[:-1], dtype=np.int64)
    for i in range(m - 1, -1, -1):
        nz = digits[..., i] != 0
        total += (i + 1) * (nz & (seen < alpha))
        seen += nz
    return total


def dual_elements(G: GeneratorSet, cap: Optional[int] = None, chunk: int = 1 << 15) -> Iterator[np.ndarray]:
    """Yield chunks of nonzero dual-net vectors inside [0, b^m)^s.

    Each chunk has shape (n, s, m): the base-b digits (least significant
    first) of every component. Raises EnumerationCapExceeded when the kernel
    dimension exceeds ``cap``.
    """
    cap = enum_cap() if cap is None else cap
    A = GFMatrix(G.stacked_transpose(), G.b)
    basis = nullspace_basis(A)
    dim = len(basis)
    if dim > cap:
        raise EnumerationCapExceeded(
            f"dual enumeration needs {G.b}^{dim} vectors; cap is dimension {cap}"
        )
    if dim == 0:
        return
    B = np.array(basis, dtype=np.int64)
    total = G.b**dim
    powers = G.b ** np.arange(dim, dtype=np.int64)
    for start in range(1, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        coeffs = (idx[:, None] // powers) % G.b
        vecs = (coeffs @ B) % G.b
        yield vecs.reshape(len(idx), G.s, G.m)


def dual_min_weight(G: GeneratorSet, alpha: int, cap: Optional[int] = None) -> Weight:
    """Minimum of mu_{b,alpha} over the nonzero dual net in [0, b^m)^s.

    Returns ``INFINITE`` when that part of the dual net is empty.
    """
    best: Weight = INFINITE
    for vecs in dual_elements(G, cap):
        w = int(_mu_of_digits(vecs, alpha).sum(axis=1).min())
        best = min(best, w)
    return best


def strict_t_dual(G: GeneratorSet, alpha: int, beta=None, cap: Optional[int] = None) -> NetQuality:
    """Strict t-value from the dual minimum weight.

    The net property holds exactly when every dual weight exceeds
    beta*m - t, so t = max(0, floor(beta*m - w) + 1).
    """
    beta = Fraction(alpha) if beta is None else _as_fraction(beta)
    w = dual_min_weight(G, alpha, cap)
    if w == INFINITE:
        t = 0
    else:
        t = max(0, math.floor(beta * G.m - w) + 1)
    return NetQuality(t, alpha, beta, strict=True, dual_min_weight=w)


def certify(G: GeneratorSet, alpha: int, beta=None, method: str = "definition", cap: Optional[int] = None) -> NetQuality:
    """Strict quality by the chosen method, with the dual weight attached when affordable."""
    if method == "dual":
        return strict_t_dual(G, alpha, beta, cap)
    if method != "definition":
        raise ValueError(f"unknown method {method!r}")
    q = strict_t(G, alpha, beta)
    try:
        w = dual_min_weight(G, alpha, cap)
    except EnumerationCapExceeded:
        return q
    return NetQuality(q.t, q.alpha, q.beta, True, w)


def duality_consistent(q: NetQuality, m: int) -> bool:
    """Check a strict quality against its dual minimum weight.

    For t > 0 the dual minimum equals beta*m - t + 1 exactly; at t = 0 it
    only has to exceed beta*m - t.
    """
    w = q.dual_min_weight
    if w is None:
        raise ValueError("no dual minimum weight attached")
    slack = q.beta * m - q.t
    if q.t > 0:
        return Fraction(w) == slack + 1 if q.beta.denominator == 1 else w > slack and w - 1 <= slack
    return w > slack


# ---------------------------------------------------------------------------
# propagation rules


def propagate_alpha(q: NetQuality, alpha_new: int, m: int) -> NetQuality:
    """Change of smoothness: (ceil(t g / alpha), alpha', beta g / alpha), g = min(alpha, alpha')."""
    q.check_range(m)
    if not 1 <= alpha_new <= m:
        raise ValueError(f"alpha' must lie in 1..m (got {alpha_new})")
    g = min(q.alpha, alpha_new)
    t_new = -(-q.t * g // q.alpha)
    return NetQuality(t_new, alpha_new, q.beta * g / q.alpha)


def weaken(q: NetQuality, m: int, beta_new=None, t_new: Optional[int] = None) -> NetQuality:
    """Trade a smaller beta' <= beta and a larger t' >= t (t' <= beta' m)."""
    q.check_range(m)
    beta_new = q.beta if beta_new is None else _as_fraction(beta_new)
    t_new = q.t if t_new is None else t_new
    if not (0 < beta_new <= q.beta):
        raise ValueError(f"beta'={beta_new} must lie in (0, {q.beta}]")
    if not (q.t <= t_new <= beta_new * m):
        raise ValueError(f"t'={t_new} must lie in {q.t}..{beta_new * m}")
    return NetQuality(t_new, q.alpha, beta_new)


def propagation_derive(q: NetQuality, alpha_new: int, m: int, beta_new=None, t_new: Optional[int] = None) -> NetQuality:
    """Apply the alpha rule, then optionally weaken (beta, t)."""
    derived = propagate_alpha(q, alpha_new, m)
    if beta_new is None and t_new is None:
        return derived
    return weaken(derived, m, beta_new, t_new)


def derived_family(q: NetQuality, m: int, beta_step=Fraction(1, 2)) -> list[NetQuality]:
    """Every triple reachable by the alpha rule followed by weakening.

    Weakened beta' values run over multiples of ``beta_step`` below the
    alpha-rule beta.
    """
    out = []
    seen = set()
    for a in range(1, m + 1):
        base = propagate_alpha(q, a, m)
        betas = {base.beta}
        k = 1
        while k * beta_step < base.beta:
            betas.add(k * beta_step)
            k += 1
        for bn in sorted(betas):
            if base.t > bn * m:
                continue
            for tn in range(base.t, math.floor(bn * m) + 1):
                key = (tn, a, bn)
                if key not in seen:
                    seen.add(key)
                    out.append(NetQuality(tn, a, bn))
    return out
