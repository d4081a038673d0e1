from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hodnet.gf import GFMatrix
from hodnet.nets import (
    DeclaredQuality,
    GeneratorSet,
    SequenceGenerator,
    d_b_bounds,
    deinterleave,
    family_net,
    faure,
    faure_sequence,
    golden_base_net,
    hammersley,
    identity_net,
    interleave,
    interleave_sequence,
    interleave_t_bound,
)
from hodnet.quality import is_talphabeta_net, strict_t

C12_M4 = [[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0]]
C22_WORKED = [[1, 1, 1, 1], [0, 1, 1, 0], [0, 1, 0, 1], [1, 1, 0, 1]]


@st.composite
def generator_sets(draw, max_m=4, max_s=4):
    b = draw(st.sampled_from([2, 3, 5]))
    m = draw(st.integers(1, max_m))
    s = draw(st.integers(1, max_s))
    arrays = [
        np.array(draw(st.lists(st.integers(0, b - 1), min_size=m * m, max_size=m * m))).reshape(m, m)
        for _ in range(s)
    ]
    return GeneratorSet.from_arrays(b, arrays)


def test_hammersley_matrices():
    G = hammersley(2, 4)
    assert G.matrices[0] == GFMatrix.identity(4, 2)
    assert G.matrices[1].tolist() == [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    assert [C.tolist() for C in hammersley(2, 1).matrices] == [[[1]], [[1]]]
    assert hammersley(3, 2).matrices[1].tolist() == [[0, 1], [1, 0]]
    assert hammersley(2, 4).declared_quality == DeclaredQuality(0, 1, Fraction(1))


def test_faure_pascal_powers():
    assert faure(2, 3, 1).matrices[0] == GFMatrix.identity(3, 2)
    assert faure(3, 2, 2).matrices[1].tolist() == [[1, 1], [0, 1]]
    G = faure(5, 3, 4)
    P = G.matrices[1]
    for j in range(4):
        assert G.matrices[j] == P**j
    with pytest.raises(ValueError):
        faure(3, 2, 4)


def test_faure_is_strict_zero_net():
    assert strict_t(faure(5, 3, 4), 1, 1).t == 0
    assert strict_t(faure(3, 3, 3), 1, 1).t == 0


def test_interleave_hammersley_m4_matches_published_matrix():
    G = interleave(hammersley(2, 4), 2)
    assert G.s == 1
    assert G.matrices[0].tolist() == C12_M4


def test_interleave_worked_net():
    G = interleave(golden_base_net(), 2)
    assert G.matrices[0].tolist() == C12_M4
    assert G.matrices[1].tolist() == C22_WORKED
    assert G.declared_quality == DeclaredQuality(4, 2, Fraction(2))


def test_interleave_d1_is_identity_and_divisibility():
    G = golden_base_net()
    assert interleave(G, 1) is G
    with pytest.raises(ValueError):
        interleave(G, 3)
    with pytest.raises(ValueError):
        interleave(G, 0)


def test_interleave_index_formula_one_based():
    # row l of C_j^(d) is row v of C_u with l = (v - j) d + u, (j-1) d < u <= j d
    G = faure(5, 4, 4)
    d = 2
    H = interleave(G, d)
    for j in range(1, H.s + 1):
        for u in range((j - 1) * d + 1, j * d + 1):
            for v in range(1, G.m + 1):
                l = (v - j) * d + u
                if 1 <= l <= G.m:
                    assert H.matrices[j - 1].row(l - 1) == G.matrices[u - 1].row(v - 1)


@given(generator_sets(), st.sampled_from([1, 2, 4]))
@settings(max_examples=60, deadline=None)
def test_deinterleave_recovers_rows_used(G, d):
    if G.s % d:
        return
    H = interleave(G, d)
    back = deinterleave(H, d)
    assert back.s == G.s
    # interleaving reads only the leading rows of each input
    for u in range(G.s):
        j = u // d
        used = [v for (uu, v) in [(j * d + l % d, l // d) for l in range(G.m)] if uu == u]
        for v in used:
            assert back.matrices[u].row(v) == G.matrices[u].row(v)
    assert interleave(back, d) == H


@given(generator_sets())
@settings(max_examples=60, deadline=None)
def test_json_round_trip_is_byte_stable(G):
    text = G.to_json()
    again = GeneratorSet.from_json(text)
    assert again == G
    assert again.to_json() == text


def test_json_shape_and_errors():
    text = interleave(golden_base_net(), 2).to_json()
    assert text.startswith('{"b":2,"declared_quality":{"alpha":2,"beta_den":1,"beta_num":2,"t":4},"m":4,')
    with pytest.raises(ValueError):
        GeneratorSet.from_json("{not json")
    with pytest.raises(ValueError):
        GeneratorSet.from_json('{"b":2,"m":2}')
    with pytest.raises(ValueError):
        GeneratorSet.from_json('{"b":4,"m":1,"s":1,"matrices":[[[1]]],"declared_quality":null}')
    with pytest.raises(ValueError):
        GeneratorSet.from_json('{"b":2,"m":2,"s":1,"matrices":[[[1]]],"declared_quality":null}')


def test_interleave_t_bound_values():
    assert interleave_t_bound(1, 2, 2, 2) == 4
    assert interleave_t_bound(0, 1, 2, 2) == 1
    assert interleave_t_bound(5, 3, 1, 7) == 5
    assert interleave_t_bound(0, 3, 3, 2) == 6  # 0 + ceil(3*2*2/2)


def test_declared_quality_certifies():
    for G in [hammersley(2, 4), faure(5, 3, 4), interleave(golden_base_net(), 2), interleave(hammersley(2, 6), 2)]:
        q = G.declared_quality
        if q.t <= q.beta * G.m:
            assert is_talphabeta_net(G, q.t, q.alpha, q.beta)


def _vdc_pair_entry_m4(j, k, l):
    # identity and the m = 4 anti-diagonal, as an entry oracle
    if j == 0:
        return int(k == l)
    return int(k + l == 3)


def test_interleave_sequence_matches_finite_case():
    S = SequenceGenerator(2, 2, _vdc_pair_entry_m4, 0)
    assert interleave_sequence(S, 2).truncate(4).matrices == interleave(hammersley(2, 4), 2).matrices
    F = faure_sequence(5, 4)
    T = interleave_sequence(F, 2).truncate(3)
    assert T.matrices == interleave(faure(5, 3, 4), 2).matrices
    assert interleave_sequence(F, 1) is F


def test_sequence_truncation_declares_t_prime_only_when_it_fits():
    S = SequenceGenerator(2, 1, lambda j, k, l: int(k == l), 3)
    assert S.truncate(2).declared_quality is None
    assert S.truncate(3).declared_quality == DeclaredQuality(3, 1, Fraction(1))


def test_family_net():
    assert family_net("identity", 2, 3).matrices == identity_net(2, 3).matrices
    assert family_net("hammersley", 2, 4, d=2).matrices[0].tolist() == C12_M4
    assert family_net("faure", 5, 3, s=4, d=2).s == 2
    with pytest.raises(ValueError):
        family_net("sobol", 2, 3)
    with pytest.raises(ValueError):
        family_net("faure", 5, 3)


def test_d_b_bounds():
    assert d_b_bounds(1, 1, 2)[1] == pytest.approx(2.0)
    assert d_b_bounds(1, 2, 2)[1] == pytest.approx(5.0)
    for s in range(1, 21):
        for a in range(1, 5):
            for b in (2, 3, 5):
                lo, hi = d_b_bounds(s, a, b)
                assert lo <= hi
