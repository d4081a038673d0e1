import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hodnet.engine import PointSet, apply_shift, generate_points, sample_shift, zero_shift
from hodnet.errors import EnumerationCapExceeded, NumericalInconsistencyError
from hodnet.korobov import (
    CONVERGENCE_HEADER,
    ConvergenceRow,
    KorobovOrder,
    convergence_csv,
    convergence_rows,
    dual_sqrt_series,
    dual_wce_series,
    fitted_slope,
    kernel,
    r_coeff,
    r_table,
    r_vec,
    rr_cauchy_check,
    walsh_bernoulli_integral,
    walsh_decay_ratios,
    wce,
    wce_shifted_mean,
    wce_squared,
)
from hodnet.nets import faure, golden_base_net, hammersley, identity_net, interleave

from oracles import digits_msb_weight, equispaced_wce2, fourier_wce2_1d, r_fourier, wce2_mp


def worked():
    return interleave(golden_base_net(), 2)


def test_order_validation_and_bernoulli():
    with pytest.raises(ValueError):
        KorobovOrder(0)
    with pytest.raises(ValueError):
        KorobovOrder(1, 4)
    o = KorobovOrder(2)
    assert o.bernoulli_coeffs == (Fraction(-1, 30), 0, 1, -2, 1)
    assert o.bernoulli(Fraction(1, 2)) == Fraction(7, 240)
    assert KorobovOrder(1).kappa == pytest.approx(2 * math.pi**2)


def test_kernel_examples():
    o = KorobovOrder(1)
    assert kernel(o, 0.3, 0.3) == pytest.approx(1 + math.pi**2 / 3, rel=1e-14)
    assert kernel(o, 0.0, 0.5) == pytest.approx(1 - math.pi**2 / 6, rel=1e-14)
    x, y = np.array([0.1, 0.7]), np.array([0.4, 0.2])
    assert kernel(o, x, y) == pytest.approx(kernel(o, 0.1, 0.4) * kernel(o, 0.7, 0.2))


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True), st.sampled_from([1, 2, 3]))
def test_kernel_symmetric_and_positive_definite_diagonal(x, y, alpha):
    o = KorobovOrder(alpha)
    assert kernel(o, x, y) == pytest.approx(kernel(o, y, x))
    assert kernel(o, x, x) >= abs(kernel(o, x, y)) - 1e-12


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_single_point(alpha):
    o = KorobovOrder(alpha)
    P = PointSet(2, 0, [[0]])
    assert wce_squared(P, o) == pytest.approx(o.zeta_sum(), rel=1e-12)
    P2 = PointSet(2, 0, [[0, 0, 0]])
    assert wce_squared(P2, o) == pytest.approx((1 + o.zeta_sum()) ** 3 - 1, rel=1e-12)
    assert wce_squared(P, KorobovOrder(1)) == pytest.approx(math.pi**2 / 3, rel=1e-14)


@pytest.mark.parametrize("alpha", [1, 2])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_equispaced(alpha, m):
    P = generate_points(identity_net(2, m))
    o = KorobovOrder(alpha)
    expect = equispaced_wce2(2**m, alpha)
    assert wce_squared(P, o, "exact") == pytest.approx(expect, rel=1e-12)
    assert wce_squared(P, o, "direct") == pytest.approx(expect, rel=1e-9)


@pytest.mark.parametrize("G", [worked(), hammersley(2, 3), faure(3, 2, 2), hammersley(3, 2)])
@pytest.mark.parametrize("alpha", [1, 2])
def test_matches_mp_double_sum(G, alpha):
    P = generate_points(G)
    assert wce_squared(P, KorobovOrder(alpha, G.b)) == pytest.approx(wce2_mp(P.fractions(), alpha), rel=1e-11)


def test_exact_route_matches_fourier_sum_1d():
    # non-equispaced one-dimensional set; the Fourier tail beyond 1e5 is below 1e-10
    pts = [Fraction(0), Fraction(1, 8), Fraction(3, 8), Fraction(7, 8)]
    P = PointSet(2, 3, [[0], [1], [3], [7]])
    e2 = wce_squared(P, KorobovOrder(2), "exact")
    assert e2 == pytest.approx(fourier_wce2_1d(pts, 2), rel=1e-9)
    assert e2 == pytest.approx(wce2_mp(P.fractions(), 2), rel=1e-12)


def test_exact_and_direct_agree():
    for m in (6, 8, 10):
        P = generate_points(interleave(hammersley(2, m), 2))
        for alpha in (1, 2):
            o = KorobovOrder(alpha)
            ex = wce_squared(P, o, "exact")
            di = wce_squared(P, o, "direct")
            # the direct sum cancels about zeta_sum / e^2 in relative terms
            assert abs(ex - di) <= 1e-13 * o.zeta_sum() * 4
    with pytest.raises(ValueError):
        wce_squared(generate_points(worked()), KorobovOrder(1), "exact")
    with pytest.raises(ValueError):
        wce_squared(generate_points(worked()), KorobovOrder(1), "fast")


def test_invariant_under_reorder_and_zero_shift():
    P = generate_points(worked())
    o = KorobovOrder(2)
    base = wce_squared(P, o)
    perm = np.random.default_rng(3).permutation(P.N)
    Q = PointSet(P.b, P.m, P.points[perm])
    assert wce_squared(Q, o) == pytest.approx(base, rel=1e-13)
    assert wce_squared(apply_shift(P, zero_shift(2, 2, 4)), o) == pytest.approx(base, rel=1e-13)
    assert wce(P, o) == pytest.approx(math.sqrt(base))


def test_negative_error_raises(monkeypatch):
    import hodnet.korobov as kor

    monkeypatch.setattr(kor, "_direct_sum", lambda P, ord: np.longdouble(-1.0) * P.N**2)
    with pytest.raises(NumericalInconsistencyError):
        wce_squared(generate_points(worked()), KorobovOrder(1), "direct")


# ---------------------------------------------------------------------------
# Walsh coefficients


@pytest.mark.parametrize("b", [2, 3])
@pytest.mark.parametrize("alpha", [1, 2])
def test_r_matches_fourier_oracle(b, alpha):
    o = KorobovOrder(alpha, b)
    rng = np.random.default_rng(b * 10 + alpha)
    pairs = [(k, k) for k in range(1, 20)] + [tuple(int(v) for v in rng.integers(0, 60, 2)) for _ in range(30)]
    for k, l in pairs:
        got = r_coeff(k, l, o).value
        want = r_fourier(k, l, alpha, b)
        assert abs(got - want) <= 1e-10 * abs(want) + 1e-15, (k, l)


def test_r_basic_identities():
    o = KorobovOrder(2)
    assert r_coeff(0, 0, o).value == 1
    for k in range(1, 65):
        assert abs(r_coeff(0, k, o).value) <= 1e-12
        assert abs(r_coeff(k, 0, o).value) <= 1e-12
    for k in range(1, 30):
        assert r_coeff(k, k, o).real > 0
    with pytest.raises(ValueError):
        r_coeff(-1, 2, o)


@given(st.integers(0, 200), st.integers(0, 200), st.sampled_from([2, 3]), st.sampled_from([1, 2]))
@settings(max_examples=60, deadline=None)
def test_r_hermitian(k, l, b, alpha):
    o = KorobovOrder(alpha, b)
    assert r_coeff(k, l, o).value == pytest.approx(r_coeff(l, k, o).value.conjugate(), abs=1e-15)


@given(st.integers(1, 255), st.integers(1, 255), st.sampled_from([1, 2]))
@settings(max_examples=60, deadline=None)
def test_cauchy_schwarz(k, l, alpha):
    assert rr_cauchy_check(k, l, KorobovOrder(alpha))


@pytest.mark.parametrize("b,alpha", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_scaling_law(b, alpha):
    o = KorobovOrder(alpha, b)
    for k in range(1, 17):
        for m in range(1, 4):
            lhs = r_coeff(k * b**m, k * b**m, o).real
            rhs = float(b) ** (-2 * alpha * m) * r_coeff(k, k, o).real
            assert lhs == pytest.approx(rhs, rel=1e-12)


def test_walsh_bernoulli_integral_values():
    o = KorobovOrder(2)
    assert walsh_bernoulli_integral(1, 1, o) == pytest.approx(-1 / 6, rel=1e-14)
    for k in range(1, 64):
        nu = len(digits_msb_weight(k, 2))
        for j in range(0, 2 * nu, 2):
            assert abs(walsh_bernoulli_integral(k, j, o)) <= 1e-12, (k, j)
    for k in (5, 7, 11, 19, 25):
        o3 = KorobovOrder(2, 3)
        nu = len(digits_msb_weight(k, 3))
        for j in range(0, 2 * nu, 2):
            assert abs(walsh_bernoulli_integral(k, j, o3)) <= 1e-12


def test_cell_pair_cap():
    o = KorobovOrder(1)
    with pytest.raises(EnumerationCapExceeded):
        r_coeff(2**10, 2**10, o, cap=2**18)
    assert r_coeff(2**8, 2**8, o, cap=2**18).real > 0


def test_r_sum_towards_kernel_diagonal():
    o = KorobovOrder(1)
    r = r_table(2**10 + 1, o)
    partial = np.cumsum(r[1:])
    assert np.all(np.diff(partial) > 0)
    assert partial[-1] < o.zeta_sum()
    assert partial[-1] / o.zeta_sum() > 0.99


def test_r_vec_is_product():
    o = KorobovOrder(2)
    assert r_vec((3, 5), o) == pytest.approx(r_coeff(3, 3, o).real * r_coeff(5, 5, o).real)
    assert r_vec((0, 0), o) == 1


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_walsh_decay_ratios_bounded(alpha):
    ratios = walsh_decay_ratios(KorobovOrder(alpha), 2**9)
    assert np.all(ratios > 0)
    # bounded uniformly: the tail does not grow past the early maximum
    assert ratios[255:].max() <= ratios[:255].max() * (1 + 1e-9)


# ---------------------------------------------------------------------------
# dual series and randomization


def test_dual_series_trivial_net_is_zero_at_no_extension():
    G = identity_net(2, 4)  # the dual net inside [0, 16) is empty
    assert dual_wce_series(G, KorobovOrder(1)) == pytest.approx(0, abs=1e-15)


def test_dual_series_monotone_and_below_limit():
    G = hammersley(2, 5)
    o = KorobovOrder(1)
    vals = [dual_wce_series(G, o, e) for e in range(4)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        dual_wce_series(G, o, -1)


def test_dual_series_equispaced_limit():
    # for an equispaced 1-D set the dual is the multiples of N; the series tends to the shifted mean
    G = identity_net(2, 3)
    o = KorobovOrder(2)
    mean = wce_shifted_mean(G, o, samples=64, seed=2)
    series = dual_wce_series(G, o, 5)
    assert abs(series - mean.mean) <= 0.01 * mean.mean + 3 * mean.stderr


def test_sqrt_series_bounds_wce():
    for G in (worked(), hammersley(2, 4), interleave(hammersley(2, 6), 2)):
        for alpha in (1, 2):
            o = KorobovOrder(alpha)
            assert wce(generate_points(G), o) <= dual_sqrt_series(G, o, 4) * (1 + 1e-12)


def test_shifted_mean_deterministic_and_override():
    o = KorobovOrder(1)
    G = worked()
    a = wce_shifted_mean(G, o, 10, seed=5)
    b = wce_shifted_mean(G, o, 10, seed=5)
    assert a == b
    zeros = [zero_shift(2, 2, 4)] * 3
    z = wce_shifted_mean(G, o, 3, shifts=zeros)
    assert z.mean == pytest.approx(wce_squared(generate_points(G), o)) and z.stderr == 0
    with pytest.raises(ValueError):
        wce_shifted_mean(G, o, 1)
    with pytest.raises(ValueError):
        wce_shifted_mean(G, o, 5, shifts=zeros)


def test_shifted_mean_below_unshifted_on_worked_net():
    for alpha in (1, 2):
        o = KorobovOrder(alpha)
        sm = wce_shifted_mean(worked(), o, 100, seed=1)
        assert sm.mean <= wce_squared(generate_points(worked()), o) + 3 * sm.stderr


def test_single_shift_matches_direct_evaluation():
    P = generate_points(worked())
    sh = sample_shift(2, 2, 20, seed=9)
    o = KorobovOrder(2)
    Q = apply_shift(P, sh)
    assert wce_squared(Q, o) == pytest.approx(wce2_mp(Q.fractions(), 2), rel=1e-10)


# ---------------------------------------------------------------------------
# convergence sweeps


def test_convergence_csv_format():
    rows = convergence_rows([interleave(hammersley(2, m), 2) for m in (2, 4, 6)], KorobovOrder(2))
    assert [r.m for r in rows] == [2, 4, 6]
    assert math.isnan(rows[0].slope)
    assert rows[1].slope < 0
    fit = fitted_slope(rows)
    text = convergence_csv(rows, fit)
    lines = text.splitlines()
    assert lines[0] == CONVERGENCE_HEADER == "m,N,wce,log_b(wce),slope"
    assert lines[1].startswith("2,4,") and lines[1].endswith(",")
    assert lines[-1] == f"# fitted_slope={fit!r}"
    assert len(lines) == 5
    for line in lines[1:4]:
        m, N, e, lb, _ = line.split(",")
        assert float(lb) == pytest.approx(math.log(float(e), 2))


def test_convergence_empty_and_short():
    assert convergence_csv([], None) == CONVERGENCE_HEADER + "\n"
    assert convergence_csv([], -1.0) == CONVERGENCE_HEADER + "\n"
    assert math.isnan(fitted_slope([ConvergenceRow(1, 2, 0.5, -1.0, math.nan)]))


def test_fitted_slope_exact_power_law():
    rows = [ConvergenceRow(m, 2**m, 2.0 ** (-1.5 * m), -1.5 * m, math.nan) for m in range(1, 9)]
    assert fitted_slope(rows) == pytest.approx(-1.5)
    assert fitted_slope(rows, top_half=False) == pytest.approx(-1.5)


def test_informative_hammersley_slope_small_range():
    # informative: the desk-scale sweep sits close to the order-2 rate
    rows = convergence_rows([interleave(hammersley(2, m), 2) for m in (4, 6, 8)], KorobovOrder(2))
    assert fitted_slope(rows) < -1.5
