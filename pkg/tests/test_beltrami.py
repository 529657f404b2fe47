from math import pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpsdeform.beltrami import (
    BranchChart,
    BumpProfile,
    MoveSpec,
    QuadratureSpec,
    eta,
    eta_w,
    eta_wbar,
    move_isotopy,
    mu_dot0,
    mu_t,
    quadrature_contraction,
    residue_contraction,
)
from bpsdeform.cpoly import Series
from bpsdeform.errors import (
    BranchPointSingularity,
    GridTooCoarse,
    InvalidInput,
    NonInjectiveIsotopy,
    OrderTooLow,
)

B = BumpProfile(0.3, 0.7)
cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def test_chart_validation():
    with pytest.raises(InvalidInput):
        BranchChart(1)
    with pytest.raises(InvalidInput):
        BranchChart(2, Series([0, 1, 1], 2))
    with pytest.raises(InvalidInput):
        BranchChart(2, Series([0, 0, 2], 2))
    ch = BranchChart(3, Series([0, 0, 0, 1, 0.5], 4))
    assert np.allclose(ch.g_series.coeffs, [3, 2])


def test_bump_plateau_and_support():
    for w in (0, 0.1j, 0.3):
        assert eta(B, w) == 1 and eta_wbar(B, w) == 0
    for w in (0.7, -0.8j, 5):
        assert eta(B, w) == 0 and eta_wbar(B, w) == 0
    s = np.linspace(0, 1, 101)
    assert np.all((B.h(s) >= 0) & (B.h(s) <= 1))


@pytest.mark.parametrize("smoothness", [2, 3])
def test_eta_wbar_finite_differences(smoothness):
    b = BumpProfile(0.3, 0.7, smoothness)
    h = 1e-5
    for w in (0.5, 0.4 + 0.3j, -0.2 - 0.45j):
        dx = (eta(b, w + h) - eta(b, w - h)) / (2 * h)
        dy = (eta(b, w + 1j * h) - eta(b, w - 1j * h)) / (2 * h)
        assert abs(0.5 * (dx + 1j * dy) - eta_wbar(b, w)) < 1e-6
        assert abs(0.5 * (dx - 1j * dy) - eta_w(b, w)) < 1e-6


def test_smoothstep_seams():
    # C^n at the seams: derivatives of the step vanish at both ends up to order n
    for n in (2, 3):
        step = BumpProfile(0.3, 0.7, n)._step
        for k in range(1, n + 1):
            d = step.deriv(k)
            assert abs(d(0)) < 1e-12 and abs(d(1)) < 1e-12
        assert abs(step(0)) < 1e-15 and abs(step(1) - 1) < 1e-12


def test_isotopy_examples():
    spec = MoveSpec(0.1 + 0.05j, 0.5)
    assert move_isotopy(MoveSpec(0.1, 0.0), B, 0.5j) == 0.5j
    assert abs(move_isotopy(spec, B, 0.2) - (0.2 + 0.5 * (0.1 + 0.05j))) < 1e-15
    assert move_isotopy(spec, B, 0.8j) == 0.8j


def test_isotopy_bounds():
    with pytest.raises(InvalidInput):
        MoveSpec(0.1, 1.5)
    with pytest.raises(InvalidInput):
        move_isotopy(MoveSpec(0.35, 1.0), B, 0)
    tight = BumpProfile(0.5, 0.52)
    with pytest.raises(NonInjectiveIsotopy):
        move_isotopy(MoveSpec(0.2, 1.0), tight, 0)


def test_isotopy_injective_on_grid():
    # under the bound, H_t is injective: no two grid points collide and orientation is kept
    spec = MoveSpec(0.14, 1.0)
    x = np.linspace(-0.99, 0.99, 121)
    W = x[:, None] + 1j * x[None, :]
    H = move_isotopy(spec, B, W)
    jac_x = np.diff(H, axis=0)
    jac_y = np.diff(H, axis=1)
    cross = (np.conj(jac_x[:, :-1]) * jac_y[:-1, :]).imag
    assert np.all(cross > 0)


def test_mu_examples():
    ch = BranchChart.standard(2)
    assert mu_t(ch, B, MoveSpec(0.1, 1.0), 0.3) == 0  # |c| = 0.09 in the plateau
    assert mu_t(ch, B, MoveSpec(0.1, 0.0), 0.7) == 0
    assert mu_dot0(ch, B, 0, 0.7) == 0
    assert mu_dot0(ch, B, 1, 0) == 0
    assert mu_dot0(ch, B, 1, 0.95) == 0


def test_mu_quasiconformal_grid():
    ch = BranchChart.standard(3)
    x = np.linspace(-1, 1, 100)
    Z = x[:, None] + 1j * x[None, :]
    for t in (0.25, 0.5, 1.0):
        assert np.max(np.abs(mu_t(ch, B, MoveSpec(0.14 + 0.02j, t), Z))) < 1


def test_mu_first_order_convergence():
    ch = BranchChart.standard(2)
    z = np.array([0.6, 0.55j, -0.4 + 0.5j, 0.7 - 0.2j])
    q = 0.12
    dot = mu_dot0(ch, B, q, z)
    ts = np.array([1e-2, 1e-3, 1e-4])
    err = [np.max(np.abs(mu_t(ch, B, MoveSpec(q, t), z) / t - dot)) for t in ts]
    slope = np.polyfit(np.log(ts), np.log(err), 1)[0]
    assert abs(slope - 1) < 0.1


def test_branch_point_singularity():
    # c = z^2 + (2/3) z^3 has c'(-1) = 0 with c(-1) = 1/3 inside the transition annulus
    ch = BranchChart(2, Series([0, 0, 1, 2 / 3], 3))
    with pytest.raises(BranchPointSingularity):
        mu_dot0(ch, B, 1, -1)


def test_residue_examples():
    ch2 = BranchChart.standard(2)
    assert residue_contraction(Series([2 - 1j], 0), ch2, 0.5j) == pytest.approx(pi * 1j * 0.5j * (2 - 1j))
    assert residue_contraction(Series([0, 1], 1), ch2, 1) == 0
    v = residue_contraction(Series([0, 1], 1), BranchChart.standard(3), 2)
    assert v == pytest.approx(4j * pi / 3, rel=1e-14)
    with pytest.raises(OrderTooLow):
        residue_contraction(Series([1], 0), BranchChart.standard(4), 1)


def test_quadrature_examples():
    one = Series([1], 0)
    ch2 = BranchChart.standard(2)
    a = quadrature_contraction(one, ch2, BumpProfile(0.3, 0.7), 1)
    b = quadrature_contraction(one, ch2, BumpProfile(0.2, 0.5), 1)
    assert abs(a - pi * 1j) < 1e-6 and abs(b - pi * 1j) < 1e-6
    c = quadrature_contraction(Series([0, 1], 1), BranchChart.standard(3), B, 2)
    assert abs(c - 4j * pi / 3) < 1e-6


def test_quadrature_refinement_failure():
    with pytest.raises(GridTooCoarse):
        quadrature_contraction(Series([1], 0), BranchChart.standard(2), B, 1,
                               QuadratureSpec(n_radial=2, n_angular=2, tol=1e-15, max_refinements=1))


def test_quadrature_general_chart():
    # chart with higher-order terms: g is no longer constant
    ch = BranchChart(3, Series([0, 0, 0, 1, 0.2, 0.05], 8))
    alpha = Series([1, 0.5, -0.3j], 2)
    ref = residue_contraction(alpha, ch, 0.7)
    num = quadrature_contraction(alpha, ch, B, 0.7, QuadratureSpec(tol=1e-8, radial_panels=4))
    assert abs(num - ref) < 1e-6 * abs(ref)


@settings(max_examples=40, deadline=None)
@given(st.lists(cplx, min_size=4, max_size=4), st.lists(cplx, min_size=4, max_size=4), cplx, cplx,
       st.integers(2, 5))
def test_residue_linearity(a, b, q, s, m):
    ch = BranchChart.standard(m)
    A, Bs = Series(a, 3), Series(b, 3)
    lhs = residue_contraction(A + Bs * Series([s, 0, 0, 0], 3), ch, q)
    rhs = residue_contraction(A, ch, q) + s * residue_contraction(Bs, ch, q)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))
    assert abs(residue_contraction(A, ch, 2 * q) - 2 * residue_contraction(A, ch, q)) < 1e-12 * (1 + abs(lhs))


@settings(max_examples=15, deadline=None)
@given(st.lists(cplx, min_size=5, max_size=5), cplx, st.integers(2, 4),
       st.sampled_from([(0.3, 0.7), (0.2, 0.5), (0.4, 0.9)]))
def test_quadrature_matches_residue(a, q, m, radii):
    alpha = Series(a, 4)
    ref = residue_contraction(alpha, BranchChart.standard(m), q)
    if abs(ref) < 1e-6:
        return
    num = quadrature_contraction(alpha, BranchChart.standard(m), BumpProfile(*radii), q)
    assert abs(num - ref) < 1e-6 * abs(ref)


def test_quadrature_bump_independence():
    alpha = Series([0.3, -1j, 0.5, 0.1, 0.2], 4)
    for m in (2, 3, 4):
        ch = BranchChart.standard(m)
        v5 = quadrature_contraction(alpha, ch, BumpProfile(0.3, 0.7, 2), 0.4)
        v7 = quadrature_contraction(alpha, ch, BumpProfile(0.3, 0.7, 3), 0.4)
        assert abs(v5 - v7) < 1e-6 * abs(v5)


def test_quadrature_bit_stable():
    alpha = Series([0.3, -1j, 0.5], 2)
    ch = BranchChart.standard(3)
    assert quadrature_contraction(alpha, ch, B, 0.4) == quadrature_contraction(alpha, ch, B, 0.4)
