"""Bivariate engine: tables, square systems, extension, transport."""

import math

import numpy as np
import pytest

from exppoly.domain import ThetaBi
from exppoly.errors import (
    AxisOutsideDomain,
    InputError,
    NonPositiveScale,
    PathCrossesSingularity,
    PathSingularity,
)
from exppoly.holo_bi import (
    DerivTableBi,
    assemble_system,
    base_indices,
    boundary_consts,
    extend_table,
    initial_state_bi,
    pfaffian_det,
    table_from_oracle,
    transport_bi,
)
from exppoly.oracle import quad_A_bi
from exppoly.polyalg import discriminant

SQRT_PI = math.sqrt(math.pi)
G13 = math.gamma(1.0 / 3.0) / 3.0
G23 = math.gamma(2.0 / 3.0) / 3.0


def product_theta(d, c1=1.0, c2=1.0):
    return ThetaBi(d, {(d, 0): -c1, (0, d): -c2})


def test_base_indices():
    assert base_indices(2) == [(0, 0)]
    assert base_indices(3) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_initial_state_gaussian_product():
    tab = initial_state_bi(2, 1.0, 1.0)
    assert tab.norm_const == pytest.approx(math.pi / 4, rel=1e-14)


def test_initial_state_cubic_product():
    tab = initial_state_bi(3, 1.0, 1.0)
    assert tab.norm_const == pytest.approx(G13 * G13, rel=1e-14)
    assert tab.entry(1, 0) == pytest.approx(G23 * G13, rel=1e-14)
    assert tab.entry(1, 1) == pytest.approx(G23 * G23, rel=1e-14)
    assert tab.entry(2, 0) == pytest.approx(G13 / 3, rel=1e-13)


def test_initial_state_scales():
    # theta_20 = -4 halves every x-moment of the Gaussian factor
    tab = initial_state_bi(2, 4.0, 1.0)
    assert tab.norm_const == pytest.approx(math.pi / 8, rel=1e-14)


def test_initial_state_rejects_bad_scale():
    with pytest.raises(NonPositiveScale):
        initial_state_bi(2, 0.0, 1.0)
    with pytest.raises(NonPositiveScale):
        initial_state_bi(2, 1.0, -3.0)


def test_boundary_consts_gaussian():
    ax, ay = boundary_consts(product_theta(2), 1)
    np.testing.assert_allclose(ax, [SQRT_PI / 2, 0.5], rtol=1e-9)
    np.testing.assert_allclose(ay, [SQRT_PI / 2, 0.5], rtol=1e-9)


def test_boundary_consts_cubic():
    ax, _ = boundary_consts(product_theta(3), 0)
    assert ax[0] == pytest.approx(G13, rel=1e-9)


def test_boundary_consts_reject_bad_axis():
    with pytest.raises(AxisOutsideDomain):
        boundary_consts(ThetaBi(2, {(2, 0): 1.0, (0, 2): -1.0}), 0)


def test_assemble_system_gaussian_product():
    sys = assemble_system(initial_state_bi(2, 1.0, 1.0))
    np.testing.assert_allclose(sys.P, [[-2.0, 0.0], [0.0, -2.0]], atol=1e-14)
    np.testing.assert_allclose(sys.Q, [-SQRT_PI / 2, -SQRT_PI / 2], rtol=1e-9)
    np.testing.assert_allclose(sys.solve(), [SQRT_PI / 4, SQRT_PI / 4], rtol=1e-9)
    assert sys.det_p == pytest.approx(4.0, rel=1e-12)


def test_system_matrix_layout_quadratic():
    th = ThetaBi(2, {(2, 0): -1.5, (1, 1): -0.5, (0, 2): -2.0})
    tab = table_from_oracle(th)
    sys = assemble_system(tab)
    t20, t11, t02 = -1.5, -0.5, -2.0
    np.testing.assert_allclose(
        sys.P, [[2 * t20, t11], [t11, 2 * t02]], atol=1e-14
    )
    assert sys.det_p == pytest.approx(4 * t20 * t02 - t11**2, rel=1e-12)


def test_system_matrix_layout_cubic():
    th = ThetaBi(
        3,
        {
            (3, 0): -1.0,
            (2, 1): -0.3,
            (1, 2): -0.2,
            (0, 3): -1.5,
            (1, 0): 0.5,
        },
    )
    t30, t21, t12, t03 = -1.0, -0.3, -0.2, -1.5
    sys = assemble_system(extend_table(initial_state_bi(3, 1.0, 1.0), 2))
    # layout only depends on the top coefficients, check at the product point
    sysP = assemble_system(table_from_oracle(th)).P
    expect = [
        [3 * t30, 2 * t21, t12, 0.0],
        [0.0, 3 * t30, 2 * t21, t12],
        [t21, 2 * t12, 3 * t03, 0.0],
        [0.0, t21, 2 * t12, 3 * t03],
    ]
    np.testing.assert_allclose(sysP, expect, atol=1e-14)
    assert sys.P.shape == (4, 4)


def test_pfaffian_det_matches_discriminant():
    rng = np.random.default_rng(3)
    for d in (2, 3, 4, 5):
        for _ in range(20):
            top = rng.uniform(-2, 2, d + 1)
            coeffs = {(d - j, j): top[j] for j in range(d + 1)}
            th = ThetaBi(d, coeffs)
            got = pfaffian_det(th)
            want = d ** (d - 2) * discriminant(top[::-1])
            assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_extend_table_gaussian_product():
    tab = extend_table(initial_state_bi(2, 1.0, 1.0), 2)
    assert tab.entry(2, 0) == pytest.approx(math.pi / 8, rel=1e-10)
    assert tab.entry(1, 1) == pytest.approx(0.25, rel=1e-10)
    assert tab.entry(1, 0) == pytest.approx(SQRT_PI / 4, rel=1e-10)


def test_extend_table_cubic_product():
    # at a product point every entry factorizes into gamma moments
    tab = extend_table(initial_state_bi(3, 1.0, 1.0), 3)
    g = [G13, G23, 1.0 / 3.0, G13 / 3]  # Gamma((m+1)/3)/3 for m = 0..3
    for (i, j), v in tab.T.items():
        assert v == pytest.approx(g[i] * g[j], rel=1e-8), (i, j)


def test_extend_table_matches_quadrature():
    th = ThetaBi(2, {(2, 0): -1.0, (1, 1): -0.8, (0, 2): -1.3, (1, 0): 0.4})
    tab = extend_table(table_from_oracle(th), 2)
    for (i, j), v in tab.T.items():
        assert v == pytest.approx(quad_A_bi(th, st=(i, j)), rel=1e-5), (i, j)


def test_transport_to_cross_term():
    target = ThetaBi(2, {(2, 0): -1.0, (1, 1): -math.sqrt(2.0), (0, 2): -1.0})
    tab = transport_bi(initial_state_bi(2, 1.0, 1.0), target)
    assert tab.norm_const == pytest.approx(
        math.pi / (4 * math.sqrt(2)), rel=1e-7
    )
    assert tab.last_transport_error < 1e-7


def test_transport_with_linear_terms():
    # factorizes: integral of e^{-x+x... } splits into univariate pieces
    target = ThetaBi(2, {(2, 0): -1.0, (0, 2): -1.0, (1, 0): -1.0})
    tab = transport_bi(initial_state_bi(2, 1.0, 1.0), target)
    want = 0.5456413607650469 * SQRT_PI / 2
    assert tab.norm_const == pytest.approx(want, rel=1e-8)


def test_transport_generic_vs_quadrature():
    target = ThetaBi(2, {(2, 0): -1.0, (1, 1): -1.0, (0, 2): -1.0})
    tab = transport_bi(initial_state_bi(2, 1.0, 1.0), target)
    assert tab.norm_const == pytest.approx(quad_A_bi(target), rel=1e-5)


def test_transport_cubic_vs_quadrature():
    target = ThetaBi(
        3, {(3, 0): -1.0, (0, 3): -1.0, (2, 1): -0.4, (1, 2): -0.3, (1, 0): 0.5}
    )
    tab = transport_bi(initial_state_bi(3, 1.0, 1.0), target)
    for st in base_indices(3):
        assert tab.entry(*st) == pytest.approx(
            quad_A_bi(target, st=st), rel=1e-5
        ), st


def test_transpose_symmetry():
    th = ThetaBi(2, {(2, 0): -1.2, (1, 1): -0.7, (0, 2): -0.9, (1, 0): 0.3})
    tab = extend_table(transport_bi(initial_state_bi(2, 1.2, 0.9), th), 2)
    tab_t = extend_table(
        transport_bi(initial_state_bi(2, 0.9, 1.2), th.transpose()), 2
    )
    for (i, j), v in tab.T.items():
        assert v == pytest.approx(tab_t.entry(j, i), rel=1e-8), (i, j)


def test_theorem_equation_residuals():
    # d=2: the two annihilating relations at order 1,
    # sum_i i theta_ij T[i-1+a, j+b] contracts against the axis constants
    th = ThetaBi(2, {(2, 0): -1.0, (1, 1): -0.8, (0, 2): -1.3})
    tab = extend_table(transport_bi(initial_state_bi(2, 1.0, 1.3), th), 1)
    ax, ay = boundary_consts(th, 0)
    t = tab.entry
    x_resid = (
        2 * th[2, 0] * t(1, 0) + th[1, 1] * t(0, 1) + ay[0]
    )
    y_resid = (
        2 * th[0, 2] * t(0, 1) + th[1, 1] * t(1, 0) + ax[0]
    )
    assert abs(x_resid) <= 1e-8
    assert abs(y_resid) <= 1e-8


def test_transport_rejects_improper_target():
    # positive cross term makes the top form vanish on the quadrant
    start = initial_state_bi(2, 1.0, 1.0)
    bad = ThetaBi(2, {(2, 0): -1.0, (1, 1): 3.0, (0, 2): -1.0})
    with pytest.raises(PathSingularity):
        transport_bi(start, bad)


def test_transport_rejects_chamber_crossing_quadratic():
    # theta_11 = -3 is proper on the quadrant but past the theta_11 = -2
    # wall where det P vanishes
    start = initial_state_bi(2, 1.0, 1.0)
    target = ThetaBi(2, {(2, 0): -1.0, (1, 1): -3.0, (0, 2): -1.0})
    with pytest.raises(PathCrossesSingularity):
        transport_bi(start, target)


def test_transport_rejects_chamber_crossing_cubic():
    # product point has one real top root; the target has three
    start = initial_state_bi(3, 1.0, 1.0)
    target = ThetaBi(3, {(3, 0): -1.0, (2, 1): -6.0, (1, 2): -11.0, (0, 3): -6.0})
    with pytest.raises(PathCrossesSingularity):
        transport_bi(start, target)


def test_oracle_seed_reaches_far_chamber():
    # same chamber as the blocked target above: seed there by quadrature
    theta0 = ThetaBi(3, {(3, 0): -1.0, (2, 1): -6.0, (1, 2): -11.0, (0, 3): -6.0})
    target = ThetaBi(3, {(3, 0): -1.0, (2, 1): -6.2, (1, 2): -11.6, (0, 3): -6.6})
    tab = transport_bi(table_from_oracle(theta0), target)
    assert tab.norm_const == pytest.approx(quad_A_bi(target), rel=1e-5)


def test_transport_degree_mismatch():
    with pytest.raises(InputError):
        transport_bi(initial_state_bi(2, 1.0, 1.0), product_theta(3))


def test_table_validation():
    th = product_theta(3)
    with pytest.raises(InputError):
        DerivTableBi(th, {(0, 0): 1.0})  # below base order 2d-4 = 2
    full = {st: 1.0 for st in base_indices(3)}
    missing = dict(full)
    del missing[(1, 1)]
    with pytest.raises(InputError):
        DerivTableBi(th, missing)
    tab = DerivTableBi(th, full)
    with pytest.raises(AttributeError):
        tab.max_order = 5
