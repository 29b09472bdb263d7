import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import random_chart_points, sym_christoffel, sym_metric, sym_riemann
from siklos import ambient
from siklos.ambient import AmbientGeometry, DefiningFunction
from siklos.errors import ChartError, ChartExit, SingularMetric, StepError
from siklos.verify import ORACLE_H, metric_compatibility, random_defining_function

# 0-based indices: d1 -> 0, ..., d4 -> 3


def geo(H="0", beta=1.0):
    return AmbientGeometry(DefiningFunction(H), beta)


# metric ----------------------------------------------------------------


def test_metric_ads():
    g = ambient.metric_at(geo("0"), [0, 0, 1, 0])
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[1, 0] = expected[2, 2] = expected[3, 3] = 1.0
    assert_allclose(g, expected, atol=0)


def test_metric_quartic_g22():
    g = ambient.metric_at(geo("x3^4"), [0, 0, 2, 0])
    assert g[1, 1] == pytest.approx(4.0)


@pytest.mark.parametrize("x3", [0.0, -1.0])
def test_metric_chart_error(x3):
    with pytest.raises(ChartError):
        ambient.metric_at(geo("x3^2"), [0, 0, x3, 0])


def test_metric_invariants(rng):
    for p in random_chart_points(rng, 20):
        G = geo("x3^2+x2*x4", beta=1.7)
        g = ambient.metric_at(G, p)
        c = 1.7**2 / p[2] ** 2
        assert np.linalg.det(g) == pytest.approx(-(c**4), rel=1e-10)
        ev = np.linalg.eigvalsh(g)
        assert (ev < 0).sum() == 1 and (ev > 0).sum() == 3
        assert_allclose(g, sym_metric("x3^2+x2*x4", p, 1.7), rtol=1e-14)


def test_inverse_metric_examples():
    gi = ambient.inverse_metric(ambient.metric_at(geo("0"), [0, 0, 1, 0]))
    assert gi[0, 1] == 1.0 and gi[1, 1] == 0.0
    g = ambient.metric_at(geo("5"), [0, 0, 1, 0])
    gi = ambient.inverse_metric(g)
    assert gi[0, 0] == pytest.approx(-5.0)
    assert_allclose(g @ gi, np.eye(4), atol=1e-10)


def test_inverse_metric_singular():
    with pytest.raises(SingularMetric):
        ambient.inverse_metric(np.zeros((4, 4)))


# connection ------------------------------------------------------------


def test_christoffel_table_entries():
    G = ambient.christoffel_closed(geo("x3^2*sin(x2)+x4"), [0.3, 0.7, 2.0, -1.0])
    assert G[2, 0, 1] == pytest.approx(0.5)
    assert G[0, 0, 2] == pytest.approx(-0.5)


def test_christoffel_ads_h_terms_vanish():
    G = ambient.christoffel_closed(geo("0"), [0.1, 0.2, 1.3, 0.4])
    assert G[0, 1, 1] == 0 and G[3, 1, 1] == 0 and G[2, 1, 1] == 0


def test_christoffel_ads_nonzero_components():
    G = ambient.christoffel_koszul(geo("0"), [0, 0, 1, 0])
    nz = {(k, i, j) for k, i, j in zip(*np.nonzero(np.abs(G) > 1e-12)) if i <= j}
    # G^1_13, G^2_23, G^3_12, G^3_33, G^3_44, G^4_34 (with i <= j)
    assert nz == {(0, 0, 2), (1, 1, 2), (2, 0, 1), (2, 2, 2), (2, 3, 3), (3, 2, 3)}


def test_christoffel_h_prime_4():
    G = ambient.christoffel_koszul(geo("x2*x4"), [0.4, 1.3, 0.8, -0.6])
    assert G[0, 1, 3] == pytest.approx(1.3 / 2)


@pytest.mark.parametrize("H", ORACLE_H)
def test_closed_connection_matches_symbolic(H, rng):
    for p in random_chart_points(rng, 10):
        assert_allclose(ambient.christoffel_closed(geo(H, 1.3), p), sym_christoffel(H, p, 1.3), atol=1e-12)


@pytest.mark.parametrize("H", ORACLE_H)
def test_closed_matches_koszul(H, rng):
    for p in random_chart_points(rng, 100):
        G = geo(H)
        assert_allclose(ambient.christoffel_closed(G, p), ambient.christoffel_koszul(G, p), atol=1e-9)


def test_closed_matches_koszul_random_expressions(rng):
    for _ in range(20):
        G = AmbientGeometry(random_defining_function(rng), rng.uniform(0.5, 2.0))
        for p in random_chart_points(rng, 5):
            assert_allclose(ambient.christoffel_closed(G, p), ambient.christoffel_koszul(G, p), atol=1e-9)


def test_christoffel_symmetry_and_compatibility(rng):
    for p in random_chart_points(rng, 20):
        G = geo("x3^3+sin(x2)*x4")
        gam = ambient.christoffel_closed(G, p)
        assert_allclose(gam, gam.transpose(0, 2, 1), atol=0)
        assert metric_compatibility(G, p) < 1e-7


# curvature -------------------------------------------------------------


def test_riemann_table_entry():
    R = ambient.riemann_closed(geo("x3^2+x4^2"), [0, 0, 1, 0])
    assert R[0, 0, 1, 0] == pytest.approx(-1.0)


def test_riemann_ads_entry():
    R = ambient.riemann_closed(geo("0"), [0, 0, 1, 0])
    assert R[2, 1, 2, 1] == 0.0 and R[3, 1, 2, 1] == 0.0


def test_riemann_quartic_entry():
    R = ambient.riemann_closed(geo("x3^4"), [0, 0, 1, 0])
    assert R[2, 1, 2, 1] == pytest.approx(5.0)


@pytest.mark.parametrize("H", ORACLE_H)
def test_closed_riemann_matches_symbolic(H, rng):
    for p in random_chart_points(rng, 10):
        assert_allclose(ambient.riemann_closed(geo(H, 0.8), p), sym_riemann(H, p, 0.8), atol=1e-10)


def test_riemann_symbolic_with_mixed_h(rng):
    H = "x3^2*sin(x2)+x2*x4^2+exp(x4)*x3"
    for p in random_chart_points(rng, 10):
        assert_allclose(ambient.riemann_closed(geo(H), p), sym_riemann(H, p), atol=1e-10)


def test_closed_riemann_matches_finite_differences(rng):
    G = geo("x3^4")
    for p in random_chart_points(rng, 100):
        assert_allclose(ambient.riemann_closed(G, p), ambient.riemann_from_gamma(G, p), atol=1e-6)


def test_riemann_symmetries(rng):
    G = geo("x3^2+x2*x4")
    for p in random_chart_points(rng, 20):
        r = ambient.riemann_from_gamma(G, p)
        assert_allclose(r, -r.transpose(0, 2, 1, 3), atol=1e-9)
        closed = ambient.symmetry_residuals(ambient.lower_riemann(G, p, ambient.riemann_closed(G, p)))
        numeric = ambient.symmetry_residuals(ambient.lower_riemann(G, p, r))
        assert max(closed.values()) < 1e-9
        assert max(numeric.values()) < 1e-6


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_ads_constant_curvature(beta, rng):
    G = geo("0", beta)
    e3, e4 = np.eye(4)[2], np.eye(4)[3]
    for p in random_chart_points(rng, 10):
        assert ambient.sectional_curvature(G, p, e3, e4) == pytest.approx(-1 / beta**2, abs=1e-10)
        assert_allclose(ambient.riemann_from_gamma(G, p), ambient.constant_curvature_tensor(G, p), atol=1e-6)


# helpers and predicates ------------------------------------------------


def test_f_helpers_quartic():
    f = ambient.f_helpers(geo("x3^4"), [0, 0, 1, 0])
    assert_allclose(tuple(f), (10.0, 8.0, -2.0, -4.0))


def test_f_helpers_ads_and_quadratic():
    assert tuple(ambient.f_helpers(geo("0"), [0, 0, 1.5, 0])) == (0, 0, 0, 0)
    assert ambient.f_helpers(geo("x3^2"), [0, 0, 1, 0]).f1 == pytest.approx(2.0)


def test_f_helper_invariants(rng):
    G = geo("x3^3*cos(x2)+x4^2*x3")
    for p in random_chart_points(rng, 20):
        f = ambient.f_helpers(G, p)
        j = G.H.jet(p[1], p[2], p[3])
        d = j.hess[1, 1] - j.hess[2, 2]
        x3 = p[2]
        assert f.f1 - f.f3 == pytest.approx(x3**2 * d, rel=1e-10, abs=1e-12)
        assert f.f2 - f.f4 == pytest.approx(x3 * d, rel=1e-10, abs=1e-12)


def test_kaigorodov_is_einstein(rng):
    for p in random_chart_points(rng, 20):
        pr = ambient.predicates(geo("x3^3"), p)
        assert pr.einstein and pr.residuals["einstein"] < 1e-10
        assert not pr.conformally_flat


def test_conformally_flat_and_einstein():
    pr = ambient.predicates(geo("x3^2+x4^2"), [0, 0, 1, 0])
    assert pr.conformally_flat and pr.einstein and pr.constant_curvature


def test_x3_squared_is_neither():
    pr = ambient.predicates(geo("x3^2"), [0, 0, 1, 0])
    assert not pr.einstein and not pr.conformally_flat and not pr.constant_curvature
    assert pr.residuals["einstein"] == pytest.approx(2.0)
    assert pr.residuals["conformally_flat"] == pytest.approx(2.0)


def test_predicates_agree_with_curvature():
    # conformally flat H: R takes the constant-curvature form exactly
    G = geo("x3^2+x4^2")
    p = [0.2, -0.4, 1.3, 0.9]
    assert_allclose(ambient.riemann_closed(G, p), ambient.constant_curvature_tensor(G, p), atol=1e-12)


def test_angle_condition():
    assert ambient.codazzi_angle_condition(geo("x3^3"), [0, 0, 1.2, 0], math.pi / 2) == pytest.approx(0, abs=1e-15)
    for th in (0.1, 0.7, 2.0):
        assert ambient.codazzi_angle_condition(geo("x3^2+x4^2"), [0, 0.3, 1.2, -0.5], th) == pytest.approx(0, abs=1e-14)
    for p in ([0, 0, 1, 0], [1, -1, 2.5, 0.3]):
        assert ambient.codazzi_angle_condition(geo("x3^2"), p, math.pi / 4) == pytest.approx(2.0)


# geodesics -------------------------------------------------------------


def test_geodesic_norm_conserved():
    G = geo("x3^4")
    tr = ambient.integrate_geodesic(G, [0, 0.2, 1.1, 0.3], [0.4, 0.3, 0.2, -0.5], 1.0, 1e-3)
    assert tr.t[-1] == pytest.approx(1.0)
    assert tr.norm_drift.max() < 1e-6


def test_geodesic_along_d1_keeps_other_coordinates():
    tr = ambient.integrate_geodesic(geo("x3^2"), [0, 0.5, 1.3, -0.2], [1, 0, 0, 0], 1.0, 1e-2)
    x = tr.positions
    assert_allclose(x[:, 1:], np.tile([0.5, 1.3, -0.2], (len(x), 1)), atol=1e-14)
    assert_allclose(x[:, 0], tr.t, atol=1e-12)


def test_geodesic_confined_to_hyperplane():
    lam, mu = 2.0, 1.0
    p0 = [0.1, 0.3, 1.2, lam * 0.3 + mu]
    v0 = [0.3, 0.5, 0.2, lam * 0.5]
    tr = ambient.integrate_geodesic(geo("x3^2"), p0, v0, 1.0, 1e-3)
    x = tr.positions
    assert np.max(np.abs(x[:, 3] - lam * x[:, 1] - mu)) < 1e-6


def test_geodesic_errors():
    with pytest.raises(StepError):
        ambient.integrate_geodesic(geo(), [0, 0, 1, 0], [1, 0, 0, 0], 1.0, 0.0)
    with pytest.raises(ChartExit):
        ambient.integrate_geodesic(geo(), [0, 0, 0.1, 0], [0, 0, -1, 0], 2.0, 0.5)
    with pytest.raises(ChartError):
        ambient.integrate_geodesic(geo(), [0, 0, -1, 0], [1, 0, 0, 0], 1.0, 0.1)


def test_defining_function_rejects_foreign_variables():
    with pytest.raises(ValueError):
        DefiningFunction("x1+x3")
    with pytest.raises(ValueError):
        AmbientGeometry(DefiningFunction("x3"), beta=0.0)
    assert AmbientGeometry("x3", 2.0).cosmological_constant == pytest.approx(-0.75)
