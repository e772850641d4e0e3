import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SQRT2
from tubefocal import surfkit as sk
from tubefocal import tubes as tb
from tubefocal.exprcurve import jet as J
from tubefocal.exprcurve.jet import Jet


def line(u, v, du, dv, order):
    return Jet.variable(u, order, du), Jet.variable(v, order, dv)


def plane(u, v, du, dv, order):
    a, b = line(u, v, du, dv, order)
    return J.stack([a, b, 0.0])


def sphere(u, v, du, dv, order):
    a, b = line(u, v, du, dv, order)
    return J.stack([J.sin(a) * J.cos(b), J.sin(a) * J.sin(b), J.cos(a)])


def torus(u, v, du, dv, order):
    a, b = line(u, v, du, dv, order)
    ring = 2.0 + 0.7 * J.cos(b)
    return J.stack([ring * J.cos(a), ring * J.sin(a), 0.7 * J.sin(b)])


def saddle(u, v, du, dv, order):
    a, b = line(u, v, du, dv, order)
    return J.stack([a, b, a * a * 0.5 - b * b * 0.3 + a * b * 0.2])


CORPUS = {"plane": plane, "sphere": sphere, "torus": torus, "saddle": saddle}


def test_plane_jet_and_forms():
    j = sk.surface_jet(plane, 0.3, -1.2)
    np.testing.assert_array_equal(j.X_u, [1, 0, 0])
    np.testing.assert_array_equal(j.X_v, [0, 1, 0])
    for x in (j.X_uu, j.X_uv, j.X_vv):
        np.testing.assert_array_equal(x, 0)
    f = sk.fundamental_forms(j)
    assert (f.E, f.F, f.G, f.l, f.m, f.n) == (1, 0, 1, 0, 0, 0)


def test_plane_lines_are_asymptotic_and_geodesic():
    j = sk.surface_jet(plane, 0.0, 0.0)
    f = sk.fundamental_forms(j)
    for d in ("u-curve", "v-curve"):
        comp, res = sk.classify_point(j, f, d)
        assert comp == 0 and res == 0


def test_sphere_jet_matches_hand_derivatives():
    j = sk.surface_jet(sphere, math.pi / 2, 0.0)
    np.testing.assert_allclose(j.X_uu, [-1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(j.X_vv, [-1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(j.X_uv, [0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(j.X_u, [0, 0, -1], atol=1e-15)
    np.testing.assert_allclose(j.X_v, [0, 1, 0], atol=1e-15)
    fd = sk.fd_surface_jet(lambda u, v: sphere(u, v, 1.0, 0.0, 0).value, math.pi / 2, 0.0)
    for name in ("X_u", "X_v", "X_uu", "X_uv", "X_vv"):
        np.testing.assert_allclose(getattr(fd, name), getattr(j, name), atol=1e-9)


def test_sphere_is_umbilic():
    f = sk.fundamental_forms(sk.surface_jet(sphere, math.pi / 2, 0.0))
    c = sk.curvatures(f)
    # outward parametrisation normal points inward here, so curvatures are +1
    assert math.isclose(c.K, 1.0, rel_tol=1e-14)
    assert math.isclose(abs(c.H), 1.0, rel_tol=1e-14)
    assert c.kappa1 == c.kappa2


def test_umbilic_clamp_avoids_nan():
    forms = sk.FundamentalForms(*(np.array(x) for x in (1.0, 0.0, 1.0, 1.0, 1.0 + 1e-14, 0.0, 1.0)),
                                N=np.array([0.0, 0.0, 1.0]))
    c = sk.curvatures(forms)
    assert np.isfinite(c.kappa1) and np.isfinite(c.kappa2)


def test_example_one_tube_forms(spiral_spine):
    ev = tb.FrenetTubeSurface(spiral_spine, SQRT2)
    f = sk.fundamental_forms(sk.surface_jet(ev, SQRT2, 0.0))
    want = (0.25, 0.0, 2.0, -0.17677669529663687, 0.0, SQRT2)
    np.testing.assert_allclose([f.E, f.F, f.G, f.l, f.m, f.n], want, atol=1e-12)
    c = sk.curvatures(f)
    assert abs(c.K + 0.5) <= 1e-12 and abs(c.H) <= 1e-12
    assert sk.match_principal((c.kappa1, c.kappa2), (1 / SQRT2, -1 / SQRT2)) <= 1


def test_example_one_tube_jet_against_closed_form(spiral_spine):
    j = sk.surface_jet(tb.FrenetTubeSurface(spiral_spine, SQRT2), SQRT2, math.pi / 2)
    closed = tb.tube_point_frenet(spiral_spine, SQRT2, SQRT2, math.pi / 2)
    for name in ("X", "X_u", "X_v", "X_uu", "X_uv", "X_vv"):
        np.testing.assert_allclose(getattr(j, name), getattr(closed, name), atol=1e-8)


def test_example_one_tube_is_singular_at_origin(spiral_spine):
    with pytest.raises(sk.SingularPoint):
        sk.fundamental_forms(sk.surface_jet(tb.FrenetTubeSurface(spiral_spine, SQRT2), 0.0, 0.0))


def test_non_strict_mode_marks_singular_entries():
    f = sk.fundamental_forms(sk.surface_jet(sphere, np.array([0.0, 1.0]), 0.0), strict=False)
    assert np.isnan(f.N[0]).all() and np.isfinite(f.N[1]).all()


def test_example_two_tube_curvature(ex2):
    f = sk.fundamental_forms(sk.surface_jet(tb.DarbouxTubeSurface(ex2, SQRT2), 0.0, 0.0))
    assert abs(sk.curvatures(f).K + 0.5) <= 1e-8


def test_focal_parameter_curves(spiral_spine):
    ev = tb.FrenetFocalSurface(spiral_spine)
    j = sk.surface_jet(ev, SQRT2, 0.3)
    comp, _ = sk.classify_point(j, sk.fundamental_forms(j), "v-curve")
    assert abs(comp) <= 1e-12
    j = sk.surface_jet(ev, SQRT2, 0.0)
    comp, res = sk.classify_point(j, sk.fundamental_forms(j), "u")
    assert math.isclose(abs(comp), 1 / (2 * SQRT2), rel_tol=1e-12)
    assert res <= 1e-12


def test_classify_rejects_unknown_direction():
    j = sk.surface_jet(plane, 0.0, 0.0)
    with pytest.raises(ValueError):
        sk.classify_point(j, sk.fundamental_forms(j), "w")


def test_orientation_sign_and_flip():
    j = sk.surface_jet(sphere, 1.0, 0.5)
    f = sk.fundamental_forms(j)
    s = sk.orientation_sign(f.N, -f.N)
    assert s == -1
    g = f.flipped(s)
    np.testing.assert_array_equal(g.N, -f.N)
    assert g.l == -f.l and g.E == f.E


def test_scaled_error_floor():
    assert sk.scaled_error(1e-9, 0.0, 1e-6, 1e-8) == pytest.approx(0.1)
    assert sk.scaled_error(100.0, 100.0001, 1e-6, 1e-8) == pytest.approx(1.0, rel=1e-6)


def test_match_principal_ignores_order():
    assert sk.match_principal((1.0, -2.0), (-2.0, 1.0)) == 0.0
    assert sk.match_principal((1.0, -2.0), (1.0, 2.0)) > 1


params = st.tuples(st.floats(0.3, 2.8), st.floats(-3.0, 3.0))


@pytest.mark.parametrize("name", sorted(CORPUS))
@given(p=params)
@settings(max_examples=40, deadline=None)
def test_corpus_invariants(name, p):
    j = sk.surface_jet(CORPUS[name], *p)
    f = sk.fundamental_forms(j)
    c = sk.curvatures(f)
    tiny = 1e-10
    assert f.E >= 0 and f.G >= 0
    assert abs(f.W2 - (f.E * f.G - f.F**2)) <= 1e-12 * max(abs(f.W2), 1)
    assert abs(np.dot(f.N, j.X_u)) <= 1e-9 and abs(np.dot(f.N, j.X_v)) <= 1e-9
    assert abs(c.K - c.kappa1 * c.kappa2) <= tiny * max(abs(c.K), 1)
    assert abs(2 * c.H - (c.kappa1 + c.kappa2)) <= tiny * max(abs(c.H), 1)
    assert abs(np.trace(c.shape) - 2 * c.H) <= tiny * max(abs(c.H), 1)
    assert abs(np.linalg.det(c.shape) - c.K) <= tiny * max(abs(c.K), 1)
    assert j.mixed_asymmetry() <= 1e-8


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_fd_jet_agrees_with_jets(name):
    ev = CORPUS[name]
    u, v = np.linspace(0.4, 2.5, 7), np.linspace(-2, 2, 7)
    a = sk.surface_jet(ev, u, v)
    b = sk.fd_surface_jet(lambda x, y: ev(x, y, 1.0, 0.0, 0).value, u, v)
    for field in ("X_u", "X_v", "X_uu", "X_uv", "X_vv"):
        np.testing.assert_allclose(getattr(b, field), getattr(a, field), atol=1e-8)
