import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import HELIX, SQRT2, curve
from tubefocal import framekit as fk
from tubefocal import surfkit as sk
from tubefocal import tubes as tb
from tubefocal.exprcurve import parse_expr

Q = 1 / (2 * SQRT2)
JET_FIELDS = ("X", "X_u", "X_v", "X_uu", "X_uv", "X_vv")


def assert_jets_close(a, b, atol):
    for name in JET_FIELDS:
        np.testing.assert_allclose(getattr(a, name), getattr(b, name), atol=atol, err_msg=name)


def numeric(evaluator, u, v):
    j = sk.surface_jet(evaluator, u, v)
    f = sk.fundamental_forms(j)
    return j, f, sk.curvatures(f)


# Frenet tube ----------------------------------------------------------------------


def test_circle_tube_inner_equator(circle_spine):
    np.testing.assert_allclose(tb.tube_point_frenet(circle_spine, 1.0, 0.0, 0.0).X, [1, 0, 0], atol=1e-15)


def test_spiral_tube_top_point(spiral, spiral_spine):
    X = tb.tube_point_frenet(spiral_spine, SQRT2, SQRT2, math.pi / 2).X
    g = spiral.jet(SQRT2, 0).value
    np.testing.assert_allclose(X, g + [0, 0, SQRT2], atol=1e-14)


def test_spiral_tube_u_partial(spiral_spine):
    cf = tb.tube_forms_frenet(spiral_spine, SQRT2, SQRT2, 0.0)
    T = fk.frenet_at(spiral_spine.curve, SQRT2).T
    np.testing.assert_allclose(cf.jet.X_u, 0.5 * T, atol=1e-15)
    assert_jets_close(cf.jet, sk.surface_jet(tb.FrenetTubeSurface(spiral_spine, SQRT2), SQRT2, 0.0), 1e-8)


def test_spiral_tube_forms_anchor(spiral_spine):
    cf = tb.tube_forms_frenet(spiral_spine, SQRT2, SQRT2, 0.0)
    f, c = cf.forms, cf.curv
    got = [f.E, f.F, f.G, f.l, f.m, f.n, c.K, c.H, c.kappa1, c.kappa2]
    want = [0.25, 0, 2, -0.1767767, 0, 1.4142136, -0.5, 0, 0.7071068, -0.7071068]
    np.testing.assert_allclose(got, want, atol=1e-7)
    _, fn, cn = numeric(tb.FrenetTubeSurface(spiral_spine, SQRT2), SQRT2, 0.0)
    s = sk.orientation_sign(fn.N, f.N)
    assert np.all(sk.scaled_error([s * fn.l, s * fn.n, cn.K, s * cn.H], [f.l, f.n, c.K, c.H], 1e-8, 1e-8) <= 1)


@pytest.mark.parametrize("u", [0.3, 1.0, 2.7])
def test_top_of_tube_is_flat_and_asymptotic(spiral_spine, u):
    cf = tb.tube_forms_frenet(spiral_spine, SQRT2, u, math.pi / 2)
    assert abs(cf.forms.l) < 1e-16 and abs(cf.curv.K) < 1e-16


def test_spiral_tube_singular_at_origin(spiral_spine):
    with pytest.raises(sk.SingularPoint):
        tb.tube_forms_frenet(spiral_spine, SQRT2, 0.0, 0.0)


def test_space_curve_is_not_a_valid_frenet_spine():
    with pytest.raises(tb.NotPlanar):
        tb.FrenetSpine(curve(HELIX), span=(0.0, 3.0))


def test_raised_plane_curve_is_not_planar():
    with pytest.raises(tb.NotPlanar):
        tb.FrenetSpine(curve(("2*cos(u/2)", "2*sin(u/2)", "1")), span=(0.0, 3.0))


def test_tolerance_override_rejects_unknown_keys():
    assert tb.DEFAULT_TOL.override(eps_b=1e-6).eps_b == 1e-6
    with pytest.raises(KeyError):
        tb.DEFAULT_TOL.override(eps_q=1.0)


# Frenet focal ----------------------------------------------------------------------


def test_focal_point_on_evolute(spiral_spine):
    for u in (0.5, SQRT2, 3.0):
        f = fk.frenet_at(spiral_spine.curve, u)
        X = tb.focal_point_frenet(spiral_spine, u, 0.0).X
        np.testing.assert_allclose(X, spiral_spine.curve.jet(u, 0).value + f.N1 / f.kappa, atol=1e-13)


def test_spiral_focal_anchor(spiral_spine):
    cf = tb.focal_forms_frenet(spiral_spine, SQRT2, 0.0)
    f = cf.forms
    np.testing.assert_allclose([f.E, f.F, f.G, f.l, cf.curv.H], [1, 0, 8, 0.35355339, 0.1767767], atol=1e-8)
    assert cf.curv.K == 0 and f.m == 0 and f.n == 0
    _, fn, cn = numeric(tb.FrenetFocalSurface(spiral_spine), SQRT2, 0.0)
    s = sk.orientation_sign(fn.N, f.N)
    assert abs(s * cn.H - 1 / (4 * SQRT2)) <= 1e-6
    assert abs(cn.K) <= 1e-8


def test_focal_pole_in_v(spiral_spine):
    with pytest.raises(tb.FocalPoleV):
        tb.focal_point_frenet(spiral_spine, 1.0, math.pi / 2)


def test_circle_focal_sheet_is_degenerate(circle_spine):
    for u in (0.0, 2.0, 5.0):
        with pytest.raises(tb.FocalDegenerate):
            tb.focal_forms_frenet(circle_spine, u, 0.1)


# Darboux tube ------------------------------------------------------------------------


def straight_line_on_plane():
    z = parse_expr("0")
    return fk.DirectDarboux(curve(("u", "0", "0")), curve(("1", "0", "0")), curve(("0", "1", "0")),
                            curve(("0", "0", "1")), z, z, z)


@pytest.mark.parametrize("v", [0.0, 1.0, 4.0])
def test_line_on_plane_gives_cylinder(v):
    cf = tb.tube_forms_darboux(straight_line_on_plane(), 0.5, 1.0, v)
    np.testing.assert_allclose(cf.jet.X_u, [1, 0, 0], atol=1e-16)
    assert math.isclose(np.linalg.norm(cf.jet.X_v), 0.5)
    assert cf.curv.K == 0


def test_example_two_tube_anchor(ex2):
    cf = tb.tube_forms_darboux(ex2, SQRT2, 0.0, 0.0)
    dj = ex2.frame(0.0, 0)
    np.testing.assert_allclose(cf.jet.X, dj.gamma.value + SQRT2 * dj.Y.value, atol=1e-15)
    f, c = cf.forms, cf.curv
    np.testing.assert_allclose([f.E, f.F, f.G, c.K, c.H], [0.75, 1.0, 2.0, -0.5, 0.0], atol=1e-12)
    _, fn, cn = numeric(tb.DarbouxTubeSurface(ex2, SQRT2), 0.0, 0.0)
    assert abs(cn.K + 0.5) <= 1e-8 and abs(cn.H) <= 1e-8
    assert_jets_close(cf.jet, sk.surface_jet(tb.DarbouxTubeSurface(ex2, SQRT2), 0.0, 0.0), 1e-8)


@pytest.mark.parametrize("u", [0.0, 2.0])
def test_v_partial_has_length_r(ex2, u):
    for v in np.linspace(0, 6, 7):
        assert math.isclose(np.linalg.norm(tb.tube_point_darboux(ex2, SQRT2, u, v).X_v), SQRT2, rel_tol=1e-14)


def test_zero_b_gives_flat_point(ex2):
    cf = tb.tube_forms_darboux(ex2, SQRT2, 1.0, -math.pi / 4)
    assert abs(cf.curv.K) < 1e-16 and abs(cf.curv.kappa2) < 1e-16


def test_b_equal_inverse_radius_is_singular(ex2):
    # b = sin(v + pi/4) / 2, so b r = 1 needs r = 2 at v = pi/4
    with pytest.raises(sk.SingularPoint):
        tb.tube_forms_darboux(ex2, 2.0, 0.0, math.pi / 4)


def test_b_scalar_partials(ex2):
    v = np.linspace(-1, 1, 9)
    dj = ex2.frame(np.zeros_like(v), 2)
    B = tb.b_scalar(dj, v)
    np.testing.assert_allclose(B.b, Q * (np.cos(v) + np.sin(v)), atol=1e-15)
    np.testing.assert_allclose(B.b_v, Q * (np.cos(v) - np.sin(v)), atol=1e-15)
    np.testing.assert_array_equal(B.b_u, 0)
    np.testing.assert_array_equal(B.b_vv, -B.b)


# Darboux focal ----------------------------------------------------------------------


def test_example_two_focal_mean_curvature(ex2):
    cf = tb.focal_forms_darboux(ex2, 0.0, 0.0)
    assert abs(cf.curv.H + 0.25) <= 1e-12
    _, fn, cn = numeric(tb.DarbouxFocalSurface(ex2), 0.0, 0.0)
    s = sk.orientation_sign(fn.N, cf.forms.N)
    assert abs(s * cn.H + 0.25) <= 1e-6


def test_example_two_focal_pole(ex2):
    with pytest.raises(tb.FocalPoleB):
        tb.focal_point_darboux(ex2, 0.0, -math.pi / 4)


def test_example_two_focal_degenerate_line(ex2):
    with pytest.raises(tb.FocalDegenerate):
        tb.focal_forms_darboux(ex2, 3.0, math.pi / 4)


def test_masks_for_example_two(ex2):
    v = np.array([-math.pi / 4, 0.0, math.pi / 4])
    m = tb.singularity_masks("darboux", "focal", ex2, None, np.zeros(3), v)
    assert m["pole_b"].tolist() == [True, False, False]
    assert m["degenerate"].tolist() == [False, False, True]


# cross-branch consistency ------------------------------------------------------------


@given(u=st.floats(0.2, 3.8), v=st.floats(-1.3, 1.3))
@settings(max_examples=40, deadline=None)
def test_darboux_branch_reduces_to_frenet_for_planar_spine(spiral_spine, u, v):
    src = fk.FrenetDarboux(spiral_spine.curve, parse_expr("0"))
    assert_jets_close(tb.tube_darboux(src, 0.7, u, v).jet, tb.tube_frenet(spiral_spine, 0.7, u, v).jet, 1e-10)
    a, b = tb.focal_darboux(src, u, v), tb.focal_frenet(spiral_spine, u, v)
    scale = max(1.0, float(np.max(np.abs(b.jet.X_vv))))
    assert_jets_close(a.jet, b.jet, 1e-10 * scale)
    assert abs(a.curv.H + b.curv.H) <= 1e-10 * max(1.0, abs(b.curv.H))  # focal normals are opposite


def test_plane_curve_darboux_focal_matches_frenet_formula(circle_spine):
    # the sheet is degenerate here, so only positions are compared and the curvature divisions are silenced
    src = fk.FrenetDarboux(circle_spine.curve, parse_expr("0"))
    with np.errstate(divide="ignore", invalid="ignore"):
        for u, v in [(0.0, 0.3), (2.0, -1.0)]:
            np.testing.assert_allclose(tb.focal_darboux(src, u, v).jet.X, tb.focal_frenet(circle_spine, u, v).jet.X,
                                       atol=1e-12)


@given(u=st.floats(0.2, 3.8), v=st.floats(-3.1, 3.1))
@settings(max_examples=40, deadline=None)
def test_closed_form_jets_match_numeric_path(spiral_spine, ex2, u, v):
    assert_jets_close(tb.tube_frenet(spiral_spine, SQRT2, u, v).jet,
                      sk.surface_jet(tb.FrenetTubeSurface(spiral_spine, SQRT2), u, v), 1e-8)
    assert_jets_close(tb.tube_darboux(ex2, SQRT2, u, v).jet,
                      sk.surface_jet(tb.DarbouxTubeSurface(ex2, SQRT2), u, v), 1e-8)


def test_tube_mask_is_zero_set_of_w(spiral_spine):
    u, v = np.meshgrid(np.linspace(0, 2, 41), np.linspace(-1, 1, 41), indexing="ij")
    W = tb.tube_frenet(spiral_spine, SQRT2, u, v).W
    m = tb.singularity_masks("frenet", "tube", spiral_spine, SQRT2, u, v)["singular"]
    assert m[0, 20] and m.sum() == 1
    np.testing.assert_array_equal(m, W <= tb.DEFAULT_TOL.eps_reg)


def test_focal_masks_track_zero_set_of_w_star(ex2):
    u, v = np.meshgrid(np.linspace(0, 3, 31), np.linspace(-math.pi / 4, math.pi / 4, 41), indexing="ij")
    masks = tb.singularity_masks("darboux", "focal", ex2, None, u, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        W = tb.focal_darboux(ex2, u, v).W
    bad = masks["pole_b"] | masks["degenerate"]
    assert np.all(bad[:, 0]) and np.all(bad[:, -1]) and not np.any(bad[:, 1:-1])
    assert np.all(np.isfinite(W[~bad]) & (W[~bad] > tb.DEFAULT_TOL.eps_reg))
