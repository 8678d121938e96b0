import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from surfrates.chart_kernel import Domain, Event, MovingSurface, get_scenario, sample_events
from surfrates.errors import NonEmbeddingError
from surfrates.geometry import check_identities, geometry_at, motion_at


def test_torus_geometry_literals(torus_static):
    # closed forms for the (R0=2, r=1) torus at (theta, phi) = (0.7, 1.1)
    geom = geometry_at(torus_static, Event(0.0, 0.7, 1.1))
    assert_allclose(geom.g, np.diag([1.0, 7.644352320588075]), atol=1e-12)
    assert_allclose(geom.Gamma[0, 1, 1], 1.7811602394696122, atol=1e-12)
    assert_allclose(geom.Gamma[1, 0, 1], -0.2330034206655442, atol=1e-12)
    assert_allclose(
        geom.nu,
        [-0.34692944965489897, -0.681632986593423, -0.644217687237691],
        atol=1e-12,
    )
    assert_allclose(geom.II, np.diag([1.0, 2.1146679460190976]), atol=1e-12)
    assert_allclose(geom.B_mixed, np.diag([1.0, 0.2766314080427441]), atol=1e-12)
    assert_allclose(geom.H, 1.276631408042744, atol=1e-12)
    assert_allclose(geom.K, 0.2766314080427441, atol=1e-12)


def test_expanding_sphere_motion_literals():
    surface = get_scenario("sphere-expanding")
    ev = Event(0.3, 1.1, 0.6)
    geom = geometry_at(surface, ev)
    mot = motion_at(surface, ev, geom)
    assert_allclose(mot.vperp, 0.25, atol=1e-12)
    assert_allclose(mot.G, 0.23255813953488372 * np.eye(2), atol=1e-12)
    assert_allclose(mot.b_cov, 0.0, atol=1e-12)
    assert_allclose(geom.H, -1.8604651162790697, atol=1e-12)
    assert_allclose(geom.K, 0.8653326122228232, atol=1e-12)


def test_rigid_rotation_material_velocity(sphere_rot):
    mot = motion_at(sphere_rot, Event(0.0, 1.0, 0.5))
    assert_allclose(
        mot.V_m, [-0.2823958760779344, 0.5169221838228901, 0.0], atol=1e-12
    )
    # rigid motion: symmetric part of the full velocity gradient vanishes
    assert_allclose(mot.Gcal + mot.Gcal.T, 0.0, atol=1e-12)


def test_unit_sphere_orientation(sphere_static):
    geom = geometry_at(sphere_static, Event(0.0, 1.2, 2.0))
    # outward normal: shape operator is minus the identity, H = -2, K = 1
    assert_allclose(geom.nu, geom.jet.X, atol=1e-12)
    assert_allclose(geom.B_mixed, -np.eye(2), atol=1e-12)
    assert_allclose(geom.H, -2.0, atol=1e-12)
    assert_allclose(geom.K, 1.0, atol=1e-12)


@pytest.mark.parametrize(
    "name",
    [
        "plane-shear",
        "sphere-expanding",
        "sphere-rigid-rotation",
        "torus-breathing",
        "torus-breathing-drift",
        "flat-torus",
    ],
)
def test_identity_suite_analytic(name):
    surface = get_scenario(name)
    for ev in sample_events(surface, 5, 17):
        report = check_identities(surface, ev)
        assert report.all_pass, report.to_json()


def test_identity_report_shape(torus_drift, torus_events):
    report = check_identities(torus_drift, torus_events[0])
    obj = report.to_json_obj()
    assert len(obj) == 15
    for row in obj:
        assert set(row) == {"identity_name", "residual", "tol", "pass"}


def test_degenerate_chart_raises():
    def chart(t, a, b):
        z = np.zeros_like(np.asarray(a, float))
        return np.stack([a + 0.0 * b, a + 0.0 * b, z])

    bad = MovingSurface(
        name="bad",
        chart=chart,
        domain=Domain((0.0, 1.0), (0.0, 1.0), False, False),
        u_field=None,
        diff_mode="fd",
    )
    with pytest.raises(NonEmbeddingError):
        geometry_at(bad, Event(0.0, 0.5, 0.5))


@settings(deadline=None, max_examples=40)
@given(
    y1=st.floats(0.2, 6.0),
    y2=st.floats(0.2, 6.0),
    t=st.floats(0.0, 1.0),
)
def test_cayley_hamilton_property(y1, y2, t):
    surface = get_scenario("torus-breathing")
    geom = geometry_at(surface, Event(t, y1, y2))
    B = geom.B_mixed
    assert_allclose(B @ B, geom.H * B - geom.K * np.eye(2), atol=1e-12)


@settings(deadline=None, max_examples=25)
@given(y1=st.floats(0.3, 2.8), y2=st.floats(0.1, 6.0))
def test_gradient_additivity_property(y1, y2):
    surface = get_scenario("sphere-rigid-rotation")
    ev = Event(0.4, y1, y2)
    geom = geometry_at(surface, ev)
    mot = motion_at(surface, ev, geom)
    assert_allclose(mot.G, mot.G_obs + mot.Du, atol=1e-10)
    assert_allclose(mot.b_cov, mot.b_obs_cov + geom.II @ mot.u2, atol=1e-10)


def test_gcal_antisymmetric_block_structure(torus_drift, torus_events):
    ev = torus_events[0]
    geom = geometry_at(torus_drift, ev)
    mot = motion_at(torus_drift, ev, geom)
    # normal-normal component of the full gradient proxy vanishes
    assert_allclose(geom.nu @ mot.Gcal @ geom.nu, 0.0, atol=1e-12)
    # Acal is antisymmetric
    assert_allclose(mot.Acal + mot.Acal.T, 0.0, atol=1e-12)
