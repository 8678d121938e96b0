import numpy as np
import pytest
from numpy.testing import assert_allclose

from surfrates.chart_kernel import Event, get_scenario, sample_events
from surfrates.diffops import (
    FourierInterpolant,
    conforming_laplace,
    grid_gradient,
    grid_laplace,
    make_grid,
    scalar_laplace,
    surface_gradient,
    surface_laplace,
)
from surfrates.errors import ConfigError, NotConformingError, StencilError
from surfrates.fields import QSplit, TensorSplit, pi_q_components
from surfrates.geometry import geometry_at
from surfrates.probes import probe_conforming_q_field, probe_field
from surfrates.timederiv import FieldClosure, QFieldClosure
from surfrates.util import rel_residual


def test_scalar_laplace_sphere_eigenfunction(sphere_static):
    # f = cos(theta) = z restricted to the unit sphere: Delta f = -2 f
    def f(t, y1, y2):
        return np.cos(y1)

    for ev in sample_events(sphere_static, 3, 2):
        lap = scalar_laplace(sphere_static, f, ev)
        assert_allclose(lap, -2.0 * np.cos(ev.y1), atol=1e-8)


def test_scalar_laplace_flat_torus(flat_torus):
    def f(t, y1, y2):
        return np.sin(y1) + 0.5 * np.cos(y2)

    ev = Event(0.0, 1.3, 2.1)
    lap = scalar_laplace(flat_torus, f, ev)
    assert_allclose(lap, -(np.sin(1.3) + 0.5 * np.cos(2.1)), atol=1e-9)


def test_surface_gradient_sphere(sphere_static):
    # f = z on the unit sphere: tangential gradient is e3 projected
    def f(t, y1, y2):
        return np.cos(y1)

    ev = Event(0.0, 1.1, 0.7)
    geom = geometry_at(sphere_static, ev)
    grad = surface_gradient(sphere_static, f, ev)
    e3 = np.array([0.0, 0.0, 1.0])
    expected = e3 - (e3 @ geom.nu) * geom.nu
    assert_allclose(grad, expected, atol=1e-9)


def test_surface_laplace_constant_field_is_zero(torus_drift, torus_events):
    closure = probe_field(torus_drift, 2)
    const = FieldClosure(
        2,
        lambda t, a, b: np.array([[0.3, 0.1, 0.0], [0.1, -0.2, 0.4], [0.0, 0.4, 0.5]]),
    )
    ev = torus_events[0]
    la = surface_laplace(torus_drift, const, ev, "Beltrami").cart
    assert_allclose(la, 0.0, atol=1e-8)


def test_surface_laplace_nunu_sphere(sphere_static):
    # R = nu nu on the unit sphere: B = -Id_S so the decomposed form gives
    # 2 B^2 (tangential) - 2 Tr(B^2) nu nu = 2 Pi_S - 4 nu nu
    def eval_nunu(t, a, b):
        geom = geometry_at(sphere_static, Event(t, a, b))
        return np.outer(geom.nu, geom.nu)

    def split_nunu(t, a, b):
        return TensorSplit(
            rank=2,
            r2=np.zeros((2, 2)),
            phi=np.float64(1.0),
            etaL2=np.zeros(2),
            etaR2=np.zeros(2),
        )

    closure = FieldClosure(2, eval_nunu, split_nunu)
    ev = Event(0.0, 1.2, 0.8)
    geom = geometry_at(sphere_static, ev)
    Pi = np.eye(3) - np.outer(geom.nu, geom.nu)
    expected = 2.0 * Pi - 4.0 * np.outer(geom.nu, geom.nu)
    for path in ("Beltrami", "Decomposed"):
        la = surface_laplace(sphere_static, closure, ev, path).cart
        assert_allclose(la, expected, atol=1e-7)


@pytest.mark.parametrize("name", ["sphere-rigid-rotation", "torus-breathing-drift"])
def test_surface_laplace_dual_path(name):
    surface = get_scenario(name)
    closure = probe_field(surface, 2)
    for ev in sample_events(surface, 4, 31):
        a = surface_laplace(surface, closure, ev, "Beltrami").cart
        b = surface_laplace(surface, closure, ev, "Decomposed").cart
        assert rel_residual(a, b) < 1e-5


def test_conforming_laplace_sphere_constant_beta(sphere_static):
    # q = 0, beta const: q-part vanishes (B^2 isotropic), beta-part = -3 beta Tr B^2
    beta0 = 0.4

    def q_eval(t, a, b):
        return QSplit(q2=np.zeros((2, 2)), eta2=np.zeros(2), beta=beta0)

    qcl = QFieldClosure(q_eval)
    ev = Event(0.0, 1.3, 2.2)
    out = conforming_laplace(sphere_static, qcl, ev, "ClosedForm")
    assert_allclose(out.q2, 0.0, atol=1e-8)
    assert_allclose(out.beta, -3.0 * beta0 * 2.0, atol=1e-8)
    prj = conforming_laplace(sphere_static, qcl, ev, "Projected")
    assert_allclose(prj.beta, out.beta, atol=1e-6)


def test_conforming_laplace_dual_path(torus_drift):
    qcl = probe_conforming_q_field(torus_drift)
    for ev in sample_events(torus_drift, 4, 41):
        a = conforming_laplace(torus_drift, qcl, ev, "ClosedForm")
        b = conforming_laplace(torus_drift, qcl, ev, "Projected")
        scale = max(1.0, np.max(np.abs(a.q2)), abs(float(a.beta)))
        assert np.max(np.abs(a.q2 - b.q2)) / scale < 1e-5
        assert abs(float(a.beta) - float(b.beta)) / scale < 1e-5


def test_conforming_laplace_rejects_nonconforming(torus_drift, torus_events):
    from surfrates.probes import probe_q_field

    qcl = probe_q_field(torus_drift)
    with pytest.raises(NotConformingError):
        conforming_laplace(torus_drift, qcl, torus_events[0], "ClosedForm")


def test_make_grid_validation(sphere_static, torus_static):
    with pytest.raises(ConfigError):
        make_grid(sphere_static, 0.0, 32)
    with pytest.raises(StencilError):
        make_grid(torus_static, 0.0, 8)


def test_grid_weights_integrate_area(torus_static):
    # torus area = 4 pi^2 R0 r = 8 pi^2 for R0=2, r=1
    gg = make_grid(torus_static, 0.0, 64)
    assert_allclose(np.sum(gg.weights), 8.0 * np.pi**2, rtol=1e-4)


def test_grid_laplace_flat_torus_symbol(flat_torus):
    # wide central stencil: eigenvalue of sin(k y) is -(sin(k h)/h)^2 exactly
    gg = make_grid(flat_torus, 0.0, 32)
    k = 3.0
    F = np.sin(k * gg.Y1)
    lam = -((np.sin(k * gg.h1) / gg.h1) ** 2)
    assert_allclose(grid_laplace(gg, F), lam * F, atol=1e-10)


def test_grid_laplace_self_adjoint_negative(torus_static):
    gg = make_grid(torus_static, 0.0, 32)
    rng = np.random.default_rng(5)
    F = rng.normal(size=(32, 32))
    G = rng.normal(size=(32, 32))
    LF = grid_laplace(gg, F)
    LG = grid_laplace(gg, G)
    ip1 = np.sum(LF * G * gg.weights)
    ip2 = np.sum(F * LG * gg.weights)
    assert_allclose(ip1, ip2, rtol=1e-12, atol=1e-10)
    assert np.sum(LF * F * gg.weights) <= 1e-12


def test_grid_gradient_matches_symbol(flat_torus):
    gg = make_grid(flat_torus, 0.0, 32)
    k = 2.0
    F = np.sin(k * gg.Y2)
    d1, d2 = grid_gradient(gg, F)
    assert_allclose(d1, 0.0, atol=1e-12)
    assert_allclose(d2, (np.sin(k * gg.h2) / gg.h2) * np.cos(k * gg.Y2), atol=1e-12)


def test_fourier_interpolant_reproduces_band_limited(torus_static):
    gg = make_grid(torus_static, 0.0, 32)
    F = np.sin(2.0 * gg.Y1) + 0.3 * np.cos(3.0 * gg.Y2) + 0.1 * np.sin(gg.Y1 + gg.Y2)
    itp = FourierInterpolant(gg, F)
    # exact at a sample of nodes (query points are scalars)
    for i, j in ((0, 0), (3, 7), (17, 30), (31, 1)):
        assert_allclose(itp(gg.y1[i], gg.y2[j]), F[i, j], atol=1e-12)
    # exact off the grid and for derivatives of trig polynomials
    y1, y2 = 1.234, 4.321
    expected = np.sin(2.0 * y1) + 0.3 * np.cos(3.0 * y2) + 0.1 * np.sin(y1 + y2)
    assert_allclose(itp(y1, y2), expected, atol=1e-12)
    d1 = 2.0 * np.cos(2.0 * y1) + 0.1 * np.cos(y1 + y2)
    assert_allclose(itp(y1, y2, d1=1), d1, atol=1e-11)
    d22 = -0.3 * 9.0 * np.cos(3.0 * y2) - 0.1 * np.sin(y1 + y2)
    assert_allclose(itp(y1, y2, d2=2), d22, atol=1e-11)


def test_laplace_q_part_stays_q_tensor(torus_drift, torus_events):
    # the componentwise Laplacian of a Q-tensor field is symmetric trace-free
    from surfrates.probes import probe_q_field

    qcl = probe_q_field(torus_drift)
    fcl = qcl.as_field_closure(torus_drift)
    ev = torus_events[0]
    la = surface_laplace(torus_drift, fcl, ev, "Beltrami").cart
    assert np.max(np.abs(la - la.T)) < 1e-8
    assert abs(np.trace(la)) < 1e-8
