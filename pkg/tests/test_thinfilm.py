import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from surfrates.chart_kernel import get_scenario, sample_events
from surfrates.errors import ShellDegenerateError
from surfrates.geometry import geometry_at, motion_at
from surfrates.thinfilm import (
    LIMIT_QUANTITIES,
    ShellEvent,
    fit_order,
    limit_study,
    shell_chart,
    shell_velocity,
    shell_velocity_gradient,
)


def test_shell_chart_reduces_to_surface(torus_drift, torus_events):
    ev = torus_events[0]
    sev = ShellEvent(ev.t, ev.y1, ev.y2, 0.0)
    geom = geometry_at(torus_drift, ev)
    pos, frame = shell_chart(torus_drift, sev)
    assert_allclose(pos, geom.jet.X, atol=1e-12)
    assert_allclose(frame[:, 0], geom.dX[:, 0], atol=1e-12)
    assert_allclose(frame[:, 1], geom.dX[:, 1], atol=1e-12)
    assert_allclose(frame[:, 2], geom.nu, atol=1e-12)


def test_shell_velocity_reduces_to_material(torus_drift, torus_events):
    ev = torus_events[1]
    mot = motion_at(torus_drift, ev)
    sev = ShellEvent(ev.t, ev.y1, ev.y2, 0.0)
    assert_allclose(shell_velocity(torus_drift, sev), mot.V_m, atol=1e-12)


def test_shell_gradient_limits_to_surface_gradient(torus_drift, torus_events):
    ev = torus_events[2]
    mot = motion_at(torus_drift, ev)
    sev = ShellEvent(ev.t, ev.y1, ev.y2, 0.0)
    grad = shell_velocity_gradient(torus_drift, sev)
    assert np.max(np.abs(grad - mot.Gcal)) < 1e-8


def test_shell_degenerate_offset(torus_static):
    # the (R0=2, r=1) torus has principal curvature 1/r: offset xi = 1 folds
    with pytest.raises(ShellDegenerateError):
        shell_chart(torus_static, ShellEvent(0.0, 0.3, 0.4, 1.0))


@pytest.mark.parametrize("quantity", LIMIT_QUANTITIES)
def test_limit_orders_torus_drift(torus_drift, quantity):
    ev = sample_events(torus_drift, 1, 7)[0]
    rep = limit_study(torus_drift, quantity, ev)
    assert rep.fitted_order >= 0.9
    assert len(rep.rows) == 4


def test_exact_limits_report_inf(torus_drift):
    ev = sample_events(torus_drift, 1, 9)[0]
    for quantity in ("ScalarDot", "MaterialDt", "JaumannDt"):
        rep = limit_study(torus_drift, quantity, ev)
        assert math.isinf(rep.fitted_order)
        obj = rep.to_json_obj()
        assert obj["fitted_order"] == "inf"


def test_fit_order_recovers_slope():
    rows = [(h, 0.7 * h**1.8) for h in (0.1, 0.05, 0.025, 0.0125)]
    assert_allclose(fit_order(rows), 1.8, atol=1e-10)
    zero_rows = [(h, 0.0) for h in (0.1, 0.05)]
    assert math.isinf(fit_order(zero_rows))


def test_convergence_report_json_shape(torus_drift):
    ev = sample_events(torus_drift, 1, 7)[0]
    rep = limit_study(torus_drift, "UpperDt", ev)
    obj = rep.to_json_obj()
    assert obj["quantity"] == "UpperDt"
    assert isinstance(obj["fitted_order"], float)
    assert [r["xi"] for r in obj["rows"]] == [0.1, 0.05, 0.025, 0.0125]
