"""Thin-film consistency: a moving surface thickened along its normal.

The shell chart is chi(t, y, xi) = X(t, y) + xi nu(t, y), with fields and
motion extended constant in xi.  Bulk (3D) time derivatives of the extended
fields, evaluated at offset xi, converge to the corresponding surface
derivatives at rate O(xi); the scalar and plain material rates agree
identically, which is reported as infinite fitted order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._fd import c4_d1
from .chart_kernel import Event, MovingSurface
from .errors import ConfigError, ShellDegenerateError
from .geometry import geometry_from_jet, motion_from_jet, geometry_at, motion_at
from .timederiv import FieldClosure, advected_rate, convected_dt, material_dt, DerivKind
from .util import det2, frobenius

__all__ = [
    "ShellEvent",
    "shell_chart",
    "shell_velocity",
    "shell_velocity_gradient",
    "ConvergenceReport",
    "limit_study",
    "LIMIT_QUANTITIES",
]

LIMIT_QUANTITIES = (
    "ScalarDot",
    "MaterialDt",
    "UpperDt",
    "LowerDt",
    "JaumannDt",
    "Deformation",
)

ORDER_FLOOR = 1e-10


@dataclass(frozen=True)
class ShellEvent:
    t: float
    y1: float
    y2: float
    xi: float


def _surface_data(surface: MovingSurface, t, y1, y2):
    jet = surface.jet(t, y1, y2)
    geom = geometry_from_jet(jet)
    u2 = surface.u(t, y1, y2)
    du, dtu = surface.u_jet(t, y1, y2)
    mot = motion_from_jet(geom, u2, du, dtu)
    return jet, geom, mot


def shell_chart(surface: MovingSurface, sev: ShellEvent):
    """Shell position and frame columns (d1 chi, d2 chi, nu) at the event.

    Raises ShellDegenerateError when the offset reaches a focal point,
    i.e. det(Id - xi B) is not positive.
    """
    jet, geom, _ = _surface_data(surface, sev.t, sev.y1, sev.y2)
    M = np.eye(2) - sev.xi * geom.B_mixed
    if det2(M) <= 1e-12:
        raise ShellDegenerateError(
            f"offset xi={sev.xi:g} degenerates the shell chart (focal point)"
        )
    pos = jet.X + sev.xi * geom.nu
    dchi = jet.dX + sev.xi * geom.dnu
    frame = np.column_stack([dchi[:, 0], dchi[:, 1], geom.nu])
    return pos, frame


def shell_velocity(surface: MovingSurface, sev: ShellEvent) -> np.ndarray:
    """Material velocity of the shell point (constant-xi extension).

    V = V_chart + xi d_t nu + u^k d_k chi, with d_t nu = -(lift of the chart
    normal-coupling covector), all analytic from the jet.
    """
    jet, geom, mot = _surface_data(surface, sev.t, sev.y1, sev.y2)
    dnu_t = -mot.b_obs3
    dchi = jet.dX + sev.xi * geom.dnu
    return jet.Vt + sev.xi * dnu_t + np.einsum("k,ak->a", mot.u2, dchi)


def shell_velocity_gradient(surface: MovingSurface, sev: ShellEvent) -> np.ndarray:
    """Cartesian 3x3 gradient of the extended material velocity at offset xi.

    Chart partials of the shell velocity are taken by stencils in y; the
    xi-partial is analytic because the extension is affine in xi.
    """
    t, y1, y2, xi = sev.t, sev.y1, sev.y2, sev.xi
    jet, geom, mot = _surface_data(surface, t, y1, y2)
    M = np.eye(2) - xi * geom.B_mixed
    if det2(M) <= 1e-12:
        raise ShellDegenerateError(
            f"offset xi={xi:g} degenerates the shell chart (focal point)"
        )
    h = surface.space_step
    d1 = c4_d1(lambda a: shell_velocity(surface, ShellEvent(t, a, y2, xi)), y1, h)
    d2 = c4_d1(lambda b: shell_velocity(surface, ShellEvent(t, y1, b, xi)), y2, h)
    # d_xi V = d_t nu + u^k d_k nu = -(lift of b[V_m])
    dxi = -mot.b3
    dV = np.column_stack([d1, d2, dxi])
    dchi = jet.dX + xi * geom.dnu
    frame = np.column_stack([dchi[:, 0], dchi[:, 1], geom.nu])
    return dV @ np.linalg.inv(frame)


# ---------------------------------------------------------------------------
# limit study


@dataclass
class ConvergenceReport:
    quantity: str
    rows: list
    fitted_order: float

    def to_json_obj(self) -> dict:
        order = "inf" if math.isinf(self.fitted_order) else self.fitted_order
        return {
            "fitted_order": order,
            "quantity": self.quantity,
            "rows": [{"error": e, "xi": x} for (x, e) in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2)


def fit_order(rows, scale: float = 1.0) -> float:
    """Least-squares slope of log error against log step; infinite when every
    error sits below the exactness floor."""
    floor = ORDER_FLOOR * max(1.0, scale)
    errs = np.array([e for (_, e) in rows], dtype=float)
    if np.all(errs < floor):
        return math.inf
    xs = np.log(np.array([x for (x, _) in rows], dtype=float))
    ys = np.log(np.maximum(errs, 1e-300))
    A = np.stack([xs, np.ones_like(xs)], axis=1)
    slope, _ = np.linalg.lstsq(A, ys, rcond=None)[0]
    return float(slope)


def _probe_scalar(t, a, b):
    return np.sin(a) * np.cos(b) + 0.2 * t * np.sin(b)


def _probe_rank2(t, a, b):
    w = np.array([np.sin(a), np.cos(b), np.sin(a + b) + 0.5 * t])
    v = np.array([np.cos(2.0 * a) + 0.3 * t, np.sin(b - a), np.cos(b)])
    return np.outer(w, v) + 0.2 * np.outer(v, v)


def limit_study(
    surface: MovingSurface,
    quantity: str,
    event: Event,
    xi_sequence=(0.1, 0.05, 0.025, 0.0125),
) -> ConvergenceReport:
    """Compare bulk shell derivatives at offsets xi with the surface-side
    derivative, and fit the convergence order."""
    if quantity not in LIMIT_QUANTITIES:
        raise ConfigError(
            f"unknown limit quantity {quantity!r}; pick one of {LIMIT_QUANTITIES}"
        )
    t, y1, y2 = event.t, event.y1, event.y2
    geom = geometry_at(surface, event)
    mot = motion_at(surface, event, geom)

    # shell material points keep their offset, so the xi-advection speed is 0
    xidot = 0.0
    rows = []
    if quantity == "ScalarDot":
        surf_val = advected_rate(surface, _probe_scalar, event)
        scale = max(1.0, abs(float(surf_val)))
        for xi in xi_sequence:
            dxi = c4_d1(lambda x: _probe_scalar(t, y1, y2), xi, 1e-2)
            shell_val = advected_rate(surface, _probe_scalar, event) + xidot * dxi
            rows.append((xi, abs(float(shell_val - surf_val))))
        return ConvergenceReport(quantity, rows, fit_order(rows, scale))

    if quantity == "MaterialDt":
        closure = FieldClosure(rank=2, eval=_probe_rank2)
        surf_val = material_dt(surface, closure, event, "CartesianProxy").cart
        scale = max(1.0, frobenius(surf_val))
        for xi in xi_sequence:
            dxi = c4_d1(lambda x: _probe_rank2(t, y1, y2), xi, 1e-2)
            shell_val = advected_rate(surface, _probe_rank2, event) + xidot * dxi
            rows.append((xi, frobenius(shell_val - surf_val)))
        return ConvergenceReport(quantity, rows, fit_order(rows, scale))

    if quantity == "Deformation":
        S_surf = 0.5 * (mot.Gcal + mot.Gcal.T)
        scale = max(1.0, frobenius(S_surf))
        for xi in xi_sequence:
            gradv = shell_velocity_gradient(surface, ShellEvent(t, y1, y2, xi))
            S_shell = 0.5 * (gradv + gradv.T)
            rows.append((xi, frobenius(S_shell - S_surf)))
        return ConvergenceReport(quantity, rows, fit_order(rows, scale))

    kind = {
        "UpperDt": DerivKind.Upper,
        "LowerDt": DerivKind.Lower,
        "JaumannDt": DerivKind.Jaumann,
    }[quantity]
    closure = FieldClosure(rank=2, eval=_probe_rank2)
    surf_val = convected_dt(surface, closure, event, kind, "ViaMaterial").cart
    scale = max(1.0, frobenius(surf_val))
    R = _probe_rank2(t, y1, y2)
    Dm = advected_rate(surface, _probe_rank2, event)
    for xi in xi_sequence:
        gradv = shell_velocity_gradient(surface, ShellEvent(t, y1, y2, xi))
        if kind == DerivKind.Upper:
            shell_val = Dm - gradv @ R - R @ gradv.T
        elif kind == DerivKind.Lower:
            shell_val = Dm + gradv.T @ R + R @ gradv
        else:
            W = 0.5 * (gradv - gradv.T)
            shell_val = Dm - W @ R + R @ W
        rows.append((xi, frobenius(shell_val - surf_val)))
    return ConvergenceReport(quantity, rows, fit_order(rows, scale))
