"""Chart evaluation: parameterizations, derivative jets, observers, scenarios.

A moving surface is described by one chart ``X(t, y1, y2) -> R^3`` on a
rectangular coordinate domain (axes may be periodic).  Every scenario ships
closed-form derivative jets; a fourth-order finite-difference backend covers
arbitrary user charts and doubles as a cross-check oracle.

Conventions: arrays carry component axes first and broadcast axes last, so a
jet evaluated on a grid of shape S has ``X: (3,)+S``, ``dX: (3,2)+S`` with
``dX[:, i]`` the derivative along ``y_{i+1}``, and ``ddX: (3,2,2)+S``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ._fd import c4_d1, c4_d2
from .errors import ConfigError, DomainError, InversionError, NonEmbeddingError
from .util import det2, inv2

__all__ = [
    "Event",
    "Domain",
    "ChartJet",
    "MovingSurface",
    "ChartMotion",
    "eval_jet",
    "make_observer_pair",
    "rotating_chart_motion",
    "get_scenario",
    "list_scenarios",
    "fd_variant",
    "sample_events",
    "POLE_BAND",
]

POLE_BAND = 0.15


@dataclass(frozen=True)
class Event:
    """A point (t, y1, y2) in the time-extended chart domain."""

    t: float
    y1: float
    y2: float


@dataclass(frozen=True)
class Domain:
    """Admissible rectangle of chart coordinates with per-axis periodicity.

    Ranges already exclude degenerate bands (e.g. sphere poles): every
    coordinate inside the range is a valid chart point.
    """

    y1_range: tuple[float, float]
    y2_range: tuple[float, float]
    periodic1: bool = False
    periodic2: bool = False

    @property
    def spans(self) -> tuple[float, float]:
        return (
            self.y1_range[1] - self.y1_range[0],
            self.y2_range[1] - self.y2_range[0],
        )

    @property
    def scale(self) -> float:
        return min(self.spans)

    def wrap(self, y1, y2):
        """Reduce periodic coordinates to the fundamental cell."""
        if self.periodic1:
            lo, hi = self.y1_range
            y1 = lo + np.mod(np.asarray(y1, float) - lo, hi - lo)
        if self.periodic2:
            lo, hi = self.y2_range
            y2 = lo + np.mod(np.asarray(y2, float) - lo, hi - lo)
        return y1, y2

    def contains(self, y1, y2, pad: float = 0.0) -> bool:
        y1, y2 = self.wrap(y1, y2)
        ok = True
        if not self.periodic1:
            lo, hi = self.y1_range
            ok = ok and bool(np.all((y1 >= lo + pad) & (y1 <= hi - pad)))
        if not self.periodic2:
            lo, hi = self.y2_range
            ok = ok and bool(np.all((y2 >= lo + pad) & (y2 <= hi - pad)))
        return ok

    def require_inside(self, y1, y2, pad: float = 0.0) -> None:
        if not self.contains(y1, y2, pad):
            raise DomainError(
                f"coordinates outside admissible domain "
                f"y1 in {self.y1_range} (periodic={self.periodic1}), "
                f"y2 in {self.y2_range} (periodic={self.periodic2}), pad={pad}"
            )


@dataclass
class ChartJet:
    """Space/time derivative jet of a chart at one event (or a batch).

    ``X`` point, ``dX[:, i]`` first derivatives, ``ddX[:, i, j]`` second
    derivatives (symmetric in i, j), ``Vt`` the chart velocity, and
    ``dVt[:, i]`` its spatial derivatives.
    """

    X: np.ndarray
    dX: np.ndarray
    ddX: np.ndarray
    Vt: np.ndarray
    dVt: np.ndarray


def _zero_u(t, y1, y2):
    return np.zeros((2,) + np.shape(np.asarray(y1, float)))


@dataclass
class MovingSurface:
    """One chart of a moving surface plus the relative velocity field u.

    ``u_field`` returns the two contravariant components of u = V_m - V_o;
    the material observer has u = 0.  ``diff_mode`` selects closed-form jets
    ("analytic", requires ``jets``) or finite differences ("fd").
    """

    name: str
    chart: Callable
    domain: Domain
    u_field: Callable = _zero_u
    diff_mode: str = "analytic"
    jets: Optional[Callable] = None
    u_jets: Optional[Callable] = None
    fd_step: Optional[float] = None
    fd_time_step: float = 1e-3
    static: bool = False
    t_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.diff_mode not in ("analytic", "fd"):
            raise ConfigError(f"unknown diff_mode {self.diff_mode!r}")
        if self.diff_mode == "analytic" and self.jets is None:
            raise ConfigError("analytic diff_mode requires jet closures")

    @property
    def space_step(self) -> float:
        return self.fd_step if self.fd_step is not None else 1e-3 * self.domain.scale

    def position(self, t, y1, y2):
        y1, y2 = self.domain.wrap(y1, y2)
        return self.chart(t, y1, y2)

    def jet(self, t, y1, y2) -> ChartJet:
        y1, y2 = self.domain.wrap(y1, y2)
        if self.diff_mode == "analytic":
            return self.jets(t, y1, y2)
        return self._fd_jet(t, y1, y2)

    def _fd_jet(self, t, y1, y2) -> ChartJet:
        h = self.space_step
        ht = self.fd_time_step
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        pos = self.chart

        X = pos(t, y1, y2)
        d1 = c4_d1(lambda a: pos(t, a, y2), y1, h)
        d2 = c4_d1(lambda b: pos(t, y1, b), y2, h)
        dX = np.stack([d1, d2], axis=1)
        d11 = c4_d2(lambda a: pos(t, a, y2), y1, h)
        d22 = c4_d2(lambda b: pos(t, y1, b), y2, h)
        d12 = c4_d1(lambda a: c4_d1(lambda b: pos(t, a, b), y2, h), y1, h)
        ddX = np.stack(
            [np.stack([d11, d12], axis=1), np.stack([d12, d22], axis=1)], axis=1
        )
        Vt = c4_d1(lambda s: pos(s, y1, y2), t, ht)
        dVt1 = c4_d1(lambda a: c4_d1(lambda s: pos(s, a, y2), t, ht), y1, h)
        dVt2 = c4_d1(lambda b: c4_d1(lambda s: pos(s, y1, b), t, ht), y2, h)
        dVt = np.stack([dVt1, dVt2], axis=1)
        return ChartJet(X=X, dX=dX, ddX=ddX, Vt=Vt, dVt=dVt)

    def u(self, t, y1, y2):
        y1, y2 = self.domain.wrap(y1, y2)
        return self.u_field(t, y1, y2)

    def u_jet(self, t, y1, y2):
        """Return (du, dtu): du[i, j] = d_j u^i and dtu[i] = d_t u^i."""
        y1, y2 = self.domain.wrap(y1, y2)
        if self.u_jets is not None:
            return self.u_jets(t, y1, y2)
        h = self.space_step
        du1 = c4_d1(lambda a: self.u_field(t, a, y2), y1, h)
        du2 = c4_d1(lambda b: self.u_field(t, y1, b), y2, h)
        du = np.stack([du1, du2], axis=1)
        dtu = c4_d1(lambda s: self.u_field(s, y1, y2), t, self.fd_time_step)
        return du, dtu


def eval_jet(surface: MovingSurface, event: Event) -> ChartJet:
    """Evaluate the chart jet at one event, with domain and embedding checks."""
    pad = 0.0 if surface.diff_mode == "analytic" else 2.5 * surface.space_step
    surface.domain.require_inside(event.y1, event.y2, pad)
    jet = surface.jet(event.t, event.y1, event.y2)
    g = np.einsum("ai...,aj...->ij...", jet.dX, jet.dX)
    if np.any(det2(g) < 1e-12):
        raise NonEmbeddingError(
            f"chart Jacobian rank-deficient at {event} (det g < 1e-12)"
        )
    return jet


# ---------------------------------------------------------------------------
# observer pairs


@dataclass
class ChartMotion:
    """Time-dependent diffeomorphism y = phi_t(z) of the chart domain.

    ``dphi[j, i] = d phi^j / d z^i``, ``ddphi[j, i, k]`` second derivatives,
    ``dtphi[j] = d_t phi^j``, ``ddtphi[j, i] = d_i d_t phi^j``; ``inverse``
    maps y back to z at fixed t.
    """

    phi: Callable
    dphi: Callable
    dtphi: Callable
    ddphi: Callable
    ddtphi: Callable
    inverse: Optional[Callable] = None


def rotating_chart_motion(omega: float) -> ChartMotion:
    """Uniform drift of the second (periodic) coordinate: phi_t(z) = (z1, z2 + omega t)."""

    def phi(t, z1, z2):
        z1 = np.asarray(z1, float)
        return np.stack([z1, np.asarray(z2, float) + omega * t])

    def dphi(t, z1, z2):
        s = np.shape(np.asarray(z1, float))
        out = np.zeros((2, 2) + s)
        out[0, 0] = 1.0
        out[1, 1] = 1.0
        return out

    def dtphi(t, z1, z2):
        s = np.shape(np.asarray(z1, float))
        out = np.zeros((2,) + s)
        out[1] = omega
        return out

    def ddphi(t, z1, z2):
        return np.zeros((2, 2, 2) + np.shape(np.asarray(z1, float)))

    def ddtphi(t, z1, z2):
        return np.zeros((2, 2) + np.shape(np.asarray(z1, float)))

    def inverse(t, y1, y2):
        y1 = np.asarray(y1, float)
        return np.stack([y1, np.asarray(y2, float) - omega * t])

    return ChartMotion(phi, dphi, dtphi, ddphi, ddtphi, inverse)


def make_observer_pair(surface: MovingSurface, motion: ChartMotion):
    """Build a second observer of the same moving surface.

    Returns ``(surface, observed, point_map)`` where ``observed`` has chart
    ``X_B(t, z) = X_A(t, phi_t(z))`` and a relative velocity recomputed so the
    material velocity is unchanged, and ``point_map`` sends an event of B to
    the event of A at the same spatial point and time.
    """
    base = surface

    def chart_b(t, z1, z2):
        y = motion.phi(t, z1, z2)
        return base.position(t, y[0], y[1])

    def jets_b(t, z1, z2):
        y = motion.phi(t, z1, z2)
        ja = base.jet(t, y[0], y[1])
        dphi = motion.dphi(t, z1, z2)
        dtphi = motion.dtphi(t, z1, z2)
        ddphi = motion.ddphi(t, z1, z2)
        ddtphi = motion.ddtphi(t, z1, z2)
        dX = np.einsum("aj...,ji...->ai...", ja.dX, dphi)
        ddX = (
            np.einsum("ajl...,ji...,lk...->aik...", ja.ddX, dphi, dphi)
            + np.einsum("aj...,jik...->aik...", ja.dX, ddphi)
        )
        Vt = ja.Vt + np.einsum("aj...,j...->a...", ja.dX, dtphi)
        dVt = (
            np.einsum("al...,li...->ai...", ja.dVt, dphi)
            + np.einsum("ajl...,j...,li...->ai...", ja.ddX, dtphi, dphi)
            + np.einsum("aj...,ji...->ai...", ja.dX, ddtphi)
        )
        return ChartJet(X=ja.X, dX=dX, ddX=ddX, Vt=Vt, dVt=dVt)

    def u_b(t, z1, z2):
        dphi = motion.dphi(t, z1, z2)
        if np.any(np.abs(det2(dphi)) < 1e-12):
            raise InversionError("chart motion Jacobian is singular at requested point")
        y = motion.phi(t, z1, z2)
        ua = base.u(t, y[0], y[1])
        rel = ua - motion.dtphi(t, z1, z2)
        return np.einsum("ji...,j...->i...", inv2(dphi), rel)

    observed = MovingSurface(
        name=base.name + "+observer",
        chart=chart_b,
        domain=base.domain,
        u_field=u_b,
        diff_mode="analytic",
        jets=jets_b,
        u_jets=None,
        fd_step=base.fd_step,
        fd_time_step=base.fd_time_step,
        static=False,
        t_range=base.t_range,
    )

    def point_map(event: Event) -> Event:
        y = motion.phi(event.t, event.y1, event.y2)
        y1, y2 = base.domain.wrap(float(y[0]), float(y[1]))
        return Event(event.t, float(y1), float(y2))

    return base, observed, point_map


# ---------------------------------------------------------------------------
# scenario registry


def _sphere_jets(R_of_t: Callable, Rdot_of_t: Callable) -> Callable:
    def jets(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        st, ct = np.sin(y1), np.cos(y1)
        sp, cp = np.sin(y2), np.cos(y2)
        zero = np.zeros_like(st)
        R = R_of_t(t)
        Rd = Rdot_of_t(t)
        s = np.stack([st * cp, st * sp, ct])
        s_a = np.stack([ct * cp, ct * sp, -st])
        s_b = np.stack([-st * sp, st * cp, zero])
        s_aa = -s
        s_ab = np.stack([-ct * sp, ct * cp, zero])
        s_bb = np.stack([-st * cp, -st * sp, zero])
        dX = np.stack([R * s_a, R * s_b], axis=1)
        ddX = np.stack(
            [
                np.stack([R * s_aa, R * s_ab], axis=1),
                np.stack([R * s_ab, R * s_bb], axis=1),
            ],
            axis=1,
        )
        Vt = Rd * s
        dVt = np.stack([Rd * s_a, Rd * s_b], axis=1)
        return ChartJet(X=R * s, dX=dX, ddX=ddX, Vt=Vt, dVt=dVt)

    return jets


def _sphere_chart(R_of_t: Callable) -> Callable:
    def chart(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        st, ct = np.sin(y1), np.cos(y1)
        return R_of_t(t) * np.stack([st * np.cos(y2), st * np.sin(y2), ct])

    return chart


def _torus_jets(R0: float, r_of_t: Callable, rdot_of_t: Callable) -> Callable:
    def jets(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        st, ct = np.sin(y1), np.cos(y1)
        sp, cp = np.sin(y2), np.cos(y2)
        zero = np.zeros_like(st)
        r = r_of_t(t)
        rd = rdot_of_t(t)
        w = R0 + r * ct
        X = np.stack([w * cp, w * sp, r * st])
        dXa = np.stack([-r * st * cp, -r * st * sp, r * ct])
        dXb = np.stack([-w * sp, w * cp, zero])
        dX = np.stack([dXa, dXb], axis=1)
        d_aa = np.stack([-r * ct * cp, -r * ct * sp, -r * st])
        d_ab = np.stack([r * st * sp, -r * st * cp, zero])
        d_bb = np.stack([-w * cp, -w * sp, zero])
        ddX = np.stack(
            [np.stack([d_aa, d_ab], axis=1), np.stack([d_ab, d_bb], axis=1)], axis=1
        )
        Vt = rd * np.stack([ct * cp, ct * sp, st])
        dVt = np.stack(
            [
                rd * np.stack([-st * cp, -st * sp, ct]),
                rd * np.stack([-ct * sp, ct * cp, zero]),
            ],
            axis=1,
        )
        return ChartJet(X=X, dX=dX, ddX=ddX, Vt=Vt, dVt=dVt)

    return jets


def _torus_chart(R0: float, r_of_t: Callable) -> Callable:
    def chart(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        r = r_of_t(t)
        w = R0 + r * np.cos(y1)
        return np.stack([w * np.cos(y2), w * np.sin(y2), r * np.sin(y1)])

    return chart


def _const_u(c1: float, c2: float):
    def u_field(t, y1, y2):
        s = np.shape(np.asarray(y1, float))
        out = np.zeros((2,) + s)
        out[0] = c1
        out[1] = c2
        return out

    def u_jets(t, y1, y2):
        s = np.shape(np.asarray(y1, float))
        return np.zeros((2, 2) + s), np.zeros((2,) + s)

    return u_field, u_jets


def _plane_static() -> MovingSurface:
    def chart(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        return np.stack([y1, y2, np.zeros_like(y1)])

    def jets(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        zero = np.zeros_like(y1)
        one = np.ones_like(y1)
        dX = np.stack(
            [np.stack([one, zero, zero]), np.stack([zero, one, zero])], axis=1
        )
        s = np.shape(y1)
        return ChartJet(
            X=np.stack([y1, y2, zero]),
            dX=dX,
            ddX=np.zeros((3, 2, 2) + s),
            Vt=np.zeros((3,) + s),
            dVt=np.zeros((3, 2) + s),
        )

    return MovingSurface(
        name="plane-static",
        chart=chart,
        domain=Domain((-1.0, 1.0), (-1.0, 1.0)),
        jets=jets,
        static=True,
    )


def _plane_shear() -> MovingSurface:
    rate = 0.4

    def chart(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        return np.stack([y1 + rate * t * y2, y2, np.zeros_like(y1)])

    def jets(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        zero = np.zeros_like(y1)
        one = np.ones_like(y1)
        s = np.shape(y1)
        dX = np.stack(
            [
                np.stack([one, zero, zero]),
                np.stack([np.full_like(y1, rate * t), one, zero]),
            ],
            axis=1,
        )
        dVt = np.zeros((3, 2) + s)
        dVt[0, 1] = rate
        return ChartJet(
            X=np.stack([y1 + rate * t * y2, y2, zero]),
            dX=dX,
            ddX=np.zeros((3, 2, 2) + s),
            Vt=np.stack([rate * y2, zero, zero]),
            dVt=dVt,
        )

    return MovingSurface(
        name="plane-shear",
        chart=chart,
        domain=Domain((-1.0, 1.0), (-1.0, 1.0)),
        jets=jets,
    )


def _sphere_domain() -> Domain:
    return Domain((POLE_BAND, np.pi - POLE_BAND), (0.0, 2 * np.pi), periodic2=True)


def _sphere_static() -> MovingSurface:
    one = lambda t: 1.0
    zero = lambda t: 0.0
    return MovingSurface(
        name="sphere-static",
        chart=_sphere_chart(one),
        domain=_sphere_domain(),
        jets=_sphere_jets(one, zero),
        static=True,
    )


def _sphere_expanding() -> MovingSurface:
    R = lambda t: 1.0 + 0.25 * t
    Rd = lambda t: 0.25
    return MovingSurface(
        name="sphere-expanding",
        chart=_sphere_chart(R),
        domain=_sphere_domain(),
        jets=_sphere_jets(R, Rd),
    )


def _sphere_rigid_rotation() -> MovingSurface:
    one = lambda t: 1.0
    zero = lambda t: 0.0
    u_field, u_jets = _const_u(0.0, 0.7)
    return MovingSurface(
        name="sphere-rigid-rotation",
        chart=_sphere_chart(one),
        domain=_sphere_domain(),
        u_field=u_field,
        u_jets=u_jets,
        jets=_sphere_jets(one, zero),
        static=True,
    )


def _torus_domain() -> Domain:
    return Domain((0.0, 2 * np.pi), (0.0, 2 * np.pi), periodic1=True, periodic2=True)


def _torus_static() -> MovingSurface:
    r = lambda t: 1.0
    rd = lambda t: 0.0
    return MovingSurface(
        name="torus-static",
        chart=_torus_chart(2.0, r),
        domain=_torus_domain(),
        jets=_torus_jets(2.0, r, rd),
        static=True,
    )


def _torus_breathing() -> MovingSurface:
    r = lambda t: 1.0 + 0.15 * np.sin(t)
    rd = lambda t: 0.15 * np.cos(t)
    return MovingSurface(
        name="torus-breathing",
        chart=_torus_chart(2.0, r),
        domain=_torus_domain(),
        jets=_torus_jets(2.0, r, rd),
    )


def _torus_breathing_drift() -> MovingSurface:
    r = lambda t: 1.0 + 0.15 * np.sin(t)
    rd = lambda t: 0.15 * np.cos(t)
    u_field, u_jets = _const_u(0.3, 0.2)
    return MovingSurface(
        name="torus-breathing-drift",
        chart=_torus_chart(2.0, r),
        domain=_torus_domain(),
        u_field=u_field,
        u_jets=u_jets,
        jets=_torus_jets(2.0, r, rd),
    )


def _flat_torus() -> MovingSurface:
    def chart(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        return np.stack([y1, y2, np.zeros_like(y1)])

    def jets(t, y1, y2):
        y1 = np.asarray(y1, float)
        y2 = np.asarray(y2, float)
        zero = np.zeros_like(y1)
        one = np.ones_like(y1)
        s = np.shape(y1)
        dX = np.stack(
            [np.stack([one, zero, zero]), np.stack([zero, one, zero])], axis=1
        )
        return ChartJet(
            X=np.stack([y1, y2, zero]),
            dX=dX,
            ddX=np.zeros((3, 2, 2) + s),
            Vt=np.zeros((3,) + s),
            dVt=np.zeros((3, 2) + s),
        )

    return MovingSurface(
        name="flat-torus",
        chart=chart,
        domain=Domain(
            (0.0, 2 * np.pi), (0.0, 2 * np.pi), periodic1=True, periodic2=True
        ),
        jets=jets,
        static=True,
    )


_REGISTRY: dict[str, Callable[[], MovingSurface]] = {
    "plane-static": _plane_static,
    "plane-shear": _plane_shear,
    "sphere-static": _sphere_static,
    "sphere-expanding": _sphere_expanding,
    "sphere-rigid-rotation": _sphere_rigid_rotation,
    "torus-static": _torus_static,
    "torus-breathing": _torus_breathing,
    "torus-breathing-drift": _torus_breathing_drift,
    "flat-torus": _flat_torus,
}


def list_scenarios() -> list[str]:
    return sorted(_REGISTRY)


def get_scenario(name: str) -> MovingSurface:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; registered: {', '.join(list_scenarios())}"
        ) from None
    return factory()


def fd_variant(surface: MovingSurface, step: Optional[float] = None) -> MovingSurface:
    """Finite-difference twin of a surface (drops all analytic jets)."""
    return replace(
        surface,
        name=surface.name + "+fd",
        diff_mode="fd",
        jets=None,
        u_jets=None,
        fd_step=step if step is not None else surface.fd_step,
    )


def sample_events(
    surface: MovingSurface, n: int, seed: int, pad_frac: float = 0.04
) -> list[Event]:
    """Seeded random events strictly inside the admissible domain."""
    rng = np.random.default_rng(seed)
    d = surface.domain
    pads = []
    for (lo, hi), periodic in ((d.y1_range, d.periodic1), (d.y2_range, d.periodic2)):
        pad = 0.0 if periodic else pad_frac * (hi - lo) + 4.0 * surface.space_step
        pads.append((lo + pad, hi - pad))
    t_lo, t_hi = surface.t_range
    out = []
    for _ in range(n):
        t = float(rng.uniform(t_lo, t_hi))
        y1 = float(rng.uniform(*pads[0]))
        y2 = float(rng.uniform(*pads[1]))
        out.append(Event(t, y1, y2))
    return out
