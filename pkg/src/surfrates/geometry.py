"""Pointwise geometric and kinematic quantities of a moving surface.

All tensor fields are stored in chart components with component axes first
and broadcast (grid) axes last.  Index conventions:

* metric ``g[i, j]`` covariant, ``ginv`` contravariant;
* ``Gamma_low[i, j, k] = <dd_ij X, d_k X>`` (first kind), ``Gamma[k, i, j]``
  second kind, symmetric in (i, j);
* shape operator ``B_mixed[i, j] = B^i_j`` with the sign fixed by
  ``B = -grad nu`` (so ``d_i nu = -B^j_i d_j X``);
* velocity blocks: ``G[i, j] = G^i_j`` the tangential gradient (mixed) and
  ``b_cov[i]`` the normal-coupling covector, for both the material and the
  chart (observer) velocity.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._fd import c4_d1
from .chart_kernel import ChartJet, Event, MovingSurface, eval_jet
from .errors import NonEmbeddingError
from .util import det2, inv2

__all__ = [
    "GeometrySample",
    "MotionSample",
    "geometry_from_jet",
    "geometry_at",
    "geometry_grid",
    "motion_from_jet",
    "motion_at",
    "motion_grid",
    "IdentityResidual",
    "IdentityReport",
    "check_identities",
]


@dataclass
class GeometrySample:
    jet: ChartJet
    g: np.ndarray
    ginv: np.ndarray
    sqrtdetg: np.ndarray
    Gamma_low: np.ndarray
    Gamma: np.ndarray
    nu: np.ndarray
    dnu: np.ndarray
    II: np.ndarray
    B_mixed: np.ndarray
    H: np.ndarray
    K: np.ndarray

    @property
    def dX(self) -> np.ndarray:
        return self.jet.dX

    def embed_mixed(self, M: np.ndarray) -> np.ndarray:
        """Push a mixed tangential operator M^i_j to its 3x3 Cartesian proxy."""
        return np.einsum(
            "ai...,ij...,jk...,bk...->ab...", self.dX, M, self.ginv, self.dX
        )

    def embed_contra(self, r2: np.ndarray) -> np.ndarray:
        """Push contravariant components r^\\{ij\\} to the 3x3 Cartesian proxy."""
        return np.einsum("ai...,ij...,bj...->ab...", self.dX, r2, self.dX)

    def embed_vec(self, w2: np.ndarray) -> np.ndarray:
        """Push contravariant vector components to R^3."""
        return np.einsum("ai...,i...->a...", self.dX, w2)

    def lift_cov(self, w_cov: np.ndarray) -> np.ndarray:
        """Raise a covector and push it to R^3."""
        return self.embed_vec(np.einsum("ij...,j...->i...", self.ginv, w_cov))


def geometry_from_jet(jet: ChartJet) -> GeometrySample:
    g = np.einsum("ai...,aj...->ij...", jet.dX, jet.dX)
    detg = det2(g)
    if np.any(detg < 1e-12):
        raise NonEmbeddingError("det g below 1e-12: chart is not an embedding here")
    ginv = inv2(g)
    Gamma_low = np.einsum("aij...,ak...->ijk...", jet.ddX, jet.dX)
    Gamma = np.einsum("kl...,ijl...->kij...", ginv, Gamma_low)
    cross = np.cross(jet.dX[:, 0], jet.dX[:, 1], axis=0)
    nu = cross / np.sqrt(np.einsum("a...,a...->...", cross, cross))
    II = np.einsum("aij...,a...->ij...", jet.ddX, nu)
    B_mixed = np.einsum("ik...,kj...->ij...", ginv, II)
    H = np.einsum("ii...->...", B_mixed)
    K = det2(B_mixed)
    dnu = -np.einsum("aj...,ji...->ai...", jet.dX, B_mixed)
    return GeometrySample(
        jet=jet,
        g=g,
        ginv=ginv,
        sqrtdetg=np.sqrt(detg),
        Gamma_low=Gamma_low,
        Gamma=Gamma,
        nu=nu,
        dnu=dnu,
        II=II,
        B_mixed=B_mixed,
        H=H,
        K=K,
    )


def geometry_at(surface: MovingSurface, event: Event) -> GeometrySample:
    return geometry_from_jet(eval_jet(surface, event))


def geometry_grid(surface: MovingSurface, t: float, Y1, Y2) -> GeometrySample:
    """Batched geometry; Y1, Y2 broadcastable coordinate arrays."""
    return geometry_from_jet(surface.jet(t, Y1, Y2))


@dataclass
class MotionSample:
    V_o: np.ndarray
    V_m: np.ndarray
    dV_o: np.ndarray
    dV_m: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    Du: np.ndarray
    dtu: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    vperp: np.ndarray
    G: np.ndarray
    b_cov: np.ndarray
    b3: np.ndarray
    G_obs: np.ndarray
    b_obs_cov: np.ndarray
    b_obs3: np.ndarray
    A: np.ndarray
    S: np.ndarray
    Gcal: np.ndarray
    Acal: np.ndarray


def _gradient_blocks(geom: GeometrySample, V: np.ndarray, dV: np.ndarray):
    """Tangential gradient (mixed) and normal-coupling covector of a velocity.

    Exact from jets: G^i_j = g^{ik}<d_k X, d_j V> equals the covariant form
    v^i_{|j} - vperp B^i_j because d_j V already differentiates the normal
    direction; b_j = <nu, d_j V>.
    """
    P = np.einsum("ak...,aj...->kj...", geom.dX, dV)
    vcov = np.einsum("a...,ai...->i...", V, geom.dX)
    vperp = np.einsum("a...,a...->...", V, geom.nu)
    G = np.einsum("ik...,kj...->ij...", geom.ginv, P)
    b_cov = np.einsum("a...,aj...->j...", geom.nu, dV)
    return G, b_cov, vcov, vperp


def _g_adjoint(geom: GeometrySample, M: np.ndarray) -> np.ndarray:
    return np.einsum("ik...,lk...,lj...->ij...", geom.ginv, M, geom.g)


def motion_from_jet(geom: GeometrySample, u2, du, dtu) -> MotionSample:
    jet = geom.jet
    V_o = jet.Vt
    dV_o = jet.dVt
    u3 = geom.embed_vec(u2)
    V_m = V_o + u3
    dV_m = (
        dV_o
        + np.einsum("kj...,ak...->aj...", du, jet.dX)
        + np.einsum("k...,akj...->aj...", u2, jet.ddX)
    )
    G_m, b_m, vcov_m, vperp_m = _gradient_blocks(geom, V_m, dV_m)
    G_o, b_o, _, _ = _gradient_blocks(geom, V_o, dV_o)
    v2 = np.einsum("ij...,j...->i...", geom.ginv, vcov_m)
    v3 = V_m - vperp_m * geom.nu
    b3 = geom.lift_cov(b_m)
    b_obs3 = geom.lift_cov(b_o)
    Du = du + np.einsum("ijl...,l...->ij...", geom.Gamma, u2)
    adjG = _g_adjoint(geom, G_m)
    A = 0.5 * (G_m - adjG)
    S = 0.5 * (G_m + adjG)
    Gcal = (
        geom.embed_mixed(G_m)
        + np.einsum("a...,b...->ab...", geom.nu, b3)
        - np.einsum("a...,b...->ab...", b3, geom.nu)
    )
    Acal = 0.5 * (Gcal - np.einsum("ab...->ba...", Gcal))
    return MotionSample(
        V_o=V_o,
        V_m=V_m,
        dV_o=dV_o,
        dV_m=dV_m,
        u2=u2,
        u3=u3,
        Du=Du,
        dtu=dtu,
        v2=v2,
        v3=v3,
        vperp=vperp_m,
        G=G_m,
        b_cov=b_m,
        b3=b3,
        G_obs=G_o,
        b_obs_cov=b_o,
        b_obs3=b_obs3,
        A=A,
        S=S,
        Gcal=Gcal,
        Acal=Acal,
    )


def motion_at(
    surface: MovingSurface, event: Event, geom: GeometrySample | None = None
) -> MotionSample:
    if geom is None:
        geom = geometry_at(surface, event)
    u2 = surface.u(event.t, event.y1, event.y2)
    du, dtu = surface.u_jet(event.t, event.y1, event.y2)
    return motion_from_jet(geom, u2, du, dtu)


def motion_grid(
    surface: MovingSurface, t: float, Y1, Y2, geom: GeometrySample | None = None
) -> MotionSample:
    if geom is None:
        geom = geometry_grid(surface, t, Y1, Y2)
    u2 = surface.u(t, Y1, Y2)
    du, dtu = surface.u_jet(t, Y1, Y2)
    return motion_from_jet(geom, u2, du, dtu)


# ---------------------------------------------------------------------------
# identity checks


@dataclass
class IdentityResidual:
    identity_name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tol


@dataclass
class IdentityReport:
    items: list[IdentityResidual]

    @property
    def max_residual(self) -> float:
        return max(i.residual for i in self.items)

    @property
    def all_pass(self) -> bool:
        return all(i.passed for i in self.items)

    def to_json_obj(self) -> list[dict]:
        return [
            {
                "identity_name": i.identity_name,
                "residual": i.residual,
                "tol": i.tol,
                "pass": i.passed,
            }
            for i in self.items
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2)


def _maxabs(a) -> float:
    return float(np.max(np.abs(a)))


def _probe_vector(t, y1, y2):
    """Deterministic smooth tangential proxies used by the rate-compatibility checks."""
    return np.stack(
        [np.sin(y1) + 0.3 * t * t, np.cos(y2) + 0.5 * t]
    )


def _probe_tensor(t, y1, y2):
    r11 = np.sin(y1) + t * t
    r12 = 0.3 * np.cos(y2) + 0.1 * t
    r21 = 0.2 * np.sin(y2)
    r22 = np.cos(y1) * np.cos(y2) - 0.4 * t
    return np.stack([np.stack([r11, r12]), np.stack([r21, r22])])


def check_identities(
    surface: MovingSurface, event: Event, tol: float | None = None
) -> IdentityReport:
    """Residuals of the pointwise differential-geometric identities at one event.

    Covers the structure equations (Gauss formula, Weingarten map), metric
    derivative rules, the velocity-gradient split, the normal- and metric-rate
    relations, and raising/lowering compatibility of proxy time derivatives.
    """
    if tol is None:
        tol = 1e-8 if surface.diff_mode == "analytic" else 1e-6
    t, y1, y2 = event.t, event.y1, event.y2
    geom = geometry_at(surface, event)
    mot = motion_at(surface, event, geom)
    h = 0.1 * surface.space_step
    ht = surface.fd_time_step
    items: list[IdentityResidual] = []

    def add(name, residual):
        items.append(IdentityResidual(name, float(residual), tol))

    # structure equations (all terms exact from the jet)
    gauss = (
        geom.jet.ddX
        - np.einsum("kij...,ak...->aij...", geom.Gamma, geom.dX)
        - np.einsum("ij...,a...->aij...", geom.II, geom.nu)
    )
    add("gauss-formula", _maxabs(gauss))

    def nu_at(a, b):
        jet = surface.jet(t, a, b)
        cross = np.cross(jet.dX[:, 0], jet.dX[:, 1], axis=0)
        return cross / np.sqrt(np.einsum("a...,a...->...", cross, cross))

    fd_dnu = np.stack(
        [
            c4_d1(lambda a: nu_at(a, y2), y1, h),
            c4_d1(lambda b: nu_at(y1, b), y2, h),
        ],
        axis=1,
    )
    add("weingarten", _maxabs(fd_dnu - geom.dnu))

    def g_at(tt, a, b):
        jet = surface.jet(tt, a, b)
        return np.einsum("ai...,aj...->ij...", jet.dX, jet.dX)

    fd_dg = np.stack(
        [
            c4_d1(lambda a: g_at(t, a, y2), y1, h),
            c4_d1(lambda b: g_at(t, y1, b), y2, h),
        ]
    )
    # d_l g_ij = Gamma_low[l,i,j] + Gamma_low[l,j,i]
    add(
        "metric-compat-lower",
        _maxabs(fd_dg - (geom.Gamma_low + np.einsum("lij...->lji...", geom.Gamma_low))),
    )

    def ginv_at(a, b):
        return inv2(g_at(t, a, b))

    fd_dginv = np.stack(
        [
            c4_d1(lambda a: ginv_at(a, y2), y1, h),
            c4_d1(lambda b: ginv_at(y1, b), y2, h),
        ]
    )
    expected = -(
        np.einsum("ik...,jlk...->lij...", geom.ginv, geom.Gamma)
        + np.einsum("jk...,ilk...->lij...", geom.ginv, geom.Gamma)
    )
    add("metric-compat-upper", _maxabs(fd_dginv - expected))

    # Cayley-Hamilton for the shape operator: B^2 = H B - K Id
    B = geom.B_mixed
    add(
        "shape-operator-cayley-hamilton",
        _maxabs(B @ B - geom.H * B + geom.K * np.eye(2)),
    )

    # additivity of the material velocity blocks in the relative velocity
    add("velocity-gradient-additivity", _maxabs(mot.G - mot.G_obs - mot.Du))
    add(
        "normal-coupling-additivity",
        _maxabs(mot.b_cov - mot.b_obs_cov - geom.II @ mot.u2),
    )

    # velocity gradient split d_j V = G^i_j d_i X + b_j nu (exact on both sides)
    for tag, V, dV, G, b in (
        ("observer", mot.V_o, mot.dV_o, mot.G_obs, mot.b_obs_cov),
        ("material", mot.V_m, mot.dV_m, mot.G, mot.b_cov),
    ):
        resid = (
            dV
            - np.einsum("ij...,ai...->aj...", G, geom.dX)
            - np.einsum("j...,a...->aj...", b, geom.nu)
        )
        add(f"velocity-gradient-split-{tag}", _maxabs(resid))

    # normal rates
    fd_dtnu = c4_d1(lambda s: nu_at_time(surface, s, y1, y2), t, ht)
    add("normal-rate", _maxabs(fd_dtnu + mot.b_obs3))
    adv = np.einsum("k...,ak...->a...", mot.u2, geom.dnu)
    add("normal-rate-advected", _maxabs(fd_dtnu + adv + mot.b3))
    add("normal-rate-orthogonality", abs(float(np.dot(fd_dtnu, geom.nu))))

    # metric rate d_t g = G[V_o] + G[V_o]^T (covariant)
    fd_dtg = c4_d1(lambda s: g_at(s, y1, y2), t, ht)
    G_obs_cov = np.einsum("ik...,kj...->ij...", geom.g, mot.G_obs)
    add("metric-rate", _maxabs(fd_dtg - (G_obs_cov + np.einsum("ij...->ji...", G_obs_cov))))

    # raising/lowering compatibility of proxy time derivatives
    P = G_obs_cov + np.einsum("ij...->ji...", G_obs_cov)

    def eta_cov_at(s):
        return g_at(s, y1, y2) @ _probe_vector(s, y1, y2)

    lhs = c4_d1(eta_cov_at, t, ht)
    rhs = geom.g @ c4_d1(lambda s: _probe_vector(s, y1, y2), t, ht) + P @ _probe_vector(
        t, y1, y2
    )
    add("covector-rate-compat", _maxabs(lhs - rhs))

    def r_cov_at(s):
        gs = g_at(s, y1, y2)
        return gs @ _probe_tensor(s, y1, y2) @ gs

    M = _probe_tensor(t, y1, y2)
    lhs = c4_d1(r_cov_at, t, ht)
    rhs = (
        geom.g @ c4_d1(lambda s: _probe_tensor(s, y1, y2), t, ht) @ geom.g
        + P @ M @ geom.g
        + geom.g @ M @ P
    )
    add("2-tensor-rate-compat", _maxabs(lhs - rhs))

    return IdentityReport(items)


def nu_at_time(surface: MovingSurface, t, y1, y2):
    jet = surface.jet(t, y1, y2)
    cross = np.cross(jet.dX[:, 0], jet.dX[:, 1], axis=0)
    return cross / np.sqrt(np.einsum("a...,a...->...", cross, cross))
