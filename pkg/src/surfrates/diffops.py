"""Surface differential operators: gradients and Laplacians, pointwise and
on periodic grids.

Pointwise Laplacians come in two independent flavors:

* ``Beltrami``: apply the scalar Laplace-Beltrami stencil to every Cartesian
  proxy component;
* ``Decomposed``: assemble the same object from the tangential/normal split
  blocks and curvature couplings, with the tangential-tensor Laplacians built
  by two sweeps of covariant differentiation.

The grid Laplacian uses the divergence form with matched central differences,
which makes it exactly self-adjoint against the quadrature weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._fd import c4_d1, c4_d1_nested, c4_d2
from .chart_kernel import Event, MovingSurface
from .errors import ConfigError, NotConformingError, RankError, StencilError
from .fields import QSplit, TensorSplit, TensorValue, pi_q_components
from .geometry import GeometrySample, geometry_at, geometry_from_jet, geometry_grid
from .timederiv import FieldClosure, QFieldClosure, _split_closures

__all__ = [
    "scalar_laplace",
    "surface_gradient",
    "surface_laplace",
    "conforming_laplace",
    "GridGeometry",
    "GridField",
    "make_grid",
    "grid_gradient",
    "grid_laplace",
    "FourierInterpolant",
]


# ---------------------------------------------------------------------------
# pointwise operators


def _scalar_laplace(surface: MovingSurface, fun: Callable, event: Event, geom: GeometrySample):
    """Laplace-Beltrami of a chart closure; elementwise on array values."""
    t, y1, y2 = event.t, event.y1, event.y2
    h = surface.space_step
    f1 = c4_d1(lambda a: fun(t, a, y2), y1, h)
    f2 = c4_d1(lambda b: fun(t, y1, b), y2, h)
    f11 = c4_d2(lambda a: fun(t, a, y2), y1, h)
    f22 = c4_d2(lambda b: fun(t, y1, b), y2, h)
    f12 = c4_d1_nested(lambda a, b: fun(t, a, b), y1, h, y2, h)
    hess = ((f11, f12), (f12, f22))
    grad = (f1, f2)
    out = 0.0
    for i in range(2):
        for j in range(2):
            corr = sum(geom.Gamma[k, i, j] * grad[k] for k in range(2))
            out = out + geom.ginv[i, j] * (hess[i][j] - corr)
    return out


def _comp_cov_deriv(surface: MovingSurface, comp_eval: Callable, rank: int, t, a, b):
    """Covariant derivative array of a tangential component closure at (a, b);
    the differentiation index is last."""
    h = surface.space_step
    geom = geometry_from_jet(surface.jet(t, a, b))
    v = np.asarray(comp_eval(t, a, b), dtype=float)
    d1 = c4_d1(lambda x: comp_eval(t, x, b), a, h)
    d2 = c4_d1(lambda x: comp_eval(t, a, x), b, h)
    dv = np.stack([d1, d2], axis=-1)
    if rank == 1:
        return dv + np.einsum("ikl,l->ik", geom.Gamma, v)
    return (
        dv
        + np.einsum("ikl,lj->ijk", geom.Gamma, v)
        + np.einsum("jkl,il->ijk", geom.Gamma, v)
    )


def _tangential_laplace(
    surface: MovingSurface, comp_eval: Callable, rank: int, event: Event, geom: GeometrySample
):
    """Bochner Laplacian of tangential components by two covariant sweeps."""
    t, y1, y2 = event.t, event.y1, event.y2
    h = surface.space_step

    def T_of(a, b):
        return _comp_cov_deriv(surface, comp_eval, rank, t, a, b)

    T0 = T_of(y1, y2)
    dT1 = c4_d1(lambda x: T_of(x, y2), y1, h)
    dT2 = c4_d1(lambda x: T_of(y1, x), y2, h)
    dT = np.stack([dT1, dT2], axis=-1)
    G = geom.Gamma
    if rank == 1:
        full = (
            dT
            + np.einsum("ilm,mk->ikl", G, T0)
            - np.einsum("mlk,im->ikl", G, T0)
        )
        return np.einsum("kl,ikl->i", geom.ginv, full)
    full = (
        dT
        + np.einsum("ilm,mjk->ijkl", G, T0)
        + np.einsum("jlm,imk->ijkl", G, T0)
        - np.einsum("mlk,ijm->ijkl", G, T0)
    )
    return np.einsum("kl,ijkl->ij", geom.ginv, full)


def scalar_laplace(
    surface: MovingSurface, f: Callable, event: Event, geom: GeometrySample | None = None
):
    """Laplace-Beltrami of a scalar chart closure at one event."""
    if geom is None:
        geom = geometry_at(surface, event)
    return _scalar_laplace(surface, f, event, geom)


def surface_gradient(surface: MovingSurface, f: Callable, event: Event) -> np.ndarray:
    """Tangential gradient of a scalar chart closure, as a Cartesian vector."""
    t, y1, y2 = event.t, event.y1, event.y2
    geom = geometry_at(surface, event)
    h = surface.space_step
    df = np.stack(
        [
            c4_d1(lambda a: f(t, a, y2), y1, h),
            c4_d1(lambda b: f(t, y1, b), y2, h),
        ]
    )
    return geom.lift_cov(df)


def _grad_H_cov(surface: MovingSurface, event: Event) -> np.ndarray:
    t, y1, y2 = event.t, event.y1, event.y2
    h = surface.space_step

    def H_of(a, b):
        return geometry_from_jet(surface.jet(t, a, b)).H

    return np.stack(
        [c4_d1(lambda a: H_of(a, y2), y1, h), c4_d1(lambda b: H_of(y1, b), y2, h)]
    )


def surface_laplace(
    surface: MovingSurface,
    closure: FieldClosure,
    event: Event,
    path: str = "Beltrami",
    geom: GeometrySample | None = None,
) -> TensorValue:
    """Componentwise surface Laplacian of a field proxy.

    Beltrami applies the scalar operator to each Cartesian component;
    Decomposed rebuilds it from split blocks and curvature terms (rank 2).
    """
    if geom is None:
        geom = geometry_at(surface, event)
    if path == "Beltrami":
        cart = _scalar_laplace(surface, closure.eval, event, geom)
        return TensorValue(rank=closure.rank, cart=np.asarray(cart, dtype=float))
    if path != "Decomposed":
        raise ConfigError(f"unknown surface_laplace path {path!r}")
    if closure.rank != 2:
        raise RankError("the Decomposed Laplacian path applies to rank-2 fields")

    t, y1, y2 = event.t, event.y1, event.y2
    h = surface.space_step
    rcl, eLcl, eRcl, phicl = _split_closures(closure)

    r = np.asarray(rcl(t, y1, y2), dtype=float)
    eL = np.asarray(eLcl(t, y1, y2), dtype=float)
    eR = np.asarray(eRcl(t, y1, y2), dtype=float)
    phi = float(np.asarray(phicl(t, y1, y2)))

    lap_r = _tangential_laplace(surface, rcl, 2, event, geom)
    lap_eL = _tangential_laplace(surface, eLcl, 1, event, geom)
    lap_eR = _tangential_laplace(surface, eRcl, 1, event, geom)
    lap_phi = float(np.asarray(_scalar_laplace(surface, phicl, event, geom)))

    Dr = _comp_cov_deriv(surface, rcl, 2, t, y1, y2)
    DeL = _comp_cov_deriv(surface, eLcl, 1, t, y1, y2)
    DeR = _comp_cov_deriv(surface, eRcl, 1, t, y1, y2)
    dphi_cov = np.stack(
        [
            c4_d1(lambda a: phicl(t, a, y2), y1, h),
            c4_d1(lambda b: phicl(t, y1, b), y2, h),
        ]
    )
    dH_cov = _grad_H_cov(surface, event)
    gradH_up = geom.ginv @ dH_cov
    gradphi_up = geom.ginv @ dphi_cov

    B = geom.B_mixed
    B2 = B @ B
    trB2 = float(np.trace(B2))
    B2c = B2 @ geom.ginv
    IIupup = geom.ginv @ geom.II @ geom.ginv

    tangential = (
        lap_r
        - (B2 @ r + r @ B2.T)
        - 2.0 * (DeL @ IIupup + IIupup @ DeR.T)
        - (np.einsum("k,l->kl", eL, gradH_up) + np.einsum("k,l->kl", gradH_up, eR))
        + 2.0 * phi * B2c
    )
    left = (
        2.0 * np.einsum("lmj,jm->l", Dr, B)
        + r @ dH_cov
        + lap_eL
        - trB2 * eL
        - B2 @ (eL + 2.0 * eR)
        - 2.0 * B @ gradphi_up
        - phi * gradH_up
    )
    right = (
        2.0 * np.einsum("lmj,jl->m", Dr, B)
        + dH_cov @ r
        + lap_eR
        - trB2 * eR
        - B2 @ (eR + 2.0 * eL)
        - 2.0 * B @ gradphi_up
        - phi * gradH_up
    )
    B2_cov = geom.g @ B2
    nunu = (
        2.0 * np.einsum("ij,ij->", B2_cov, r)
        + 2.0 * (np.trace(DeL @ B) + np.trace(DeR @ B))
        + (eL + eR) @ dH_cov
        + lap_phi
        - 2.0 * phi * trB2
    )

    nu = geom.nu
    cart = (
        geom.embed_contra(tangential)
        + np.einsum("a,b->ab", geom.embed_vec(left), nu)
        + np.einsum("a,b->ab", nu, geom.embed_vec(right))
        + nunu * np.einsum("a,b->ab", nu, nu)
    )
    split = TensorSplit(
        rank=2, r2=tangential, phi=np.asarray(nunu), etaL2=left, etaR2=right
    )
    return TensorValue(rank=2, cart=cart, split=split, in_sync=True)


def conforming_laplace(
    surface: MovingSurface,
    qclosure: QFieldClosure,
    event: Event,
    path: str = "ClosedForm",
    geom: GeometrySample | None = None,
    conforming_tol: float = 1e-8,
) -> QSplit:
    """Conforming Laplacian of a conforming Q-tensor field.

    ClosedForm uses the curvature-coupled expression in the (q, beta) blocks;
    Projected applies the mixed-block-killing projection to the full
    componentwise Laplacian.  Both return the result's Q-split.
    """
    if geom is None:
        geom = geometry_at(surface, event)
    t, y1, y2 = event.t, event.y1, event.y2
    qs = qclosure.q_eval(t, y1, y2)
    q = np.asarray(qs.q2, dtype=float)
    beta = float(qs.beta)
    scale = max(1.0, float(np.max(np.abs(q))), abs(beta))
    if float(np.max(np.abs(qs.eta2))) > conforming_tol * scale:
        raise NotConformingError("field has a tangent-normal coupling component")

    if path == "ClosedForm":
        qcl = lambda s, a, b: qclosure.q_eval(s, a, b).q2
        bcl = lambda s, a, b: qclosure.q_eval(s, a, b).beta
        lap_q = _tangential_laplace(surface, qcl, 2, event, geom)
        lap_beta = float(np.asarray(_scalar_laplace(surface, bcl, event, geom)))
        B2 = geom.B_mixed @ geom.B_mixed
        trB2 = float(np.trace(B2))
        B2c = B2 @ geom.ginv
        piQ_B2 = B2c - 0.5 * trB2 * geom.ginv
        qblock = lap_q - trB2 * q + 3.0 * beta * piQ_B2
        bblock = lap_beta + 2.0 * np.einsum("ij,ij->", geom.g @ B2, q) - 3.0 * beta * trB2
        return QSplit(q2=qblock, eta2=np.zeros(2), beta=bblock)

    if path != "Projected":
        raise ConfigError(f"unknown conforming_laplace path {path!r}")
    full = surface_laplace(
        surface, qclosure.as_field_closure(surface), event, "Beltrami", geom
    ).cart
    nu = geom.nu
    bblock = float(nu @ full @ nu)
    low = np.einsum("ai,ab,bj->ij", geom.dX, full, geom.dX)
    r2 = geom.ginv @ low @ geom.ginv
    qblock = 0.5 * (r2 + r2.T) + 0.5 * bblock * geom.ginv
    return QSplit(q2=qblock, eta2=np.zeros(2), beta=bblock)


# ---------------------------------------------------------------------------
# periodic grids


@dataclass
class GridGeometry:
    surface: MovingSurface
    t: float
    n1: int
    n2: int
    y1: np.ndarray
    y2: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray
    h1: float
    h2: float
    geom: GeometrySample
    weights: np.ndarray

    def at_time(self, t: float) -> "GridGeometry":
        return make_grid(self.surface, t, self.n1, self.n2)


@dataclass
class GridField:
    """Values of a field on a periodic chart grid; grid axes last."""

    values: np.ndarray


def make_grid(surface: MovingSurface, t: float, n1: int, n2: int | None = None) -> GridGeometry:
    if n2 is None:
        n2 = n1
    dom = surface.domain
    if not (dom.periodic1 and dom.periodic2):
        raise ConfigError("grids require a doubly periodic chart domain")
    if min(n1, n2) < 16:
        raise StencilError("grid resolution below 16 nodes per axis")
    a1, b1 = dom.y1_range
    a2, b2 = dom.y2_range
    h1 = (b1 - a1) / n1
    h2 = (b2 - a2) / n2
    y1 = a1 + (np.arange(n1) + 0.5) * h1
    y2 = a2 + (np.arange(n2) + 0.5) * h2
    Y1, Y2 = np.meshgrid(y1, y2, indexing="ij")
    geom = geometry_grid(surface, t, Y1, Y2)
    weights = geom.sqrtdetg * h1 * h2
    return GridGeometry(
        surface=surface, t=t, n1=n1, n2=n2, y1=y1, y2=y2, Y1=Y1, Y2=Y2,
        h1=h1, h2=h2, geom=geom, weights=weights,
    )


def _central_d(F: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(F, -1, axis=axis) - np.roll(F, 1, axis=axis)) / (2.0 * h)


def grid_gradient(gg: GridGeometry, F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Chart partial derivatives (central, periodic) along both grid axes."""
    return _central_d(F, -2, gg.h1), _central_d(F, -1, gg.h2)


def grid_laplace(gg: GridGeometry, F: np.ndarray) -> np.ndarray:
    """Divergence-form Laplace-Beltrami on the periodic grid, elementwise in
    any leading component axes.  Exactly self-adjoint and negative
    semidefinite against the sqrt(det g) cell weights."""
    d1, d2 = grid_gradient(gg, F)
    ginv = gg.geom.ginv
    sq = gg.geom.sqrtdetg
    F1 = sq * (ginv[0, 0] * d1 + ginv[0, 1] * d2)
    F2 = sq * (ginv[1, 0] * d1 + ginv[1, 1] * d2)
    return (_central_d(F1, -2, gg.h1) + _central_d(F2, -1, gg.h2)) / sq


class FourierInterpolant:
    """Trigonometric interpolant of periodic grid data, with derivatives.

    Nyquist modes are zeroed so all derivative orders stay consistent; for
    smooth fields those coefficients are negligible anyway.
    """

    def __init__(self, gg: GridGeometry, F: np.ndarray):
        F = np.asarray(F, dtype=float)
        self.coef = np.fft.fft2(F, axes=(-2, -1)) / (gg.n1 * gg.n2)
        self.k1 = np.fft.fftfreq(gg.n1, d=1.0 / gg.n1)
        self.k2 = np.fft.fftfreq(gg.n2, d=1.0 / gg.n2)
        if gg.n1 % 2 == 0:
            self.coef[..., gg.n1 // 2, :] = 0.0
        if gg.n2 % 2 == 0:
            self.coef[..., :, gg.n2 // 2] = 0.0
        dom = gg.surface.domain
        self.x0 = gg.y1[0]
        self.y0 = gg.y2[0]
        self.kap1 = 2.0 * np.pi / dom.spans[0]
        self.kap2 = 2.0 * np.pi / dom.spans[1]

    def __call__(self, y1: float, y2: float, d1: int = 0, d2: int = 0):
        w1 = np.exp(1j * self.k1 * self.kap1 * (y1 - self.x0))
        w2 = np.exp(1j * self.k2 * self.kap2 * (y2 - self.y0))
        if d1:
            w1 = w1 * (1j * self.k1 * self.kap1) ** d1
        if d2:
            w2 = w2 * (1j * self.k2 * self.kap2) ** d2
        return np.real(np.einsum("...kl,k,l->...", self.coef, w1, w2))
