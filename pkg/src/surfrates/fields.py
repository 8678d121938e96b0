"""Tensor values on a surface: Cartesian proxies, tangential/normal splits,
Q-tensor structure, and the associated projections.

Rank-1 split: R = r^i d_i X + phi nu.
Rank-2 split: R = r^{ij} d_i X otimes d_j X
                + etaL^i d_i X otimes nu + nu otimes etaR^j d_j X
                + phi nu otimes nu.
Chart components are stored contravariant, component axes first.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NotQTensorError, NotTangentialError, RankError
from .geometry import GeometrySample

__all__ = [
    "TensorSplit",
    "TensorValue",
    "QSplit",
    "split_tensor",
    "reconstruct",
    "project",
    "pi_q_components",
    "tangential_projector",
    "q_split_from_split",
    "q_split_to_split",
    "q_from_cart",
    "q_to_cart",
    "q_identity_part",
    "g_inner_vec",
    "g_inner_rank2",
]


@dataclass
class TensorSplit:
    rank: int
    r2: np.ndarray
    phi: np.ndarray
    etaL2: np.ndarray | None = None
    etaR2: np.ndarray | None = None


@dataclass
class TensorValue:
    rank: int
    cart: np.ndarray | None = None
    split: TensorSplit | None = None
    in_sync: bool = False

    def ensure_cart(self, geom: GeometrySample) -> "TensorValue":
        if self.cart is not None:
            return self
        return replace(self, cart=reconstruct(geom, self.split), in_sync=True)

    def ensure_split(self, geom: GeometrySample) -> "TensorValue":
        if self.split is not None:
            return self
        return replace(self, split=split_tensor(geom, self.cart, self.rank), in_sync=True)


def _check_rank(rank: int):
    if rank not in (1, 2):
        raise RankError(f"rank must be 1 or 2, got {rank}")


def split_tensor(geom: GeometrySample, cart: np.ndarray, rank: int) -> TensorSplit:
    _check_rank(rank)
    dX, ginv, nu = geom.dX, geom.ginv, geom.nu
    if rank == 1:
        cov = np.einsum("a...,ai...->i...", cart, dX)
        r2 = np.einsum("ij...,j...->i...", ginv, cov)
        phi = np.einsum("a...,a...->...", cart, nu)
        return TensorSplit(rank=1, r2=r2, phi=phi)
    low = np.einsum("ai...,ab...,bj...->ij...", dX, cart, dX)
    r2 = np.einsum("ik...,kl...,lj...->ij...", ginv, low, ginv)
    etaL_cov = np.einsum("ai...,ab...,b...->i...", dX, cart, nu)
    etaR_cov = np.einsum("a...,ab...,bj...->j...", nu, cart, dX)
    etaL2 = np.einsum("ij...,j...->i...", ginv, etaL_cov)
    etaR2 = np.einsum("ij...,j...->i...", ginv, etaR_cov)
    phi = np.einsum("a...,ab...,b...->...", nu, cart, nu)
    return TensorSplit(rank=2, r2=r2, phi=phi, etaL2=etaL2, etaR2=etaR2)


def reconstruct(geom: GeometrySample, split: TensorSplit) -> np.ndarray:
    _check_rank(split.rank)
    dX, nu = geom.dX, geom.nu
    if split.rank == 1:
        return geom.embed_vec(split.r2) + split.phi * nu
    out = geom.embed_contra(split.r2)
    etaL3 = geom.embed_vec(split.etaL2)
    etaR3 = geom.embed_vec(split.etaR2)
    out = out + np.einsum("a...,b...->ab...", etaL3, nu)
    out = out + np.einsum("a...,b...->ab...", nu, etaR3)
    out = out + split.phi * np.einsum("a...,b...->ab...", nu, nu)
    return out


def tangential_projector(geom: GeometrySample) -> np.ndarray:
    """Pi_S = Id - nu otimes nu as a 3x3 Cartesian matrix."""
    eye = np.zeros(geom.nu.shape[:1] + geom.nu.shape, dtype=float)
    for a in range(3):
        eye[a, a] = 1.0
    return eye - np.einsum("a...,b...->ab...", geom.nu, geom.nu)


def project(geom: GeometrySample, cart: np.ndarray, which: str, rank: int | None = None) -> np.ndarray:
    """Project a Cartesian proxy onto {Tangential, Q, CQ} structure.

    Tangential: rank 1 removes the normal part, rank 2 projects both slots.
    Q: symmetric, surface-traceless, tangential part (rank 2 only).
    CQ: removes the mixed tangent-normal blocks (rank 2 only).
    """
    if rank is None:
        if cart.shape == geom.nu.shape:
            rank = 1
        elif cart.shape == (3,) + geom.nu.shape:
            rank = 2
        else:
            raise RankError(f"cannot infer rank from proxy shape {cart.shape}")
    nu = geom.nu
    if which == "Tangential":
        if rank == 1:
            return cart - np.einsum("a...,a...->...", cart, nu) * nu
        Pi = tangential_projector(geom)
        return np.einsum("ac...,cd...,db...->ab...", Pi, cart, Pi)
    if rank != 2:
        raise RankError(f"projection {which!r} requires rank 2")
    if which == "Q":
        Pi = tangential_projector(geom)
        T = np.einsum("ac...,cd...,db...->ab...", Pi, cart, Pi)
        Tsym = 0.5 * (T + np.einsum("ab...->ba...", T))
        tr = np.einsum("aa...->...", Tsym)
        return Tsym - 0.5 * tr * Pi
    if which == "CQ":
        etaL = np.einsum("ab...,b...->a...", cart, nu)
        etaL = etaL - np.einsum("a...,a...->...", etaL, nu) * nu
        etaR = np.einsum("a...,ab...->b...", nu, cart)
        etaR = etaR - np.einsum("a...,a...->...", etaR, nu) * nu
        return (
            cart
            - np.einsum("a...,b...->ab...", etaL, nu)
            - np.einsum("a...,b...->ab...", nu, etaR)
        )
    raise RankError(f"unknown projection {which!r}")


def pi_q_components(geom: GeometrySample, r2: np.ndarray) -> np.ndarray:
    """Q-projection in contravariant components:
    Pi_Q(r)^{ij} = (r^{ij} + r^{ji} - (g_kl r^{kl}) g^{ij}) / 2."""
    tr = np.einsum("kl...,kl...->...", geom.g, r2)
    return 0.5 * (r2 + np.einsum("ij...->ji...", r2) - tr * geom.ginv)


# ---------------------------------------------------------------------------
# Q-tensor structure


@dataclass
class QSplit:
    """Conforming-friendly parameterization of a surface Q-tensor.

    q2: contravariant symmetric g-traceless tangential part,
    eta2: contravariant tangential coupling vector (left = right),
    beta: normal-normal scalar.
    Full proxy: Q = embed(q2) + eta (x) nu + nu (x) eta + beta (nu nu - Pi_S/2).
    """

    q2: np.ndarray
    eta2: np.ndarray
    beta: np.ndarray


def q_split_to_split(geom: GeometrySample, qs: QSplit) -> TensorSplit:
    r2 = qs.q2 - 0.5 * qs.beta * geom.ginv
    return TensorSplit(rank=2, r2=r2, phi=qs.beta, etaL2=qs.eta2, etaR2=qs.eta2)


def q_split_from_split(
    geom: GeometrySample, split: TensorSplit, tol: float = 1e-8
) -> QSplit:
    if split.rank != 2:
        raise RankError("QSplit requires a rank-2 split")
    scale = max(
        1.0,
        float(np.max(np.abs(split.r2))),
        float(np.max(np.abs(split.phi))),
    )
    if float(np.max(np.abs(split.etaL2 - split.etaR2))) > tol * scale:
        raise NotQTensorError("left and right coupling vectors differ")
    asym = split.r2 - np.einsum("ij...->ji...", split.r2)
    if float(np.max(np.abs(asym))) > tol * scale:
        raise NotQTensorError("tangential part is not symmetric")
    beta = split.phi
    q2 = split.r2 + 0.5 * beta * geom.ginv
    gtrace = np.einsum("ij...,ij...->...", geom.g, q2)
    if float(np.max(np.abs(gtrace))) > tol * scale:
        raise NotQTensorError("tangential part violates the trace relation")
    return QSplit(q2=q2, eta2=split.etaL2, beta=beta)


def q_from_cart(geom: GeometrySample, cart: np.ndarray, tol: float = 1e-8) -> QSplit:
    scale = max(1.0, float(np.max(np.abs(cart))))
    if float(np.max(np.abs(cart - np.einsum("ab...->ba...", cart)))) > tol * scale:
        raise NotQTensorError("proxy is not symmetric")
    if float(np.max(np.abs(np.einsum("aa...->...", cart)))) > tol * scale:
        raise NotQTensorError("proxy is not traceless")
    return q_split_from_split(geom, split_tensor(geom, cart, 2), tol=tol)


def q_to_cart(geom: GeometrySample, qs: QSplit) -> np.ndarray:
    return reconstruct(geom, q_split_to_split(geom, qs))


def q_identity_part(geom: GeometrySample) -> np.ndarray:
    """The proxy of nu nu - Pi_S/2, the unit basis element along beta."""
    nu = geom.nu
    return np.einsum("a...,b...->ab...", nu, nu) - 0.5 * tangential_projector(geom)


def g_inner_vec(geom: GeometrySample, a2: np.ndarray, b2: np.ndarray) -> np.ndarray:
    return np.einsum("ij...,i...,j...->...", geom.g, a2, b2)


def g_inner_rank2(geom: GeometrySample, a2: np.ndarray, b2: np.ndarray) -> np.ndarray:
    return np.einsum("ik...,jl...,ij...,kl...->...", geom.g, geom.g, a2, b2)
