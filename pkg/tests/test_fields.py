import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from surfrates.chart_kernel import Event
from surfrates.errors import NotQTensorError, RankError
from surfrates.fields import (
    QSplit,
    g_inner_rank2,
    pi_q_components,
    project,
    q_from_cart,
    q_to_cart,
    reconstruct,
    split_tensor,
    tangential_projector,
)
from surfrates.geometry import geometry_at

mat3 = st.lists(st.floats(-1.0, 1.0), min_size=9, max_size=9).map(
    lambda v: np.array(v).reshape(3, 3)
)
vec3 = st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3).map(np.array)
mat2 = st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4).map(
    lambda v: np.array(v).reshape(2, 2)
)


@pytest.fixture(scope="module")
def geom(torus_drift, torus_events):
    return geometry_at(torus_drift, torus_events[0])


def test_split_example_sphere(sphere_static):
    # e1 x e2 outer product at the equator point (pi/2, 0): pure right-normal part
    geom = geometry_at(sphere_static, Event(0.0, np.pi / 2.0, 0.0))
    R = np.outer([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    split = split_tensor(geom, R, 2)
    assert_allclose(split.r2, 0.0, atol=1e-12)
    assert_allclose(split.etaL2, 0.0, atol=1e-12)
    assert_allclose(split.etaR2, [0.0, 1.0], atol=1e-12)
    assert_allclose(split.phi, 0.0, atol=1e-12)


@settings(deadline=None, max_examples=40)
@given(R=mat3)
def test_split_reconstruct_roundtrip_rank2(torus_drift, torus_events, R):
    geom = geometry_at(torus_drift, torus_events[0])
    split = split_tensor(geom, R, 2)
    assert_allclose(reconstruct(geom, split), R, atol=1e-10)


@settings(deadline=None, max_examples=40)
@given(p=vec3)
def test_split_reconstruct_roundtrip_rank1(torus_drift, torus_events, p):
    geom = geometry_at(torus_drift, torus_events[0])
    split = split_tensor(geom, p, 1)
    assert_allclose(reconstruct(geom, split), p, atol=1e-12)


def test_tangential_projector_idempotent(geom):
    P = tangential_projector(geom)
    assert_allclose(P @ P, P, atol=1e-12)
    assert_allclose(P, P.T, atol=1e-12)
    assert_allclose(P @ geom.nu, 0.0, atol=1e-12)
    assert_allclose(np.trace(P), 2.0, atol=1e-12)


@settings(deadline=None, max_examples=30)
@given(R=mat3, S=mat3)
def test_projection_self_adjoint_pythagoras(torus_drift, torus_events, R, S):
    geom = geometry_at(torus_drift, torus_events[1])
    PR = project(geom, R, "Tangential")
    PS = project(geom, S, "Tangential")
    assert_allclose(np.sum(PR * S), np.sum(R * PS), atol=1e-10)
    # idempotence and Pythagoras
    assert_allclose(project(geom, PR, "Tangential"), PR, atol=1e-10)
    assert_allclose(
        np.sum(R * R), np.sum(PR * PR) + np.sum((R - PR) * (R - PR)), atol=1e-9
    )


@settings(deadline=None, max_examples=30)
@given(R=mat3)
def test_q_projection_output_is_q_tensor(torus_drift, torus_events, R):
    geom = geometry_at(torus_drift, torus_events[2])
    Q = project(geom, R, "Q")
    assert_allclose(Q, Q.T, atol=1e-10)
    assert_allclose(np.trace(Q), 0.0, atol=1e-10)
    assert_allclose(project(geom, Q, "Q"), Q, atol=1e-10)


@settings(deadline=None, max_examples=30)
@given(R=mat3)
def test_cq_projection_kills_mixed_blocks(torus_drift, torus_events, R):
    geom = geometry_at(torus_drift, torus_events[3])
    C = project(geom, R, "CQ")
    P = tangential_projector(geom)
    nunu = np.outer(geom.nu, geom.nu)
    # mixed blocks vanish, the tangential and normal-normal blocks survive
    assert_allclose(P @ C @ geom.nu, 0.0, atol=1e-10)
    assert_allclose(P @ C.T @ geom.nu, 0.0, atol=1e-10)
    assert_allclose(P @ C @ P, P @ R @ P, atol=1e-10)
    assert_allclose(geom.nu @ C @ geom.nu, geom.nu @ R @ geom.nu, atol=1e-10)
    assert_allclose(project(geom, C, "CQ"), C, atol=1e-10)
    # stripping the coupling of a Q-tensor leaves its conforming part
    Q = project(geom, R, "Q") + 0.7 * (nunu - 0.5 * P)
    eta = P @ R[0]
    coupled = Q + np.outer(eta, geom.nu) + np.outer(geom.nu, eta)
    CQ = project(geom, coupled, "CQ")
    assert_allclose(CQ, Q, atol=1e-10)
    assert_allclose(np.trace(CQ), 0.0, atol=1e-10)


def test_project_rank_inference_rejects_bad_shape(geom):
    with pytest.raises(RankError):
        project(geom, np.zeros((4, 4)), "Tangential")


@settings(deadline=None, max_examples=40)
@given(m=mat2)
def test_pi_q_components_properties(torus_drift, torus_events, m):
    geom = geometry_at(torus_drift, torus_events[0])
    q = pi_q_components(geom, m)
    # symmetric, metric-traceless, idempotent
    assert_allclose(q, q.T, atol=1e-12)
    assert_allclose(np.einsum("ij,ij->", geom.g, q), 0.0, atol=1e-10)
    assert_allclose(pi_q_components(geom, q), q, atol=1e-10)


@settings(deadline=None, max_examples=40)
@given(m=mat2, s=mat2)
def test_ssq_lemma_property(torus_drift, torus_events, m, s):
    # Pi_Q(s^2 q) = (Tr s^2 / 2) q for symmetric s and metric traceless q
    geom = geometry_at(torus_drift, torus_events[1])
    q = pi_q_components(geom, m)
    s2 = 0.5 * (s + s.T)
    s_op = s2 @ geom.g
    lhs = pi_q_components(geom, s_op @ s_op @ q)
    rhs = 0.5 * np.trace(s_op @ s_op) * q
    assert_allclose(lhs, rhs, atol=1e-10)


def test_q_split_roundtrip(geom):
    q2 = pi_q_components(geom, np.array([[0.4, -0.1], [0.2, 0.3]]))
    qs = QSplit(q2=q2, eta2=np.array([0.25, -0.15]), beta=0.4)
    Q = q_to_cart(geom, qs)
    assert_allclose(Q, Q.T, atol=1e-12)
    assert_allclose(np.trace(Q), 0.0, atol=1e-12)
    back = q_from_cart(geom, Q)
    assert_allclose(back.q2, qs.q2, atol=1e-10)
    assert_allclose(back.eta2, qs.eta2, atol=1e-10)
    assert_allclose(back.beta, qs.beta, atol=1e-10)


def test_q_from_cart_rejects_non_q(geom):
    with pytest.raises(NotQTensorError):
        q_from_cart(geom, np.eye(3))
    asym = np.zeros((3, 3))
    asym[0, 1] = 1.0
    asym[1, 0] = -1.0
    with pytest.raises(NotQTensorError):
        q_from_cart(geom, asym)


def test_trace_relation(geom):
    q2 = pi_q_components(geom, np.array([[0.4, -0.1], [0.2, 0.3]]))
    eta = np.array([0.25, -0.15])
    beta = 0.4
    Q = q_to_cart(geom, QSplit(q2=q2, eta2=eta, beta=beta))
    expected = (
        g_inner_rank2(geom, q2, q2) + 2.0 * eta @ geom.g @ eta + 1.5 * beta**2
    )
    assert_allclose(np.sum(Q * Q), expected, atol=1e-12)


def test_q_identity_part(geom):
    from surfrates.fields import q_identity_part

    E = q_identity_part(geom)
    P = tangential_projector(geom)
    assert_allclose(E, np.outer(geom.nu, geom.nu) - 0.5 * P, atol=1e-12)
    assert_allclose(np.sum(E * E), 1.5, atol=1e-12)
