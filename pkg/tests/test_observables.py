"""Lifted observables: expectations, metric adjoints, morphism calculus."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilbert_bundle.evolution import matrix_hamiltonian, propagate
from hilbert_bundle.frames import FrameField, fibre_metric
from hilbert_bundle.linalg import adjoint, commutator, max_norm
from hilbert_bundle.observables import (
    MorphismAlongPath,
    ObservableSpec,
    expectation_bundle,
    expectation_hilbert,
    lift_commutator,
    lift_function,
    lift_observable,
    metric_adjoint,
    morphism_derivation,
    morphism_time_derivative,
    two_time_morphism,
    two_time_morphism_flat,
)
from hilbert_bundle.transport import StateSection, TransportCoefficients, bundle_transport

from conftest import random_general, random_hermitian, random_state
from test_transport import driven_spec, setup_transport


def random_frame(rng, dim, scale=0.5):
    return FrameField.exponential_flow(random_general(rng, dim, scale))


def test_observable_spec_rejects_non_hermitian():
    obs = ObservableSpec(dim=2, A=lambda t: np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        obs(0.0)


def test_lift_identity_frame(rng):
    a = random_hermitian(rng, 3)
    obs = ObservableSpec.constant(a)
    lifted = lift_observable(FrameField.identity(3), obs, 0.3)
    assert max_norm(lifted - a) < 1e-14


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=10**6))
def test_expectation_equality_property(dim, seed):
    # Hilbert-side and bundle-side expectations agree for any frame
    rng = np.random.default_rng(seed)
    frame = random_frame(rng, dim)
    obs = ObservableSpec.constant(random_hermitian(rng, dim))
    psi = random_state(rng, dim)
    t = float(rng.uniform(0.0, 2.0))
    e_h = expectation_hilbert(obs, psi, t)
    L = frame(t)
    psi_fibre = np.linalg.solve(L, psi)
    e_b = expectation_bundle(lift_observable(frame, obs, t), psi_fibre, fibre_metric(frame, t))
    assert abs(e_h - e_b) < 1e-11 * (1.0 + abs(e_h))


def test_expectation_rejects_zero_state(rng):
    obs = ObservableSpec.constant(np.eye(2))
    with pytest.raises(ValueError):
        expectation_hilbert(obs, np.zeros(2), 0.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=10**6))
def test_hermitian_lifts_are_metric_adjoint_fixed_points(dim, seed):
    rng = np.random.default_rng(seed)
    frame = random_frame(rng, dim)
    obs = ObservableSpec.constant(random_hermitian(rng, dim))
    t = float(rng.uniform(0.0, 2.0))
    am = lift_observable(frame, obs, t)
    g = fibre_metric(frame, t)
    assert max_norm(metric_adjoint(am, g) - am) < 1e-11 * (1.0 + max_norm(am))


def test_non_hermitian_lift_is_not_fixed_point(rng):
    frame = random_frame(rng, 3)
    t = 0.7
    L = frame(t)
    a = random_general(rng, 3, 1.0)
    a = a + np.diag([1.0, 0.0, -1.0]) @ a  # keep it decisively non-normal
    am = np.linalg.solve(L, a @ L)
    g = fibre_metric(frame, t)
    assert max_norm(metric_adjoint(am, g) - am) > 1e-3


def test_metric_adjoint_involution(rng):
    frame = random_frame(rng, 4)
    g = fibre_metric(frame, 0.5)
    a = random_general(rng, 4, 1.0)
    assert max_norm(metric_adjoint(metric_adjoint(a, g), g) - a) < 1e-11


def test_morphism_derivative_matches_fd(rng):
    frame = random_frame(rng, 3)
    a0 = random_hermitian(rng, 3)
    obs = ObservableSpec(
        dim=3, A=lambda t: np.cos(t) * a0, dA_dt=lambda t: -np.sin(t) * a0
    )
    t = 0.9
    analytic = morphism_time_derivative(frame, obs, t)
    h = 1e-5
    fd = (lift_observable(frame, obs, t + h) - lift_observable(frame, obs, t - h)) / (2 * h)
    assert max_norm(analytic - fd) < 1e-8


def test_morphism_derivative_second_order(rng):
    frame = random_frame(rng, 2)
    a0 = random_hermitian(rng, 2)
    obs = ObservableSpec(dim=2, A=lambda t: np.cos(t) * a0, dA_dt=lambda t: -np.sin(t) * a0)
    t = 0.9
    analytic = morphism_time_derivative(frame, obs, t)
    errs = []
    for h in (4e-3, 2e-3, 1e-3):
        fd = (lift_observable(frame, obs, t + h) - lift_observable(frame, obs, t - h)) / (2 * h)
        errs.append(max_norm(analytic - fd))
    assert errs[0] / errs[1] > 3.5
    assert errs[1] / errs[2] > 3.5


def test_lift_function_polynomial(rng):
    # lifting commutes with polynomial evaluation
    frame = random_frame(rng, 3)
    a = ObservableSpec.constant(random_hermitian(rng, 3))
    b = ObservableSpec.constant(random_hermitian(rng, 3))
    poly = [((0, 1), 1.0), ((1, 0), -1.0), ((0, 0, 1, 1), 0.25), ((), 2.0)]
    t = 0.4
    lifted = lift_function(frame, poly, [a, b], t)
    la, lb = lift_observable(frame, a, t), lift_observable(frame, b, t)
    direct = la @ lb - lb @ la + 0.25 * la @ la @ lb @ lb + 2.0 * np.eye(3)
    assert max_norm(lifted - direct) < 1e-11


def test_lift_function_degree_bound(rng):
    frame = random_frame(rng, 2)
    a = ObservableSpec.constant(random_hermitian(rng, 2))
    with pytest.raises(ValueError):
        lift_function(frame, [((0,) * 9, 1.0)], [a], 0.0)


def test_lift_commutator(rng):
    frame = random_frame(rng, 4)
    a = ObservableSpec.constant(random_hermitian(rng, 4))
    b = ObservableSpec.constant(random_hermitian(rng, 4))
    t = 1.1
    lifted = lift_commutator(frame, a, b, t)
    direct = commutator(lift_observable(frame, a, t), lift_observable(frame, b, t))
    assert max_norm(lifted - direct) < 1e-12


def test_two_time_morphism_dual_forms(rng):
    frame = random_frame(rng, 3)
    a0 = random_hermitian(rng, 3)
    obs = ObservableSpec(dim=3, A=lambda t: (1.0 + 0.3 * np.sin(t)) * a0)
    for s, r in ((0.2, 1.5), (1.5, 0.2), (0.8, 0.8)):
        direct = two_time_morphism(frame, obs, s, r)
        flat = two_time_morphism_flat(frame, obs, s, r)
        assert max_norm(direct - flat) < 1e-12


def test_morphism_derivation_dual_path(rng):
    # applying the derivation to (morphism @ section) two ways agrees
    spec, frame, tr = setup_transport(rng, 3)
    gamma = TransportCoefficients.from_transport(tr, h=2e-4)
    obs = ObservableSpec.constant(random_hermitian(rng, 3))
    morphism = MorphismAlongPath.lifted(frame, obs)
    psi0 = random_state(rng, 3)
    section = StateSection.transported(tr, np.linalg.solve(frame(0.0), psi0))
    h = 2e-4
    for t in (0.5, 1.0, 1.5):
        applied = lambda u: morphism(u) @ section(u)
        product_route = (applied(t + h) - applied(t - h)) / (2 * h) + gamma(t) @ applied(t)
        derivation_route = morphism_derivation(gamma, morphism, t, h) @ section(t)
        assert max_norm(product_route - derivation_route) < 1e-6


def test_morphism_derivation_rejects_bad_step(rng):
    frame = random_frame(rng, 2)
    obs = ObservableSpec.constant(random_hermitian(rng, 2))
    morphism = MorphismAlongPath.lifted(frame, obs)
    gamma = TransportCoefficients(dim=2, Gamma=lambda t: np.zeros((2, 2)))
    with pytest.raises(ValueError):
        morphism_derivation(gamma, morphism, 0.5, 0.0)
