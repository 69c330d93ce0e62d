"""Bundle transport, coefficients, derivations, and gauge laws."""

import numpy as np
import pytest

from hilbert_bundle.evolution import HamiltonianSpec, matrix_hamiltonian, propagate
from hilbert_bundle.frames import (
    BasisDrift,
    FrameField,
    GaugeTransform,
    fibre_metric,
)
from hilbert_bundle.linalg import SIGMA_X, SIGMA_Z, adjoint, max_norm
from hilbert_bundle.transport import (
    StateSection,
    TransportCoefficients,
    bundle_schrodinger_residual,
    bundle_transport,
    central_identity_residual,
    derive_along_path,
    gauge_transform_bundle_hamiltonian,
    gauge_transform_coefficients,
    heisenberg_gauge,
    matrix_bundle_hamiltonian,
    transport_coefficients,
)

from conftest import random_general, random_hermitian

T1 = 2.0
STEPS = 300


def driven_spec(rng, dim):
    h0 = random_hermitian(rng, dim)
    h1 = random_hermitian(rng, dim, 0.5)
    omega = float(rng.uniform(0.5, 2.0))
    return HamiltonianSpec(dim=dim, H=lambda t: h0 + np.cos(omega * t) * h1)


def setup_transport(rng, dim, frame_scale=0.4, drift=None):
    spec = driven_spec(rng, dim)
    frame = FrameField.exponential_flow(random_general(rng, dim, frame_scale))
    P = propagate(matrix_hamiltonian(spec, drift), 0.0, T1, STEPS, kernel="gauss4")
    return spec, frame, bundle_transport(frame, P)


def test_identity_frame_transport_is_propagator(rng):
    spec = driven_spec(rng, 2)
    P = propagate(matrix_hamiltonian(spec), 0.0, T1, STEPS)
    tr = bundle_transport(FrameField.identity(2), P)
    t, s = 1.3, 0.4
    assert max_norm(tr.U(t, s) - P.U(t, s)) < 1e-13


def test_transport_composition(rng):
    _, _, tr = setup_transport(rng, 3)
    r, s, t = 0.2, 0.9, 1.7
    assert max_norm(tr.U(t, s) @ tr.U(s, r) - tr.U(t, r)) < 1e-11


def test_transport_metric_unitarity(rng):
    _, frame, tr = setup_transport(rng, 3)
    for (t, s) in ((0.5, 0.0), (1.5, 0.5), (2.0, 1.0)):
        u = tr.U(t, s)
        defect = adjoint(u) @ fibre_metric(frame, t) @ u - fibre_metric(frame, s)
        assert max_norm(defect) < 1e-10


def test_central_identity(rng):
    spec, frame, tr = setup_transport(rng, 3)
    for t in (0.4, 1.0, 1.6):
        assert central_identity_residual(frame, spec, None, tr, t, h=2e-4) < 1e-6


def test_central_identity_second_order_in_fd_step(rng):
    spec, frame, tr = setup_transport(rng, 2)
    t = 1.0
    res = [central_identity_residual(frame, spec, None, tr, t, h=h)
           for h in (4e-3, 2e-3, 1e-3)]
    assert res[0] / res[1] > 3.5
    assert res[1] / res[2] > 3.5


def test_central_identity_with_basis_drift(rng):
    dim = 2
    e = random_general(rng, dim, 0.2)
    drift = BasisDrift(dim=dim, E=lambda t: np.sin(t) * e)
    spec = driven_spec(rng, dim)
    frame = FrameField.exponential_flow(random_general(rng, dim, 0.4))
    P = propagate(matrix_hamiltonian(spec, drift), 0.0, T1, STEPS, kernel="gauss4")
    tr = bundle_transport(frame, P)
    for t in (0.5, 1.5):
        assert central_identity_residual(frame, spec, drift, tr, t, h=2e-4) < 1e-6


def test_bundle_hamiltonian_identity_frame():
    # identity frame, no drift: the generator is unchanged
    spec = HamiltonianSpec.constant(SIGMA_Z + 0.2 * SIGMA_X)
    hb = matrix_bundle_hamiltonian(FrameField.identity(2), spec)
    assert max_norm(hb(0.7) - spec(0.7)) < 1e-14


def test_transported_section_in_derivation_kernel(rng):
    _, _, tr = setup_transport(rng, 3)
    gamma = TransportCoefficients.from_transport(tr, h=2e-4)
    psi0 = np.array([1.0, 0.5j, -0.25], dtype=complex)
    section = StateSection.transported(tr, psi0)
    for t in (0.5, 1.0, 1.5):
        assert max_norm(derive_along_path(gamma, section, t, 1e-4)) < 1e-6


def test_bundle_schrodinger_residual_converges(rng):
    spec = driven_spec(rng, 2)
    frame = FrameField.exponential_flow(random_general(rng, 2, 0.4))
    res = []
    for steps in (50, 100):
        P = propagate(matrix_hamiltonian(spec), 0.0, T1, steps, kernel="gauss4")
        res.append(bundle_schrodinger_residual(bundle_transport(frame, P)))
    assert res[0] < 1e-4
    assert res[0] / res[1] > 3.5


def test_boundary_coefficients_warn(rng):
    _, _, tr = setup_transport(rng, 2)
    with pytest.warns(UserWarning):
        transport_coefficients(tr, 0.0, 1e-3)


def test_gauge_transformed_coefficients_match_rebuild(rng):
    spec, frame, tr = setup_transport(rng, 3)
    gauge = GaugeTransform.exponential_flow(random_general(rng, 3, 0.3))
    gamma = TransportCoefficients.from_transport(tr, h=2e-4)
    frame2 = FrameField(
        dim=3,
        L=lambda t: frame(t) @ gauge(t).T,
        dL_dt=lambda t: frame.derivative(t) @ gauge(t).T + frame(t) @ gauge.derivative(t).T,
    )
    tr2 = bundle_transport(frame2, tr.propagator)
    for t in (0.5, 1.0, 1.5):
        rebuilt = transport_coefficients(tr2, t, 2e-4)
        formula = gauge_transform_coefficients(gauge, gamma, t)
        assert max_norm(rebuilt - formula) < 1e-6


def test_gauge_transformed_bundle_hamiltonian_match_rebuild(rng):
    spec, frame, tr = setup_transport(rng, 3)
    gauge = GaugeTransform.exponential_flow(random_general(rng, 3, 0.3))
    hb = matrix_bundle_hamiltonian(frame, spec)
    frame2 = FrameField(
        dim=3,
        L=lambda t: frame(t) @ gauge(t).T,
        dL_dt=lambda t: frame.derivative(t) @ gauge(t).T + frame(t) @ gauge.derivative(t).T,
    )
    hb2 = matrix_bundle_hamiltonian(frame2, spec)
    for t in (0.5, 1.0, 1.5):
        assert max_norm(hb2(t) - gauge_transform_bundle_hamiltonian(gauge, hb, t)) < 1e-11


def test_heisenberg_gauge_kills_bundle_hamiltonian(rng):
    spec, frame, tr = setup_transport(rng, 3)
    om = heisenberg_gauge(tr, h=2e-4)
    hb = matrix_bundle_hamiltonian(frame, spec)
    for t in (0.4, 1.0, 1.6):
        assert max_norm(gauge_transform_bundle_hamiltonian(om, hb, t)) < 1e-5


def test_heisenberg_gauge_sections_constant(rng):
    # transformed section components are constant in the new frame
    _, _, tr = setup_transport(rng, 2)
    om = heisenberg_gauge(tr)
    psi0 = np.array([0.6, 0.8j], dtype=complex)
    section = StateSection.transported(tr, psi0)
    for t in (0.5, 1.0, 1.9):
        moved = np.linalg.solve(om(t).T, section(t))
        assert max_norm(moved - psi0) < 1e-11


def test_dim_mismatch_raises(rng):
    spec = driven_spec(rng, 2)
    P = propagate(matrix_hamiltonian(spec), 0.0, T1, 10)
    with pytest.raises(ValueError):
        bundle_transport(FrameField.identity(3), P)
