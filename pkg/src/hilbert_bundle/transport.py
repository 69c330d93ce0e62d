"""Bundle-side dynamics: the evolution transport, its coefficients, the
derivation along the time path, gauge laws, and the Heisenberg gauge.

The transport carries fibre components: ``Ut(t, s) = L(t)^{-1} U(t, s) L(s)``.
Its coefficients ``Gamma(t)`` (the connection-like object of the theory)
satisfy the central identity ``Gamma(t) = -Hb(t) / (i hbar)`` with the
bundle generator ``Hb``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .evolution import HamiltonianSpec, Propagator, matrix_hamiltonian
from .frames import BasisDrift, FrameField, GaugeTransform
from .linalg import as_matrix, as_vector, commutator, max_norm, solve

__all__ = [
    "BundleTransport",
    "TransportCoefficients",
    "BundleHamiltonianMatrix",
    "StateSection",
    "bundle_transport",
    "matrix_bundle_hamiltonian",
    "transport_coefficients",
    "central_identity_residual",
    "derive_along_path",
    "bundle_schrodinger_residual",
    "gauge_transform_coefficients",
    "gauge_transform_bundle_hamiltonian",
    "heisenberg_gauge",
]

# Default step for coefficient finite differences, as a fraction of the
# integration window.
DEFAULT_COEFF_FD_FRACTION = 1e-4


@dataclass(frozen=True)
class BundleTransport:
    """Evolution transport ``Ut(t, s)`` acting fibre-to-fibre."""

    frame: FrameField
    propagator: Propagator

    def __post_init__(self):
        if self.frame.dim != self.propagator.dim:
            raise ValueError(
                f"frame dim {self.frame.dim} does not match propagator dim "
                f"{self.propagator.dim}"
            )

    @property
    def hbar(self) -> float:
        return self.propagator.hbar

    @property
    def t0(self) -> float:
        return self.propagator.t0

    @property
    def t1(self) -> float:
        return self.propagator.t1

    @property
    def default_fd_step(self) -> float:
        return DEFAULT_COEFF_FD_FRACTION * (self.t1 - self.t0)

    def U(self, t: float, s: float) -> np.ndarray:
        return solve(self.frame(t), self.propagator.U(t, s) @ self.frame(s))


@dataclass(frozen=True)
class TransportCoefficients:
    """Time-indexed coefficient matrix ``Gamma(t)`` of a transport."""

    dim: int
    Gamma: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return as_matrix(self.Gamma(t), square=True)

    @classmethod
    def from_transport(cls, transport: "BundleTransport", h: float | None = None):
        if h is None:
            h = transport.default_fd_step
        return cls(
            dim=transport.frame.dim,
            Gamma=lambda t: transport_coefficients(transport, t, h),
        )


@dataclass(frozen=True)
class BundleHamiltonianMatrix:
    """Generator ``Hb(t)`` of the bundle Schroedinger equation in components."""

    dim: int
    Hb: Callable[[float], np.ndarray]
    hbar: float = 1.0

    def __call__(self, t: float) -> np.ndarray:
        return as_matrix(self.Hb(t), square=True)


@dataclass(frozen=True)
class StateSection:
    """Time-indexed fibre component vector of a state."""

    dim: int
    Psi: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return as_vector(self.Psi(t))

    @classmethod
    def transported(cls, transport: "BundleTransport", psi0) -> "StateSection":
        psi0 = as_vector(psi0)
        t0 = transport.t0
        return cls(dim=psi0.size, Psi=lambda t: transport.U(t, t0) @ psi0)


def bundle_transport(frame: FrameField, propagator: Propagator) -> BundleTransport:
    """Conjugate the Hilbert-space propagator into the fibre frame."""
    return BundleTransport(frame=frame, propagator=propagator)


def matrix_bundle_hamiltonian(frame: FrameField, spec: HamiltonianSpec,
                              drift: BasisDrift | None = None) -> BundleHamiltonianMatrix:
    """Bundle generator
    ``Hb(t) = L^{-1} H L - i hbar L^{-1} (dL/dt + E L)``."""
    if drift is None:
        drift = BasisDrift.zero(spec.dim)
    hbar = spec.hbar

    def Hb(t: float) -> np.ndarray:
        L = frame(t)
        return solve(L, spec(t) @ L - 1j * hbar * (frame.derivative(t) + drift(t) @ L))

    return BundleHamiltonianMatrix(dim=spec.dim, Hb=Hb, hbar=hbar)


def _second_slot_derivative(transport: BundleTransport, t: float, h: float) -> np.ndarray:
    """d/ds Ut(t, s) at s = t by central differences, one-sided (still
    second order, flagged by a warning) at the window boundary."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    lo, hi = transport.t0, transport.t1
    if t - h >= lo and t + h <= hi:
        return (transport.U(t, t + h) - transport.U(t, t - h)) / (2.0 * h)
    warnings.warn(
        f"t={t} is within h of the window boundary; using a one-sided difference",
        stacklevel=3,
    )
    eye = np.eye(transport.frame.dim, dtype=complex)
    if t + 2.0 * h <= hi:
        return (-3.0 * eye + 4.0 * transport.U(t, t + h) - transport.U(t, t + 2.0 * h)) / (2.0 * h)
    return (3.0 * eye - 4.0 * transport.U(t, t - h) + transport.U(t, t - 2.0 * h)) / (2.0 * h)


def transport_coefficients(transport: BundleTransport, t: float,
                           h: float | None = None) -> np.ndarray:
    """Coefficient matrix ``Gamma(t)``: the second-slot derivative of the
    transport at coincident arguments."""
    if h is None:
        h = transport.default_fd_step
    return _second_slot_derivative(transport, t, h)


def central_identity_residual(frame: FrameField, spec: HamiltonianSpec,
                              drift: BasisDrift | None,
                              transport: BundleTransport, t: float,
                              h: float | None = None) -> float:
    """Max-norm of ``Gamma(t) + Hb(t) / (i hbar)``, which vanishes exactly
    for the true transport."""
    gamma = transport_coefficients(transport, t, h)
    hb = matrix_bundle_hamiltonian(frame, spec, drift)
    return max_norm(gamma + hb(t) / (1j * spec.hbar))


def derive_along_path(gamma: TransportCoefficients, chi: StateSection, t: float,
                      h: float) -> np.ndarray:
    """Derivation along the path: ``D chi = d chi / dt + Gamma(t) chi(t)``
    with the component derivative taken by central differences."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    dchi = (chi(t + h) - chi(t - h)) / (2.0 * h)
    return dchi + gamma(t) @ chi(t)


def bundle_schrodinger_residual(transport: BundleTransport,
                                gamma: TransportCoefficients | None = None,
                                grid=None) -> float:
    """Max over interior grid times of
    ``|| d/dt Ut(t, t0) + Gamma(t) Ut(t, t0) ||_max``.

    On a uniform grid with at least five nodes the time derivative uses a
    five-point fourth-order stencil, so the residual shrinks at fourth
    order as the grid is refined; otherwise central differences (second
    order) are used.
    """
    if gamma is None:
        gamma = TransportCoefficients.from_transport(transport)
    if grid is None:
        grid = transport.propagator.times
    grid = np.asarray(grid, dtype=float)
    t0 = transport.t0
    spacings = np.diff(grid)
    uniform = grid.size >= 5 and np.allclose(spacings, spacings[0], rtol=1e-9)
    worst = 0.0
    if uniform:
        h = spacings[0]
        u = [transport.U(t, t0) for t in grid]
        for k in range(2, grid.size - 2):
            du = (-u[k + 2] + 8.0 * u[k + 1] - 8.0 * u[k - 1] + u[k - 2]) / (12.0 * h)
            worst = max(worst, max_norm(du + gamma(grid[k]) @ u[k]))
        return worst
    for k in range(1, grid.size - 1):
        t_prev, t, t_next = grid[k - 1], grid[k], grid[k + 1]
        du = (transport.U(t_next, t0) - transport.U(t_prev, t0)) / (t_next - t_prev)
        worst = max(worst, max_norm(du + gamma(t) @ transport.U(t, t0)))
    return worst


def gauge_transform_coefficients(gauge: GaugeTransform,
                                 gamma: TransportCoefficients,
                                 t: float) -> np.ndarray:
    """Coefficients in the transformed frame:
    ``(Om^T)^{-1} Gamma Om^T + (Om^T)^{-1} d(Om^T)/dt``."""
    om_t = gauge(t).T
    dom_t = gauge.derivative(t).T
    return solve(om_t, gamma(t) @ om_t + dom_t)


def gauge_transform_bundle_hamiltonian(gauge: GaugeTransform,
                                       hb: BundleHamiltonianMatrix,
                                       t: float) -> np.ndarray:
    """Bundle generator in the transformed frame:
    ``(Om^T)^{-1} Hb Om^T - i hbar (Om^T)^{-1} d(Om^T)/dt``."""
    om_t = gauge(t).T
    dom_t = gauge.derivative(t).T
    return solve(om_t, hb(t) @ om_t - 1j * hb.hbar * dom_t)


def heisenberg_gauge(transport: BundleTransport, t0: float | None = None,
                     h: float | None = None) -> GaugeTransform:
    """Gauge with ``Om^T(t) = Ut(t, t0)``, in which the transformed bundle
    generator vanishes on the grid while operator spectra are untouched.

    The derivative is taken from the transport equation
    ``d(Om^T)/dt = -Gamma(t) Om^T(t)`` instead of numerical differencing,
    so no extra finite-difference error is compounded.
    """
    if t0 is None:
        t0 = transport.t0
    if h is None:
        h = transport.default_fd_step
    dim = transport.frame.dim

    def omega(t: float) -> np.ndarray:
        return transport.U(t, t0).T

    def d_omega(t: float) -> np.ndarray:
        gamma_t = transport_coefficients(transport, t, h)
        return (-gamma_t @ transport.U(t, t0)).T

    return GaugeTransform(dim=dim, Omega=omega, dOmega_dt=d_omega)
