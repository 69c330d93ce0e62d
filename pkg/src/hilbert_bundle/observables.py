"""Bundle description of observables.

An observable acting on the typical fibre is lifted to a fibre-wise
morphism by frame conjugation ``L^{-1} A L``; expectation values taken
with the fibre metric agree with the Hilbert-space ones, and Hermiticity
turns into being a fixed point of the metric adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .frames import FrameField, fibre_metric, flat_transport, frame_logarithmic_derivative
from .linalg import (
    DimensionMismatchError,
    adjoint,
    as_matrix,
    as_vector,
    commutator,
    is_hermitian,
    solve,
)
from .transport import TransportCoefficients

__all__ = [
    "ObservableSpec",
    "MorphismAlongPath",
    "lift_observable",
    "expectation_hilbert",
    "expectation_bundle",
    "metric_adjoint",
    "morphism_time_derivative",
    "bundle_hamiltonian_morphism",
    "lift_function",
    "lift_commutator",
    "two_time_morphism",
    "morphism_derivation",
]

MAX_POLYNOMIAL_DEGREE = 8


@dataclass(frozen=True)
class ObservableSpec:
    """Hermitian operator family ``A(t)`` on the typical fibre.

    ``dA_dt`` is optional and used for analytic morphism derivatives.
    """

    dim: int
    A: Callable[[float], np.ndarray]
    dA_dt: Callable[[float], np.ndarray] | None = None

    def __call__(self, t: float) -> np.ndarray:
        a = as_matrix(self.A(t), square=True)
        if a.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"observable returned shape {a.shape}, expected dim {self.dim}"
            )
        if not is_hermitian(a, rtol=1e-12):
            raise ValueError(f"observable is not Hermitian at t={t}")
        return a

    @classmethod
    def constant(cls, matrix) -> "ObservableSpec":
        m = as_matrix(matrix, square=True)
        zero = np.zeros_like(m)
        return cls(dim=m.shape[0], A=lambda t: m, dA_dt=lambda t: zero)


@dataclass(frozen=True)
class MorphismAlongPath:
    """Time-indexed matrix acting fibre-wise (an observable in the bundle
    picture, or any fibre morphism)."""

    dim: int
    A: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return as_matrix(self.A(t), square=True)

    @classmethod
    def lifted(cls, frame: FrameField, obs: ObservableSpec) -> "MorphismAlongPath":
        return cls(dim=obs.dim, A=lambda t: lift_observable(frame, obs, t))


def lift_observable(frame: FrameField, obs: ObservableSpec, t: float) -> np.ndarray:
    """Fibre components ``L(t)^{-1} A(t) L(t)`` of the lifted observable."""
    L = frame(t)
    return solve(L, obs(t) @ L)


def expectation_hilbert(obs: ObservableSpec, psi, t: float) -> float:
    """Mean value ``<psi|A psi> / <psi|psi>`` in the typical fibre."""
    psi = as_vector(psi)
    norm2 = float(np.real(np.vdot(psi, psi)))
    if norm2 == 0.0:
        raise ValueError("zero state has no expectation value")
    return float(np.real(np.vdot(psi, obs(t) @ psi))) / norm2


def expectation_bundle(morphism_matrix, psi_fibre, metric) -> float:
    """Mean value with the fibre scalar product:
    ``(Psi^dag G Am Psi) / (Psi^dag G Psi)``."""
    am = as_matrix(morphism_matrix, square=True)
    psi = as_vector(psi_fibre)
    g = as_matrix(metric, square=True)
    if not is_hermitian(g, rtol=1e-10):
        raise ValueError("fibre metric must be Hermitian")
    if np.min(np.linalg.eigvalsh(g)) <= 0:
        raise ValueError("fibre metric must be positive-definite")
    norm2 = float(np.real(np.vdot(psi, g @ psi)))
    if norm2 == 0.0:
        raise ValueError("zero state has no expectation value")
    return float(np.real(np.vdot(psi, g @ (am @ psi)))) / norm2


def metric_adjoint(morphism_matrix, metric) -> np.ndarray:
    """Adjoint with respect to the fibre scalar product:
    ``G^{-1} Am^dag G``.  Hermitian lifts are its fixed points."""
    am = as_matrix(morphism_matrix, square=True)
    g = as_matrix(metric, square=True)
    return solve(g, adjoint(am) @ g)


def morphism_time_derivative(frame: FrameField, obs: ObservableSpec, t: float,
                             h: float = 1e-5) -> np.ndarray:
    """Time derivative of the lifted observable:
    ``[g(t), Am(t)] + L^{-1} (dA/dt) L`` with the frame logarithmic
    derivative ``g``.  ``dA/dt`` falls back to central differences with
    step ``h`` when the observable has no analytic derivative."""
    g = frame_logarithmic_derivative(frame, t)
    am = lift_observable(frame, obs, t)
    if obs.dA_dt is not None:
        da = as_matrix(obs.dA_dt(t), square=True)
    else:
        da = (obs(t + h) - obs(t - h)) / (2.0 * h)
    L = frame(t)
    return commutator(g, am) + solve(L, da @ L)


def bundle_hamiltonian_morphism(frame: FrameField, spec, t: float) -> np.ndarray:
    """Lift of the Hamiltonian itself: ``L(t)^{-1} H(t) L(t)``."""
    L = frame(t)
    return solve(L, spec(t) @ L)


def _evaluate_polynomial(coefficients: Sequence[float | complex],
                         matrices: Sequence[np.ndarray],
                         dim: int) -> np.ndarray:
    """Evaluate sum over monomials: coefficients maps monomial index tuples
    (indices into ``matrices``, composition order left to right) to scalars."""
    result = np.zeros((dim, dim), dtype=complex)
    for monomial, coeff in coefficients:
        term = np.eye(dim, dtype=complex)
        for idx in monomial:
            term = term @ matrices[idx]
        result = result + coeff * term
    return result


def lift_function(frame: FrameField, polynomial, observables: Sequence[ObservableSpec],
                  t: float) -> np.ndarray:
    """Lift of a polynomial in several observables.

    ``polynomial`` is a list of ``(monomial, coefficient)`` pairs where the
    monomial is a tuple of observable indices composed left to right.  The
    lift commutes with evaluation: this equals the same polynomial in the
    individually lifted morphisms.
    """
    for monomial, _ in polynomial:
        if len(monomial) > MAX_POLYNOMIAL_DEGREE:
            raise ValueError(
                f"monomial degree {len(monomial)} exceeds bound {MAX_POLYNOMIAL_DEGREE}"
            )
    dim = frame.dim
    hilbert_side = _evaluate_polynomial(polynomial, [obs(t) for obs in observables], dim)
    L = frame(t)
    return solve(L, hilbert_side @ L)


def lift_commutator(frame: FrameField, a: ObservableSpec, b: ObservableSpec,
                    t: float) -> np.ndarray:
    """Lift of a commutator: ``L^{-1} [A(t), B(t)] L``, equal to the
    commutator of the individual lifts."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"observable dims differ: {a.dim} vs {b.dim}")
    L = frame(t)
    return solve(L, commutator(a(t), b(t)) @ L)


def two_time_morphism(frame: FrameField, obs: ObservableSpec, s: float,
                      r: float) -> np.ndarray:
    """Observable sampled at time ``s``, expressed in the fibre at ``r``:
    ``L(r)^{-1} A(s) L(r)``, equivalently the flat-transport conjugation of
    the lift at ``s``."""
    L = frame(r)
    return solve(L, obs(s) @ L)


def two_time_morphism_flat(frame: FrameField, obs: ObservableSpec, s: float,
                           r: float) -> np.ndarray:
    """Flat-transport form of :func:`two_time_morphism`:
    ``flat(s -> r) Am(s) flat(r -> s)``; agrees with the direct form."""
    fwd = flat_transport(frame, s, r)
    back = flat_transport(frame, r, s)
    return fwd @ lift_observable(frame, obs, s) @ back


def morphism_derivation(gamma: TransportCoefficients, morphism: MorphismAlongPath,
                        t: float, h: float) -> np.ndarray:
    """Derivation of a fibre morphism along the path:
    ``dC/dt + [Gamma(t), C(t)]`` with a central-difference derivative."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    dc = (morphism(t + h) - morphism(t - h)) / (2.0 * h)
    return dc + commutator(gamma(t), morphism(t))
