"""Frame fields, fibre metrics, flat transports, and component
transformation laws.

A frame field ``L(t)`` maps fibre coordinates at time ``t`` to coordinates
in the typical fibre.  All transformation laws carry the transpose of the
basis-change matrix: for a basis change with matrix ``Omega``, vector
components pick up ``(Omega^T)^{-1}`` and operator components are
conjugated by ``Omega^T``.  Any data exchanged with other tools must keep
this transpose convention in mind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .linalg import (
    DimensionMismatchError,
    adjoint,
    as_matrix,
    as_vector,
    inverse,
    is_hermitian,
    mat_exp,
    max_norm,
    solve,
)

__all__ = [
    "FrameField",
    "BasisDrift",
    "GaugeTransform",
    "FibreMetric",
    "fibre_metric",
    "transform_vector",
    "transform_operator",
    "transform_two_point",
    "flat_transport",
    "frame_logarithmic_derivative",
]

# Default finite-difference step for frame derivatives, as a fraction of
# the scenario window.
DEFAULT_FD_FRACTION = 1e-5


def _central_difference(f: Callable[[float], np.ndarray], t: float, h: float):
    return (f(t + h) - f(t - h)) / (2.0 * h)


@dataclass(frozen=True)
class FrameField:
    """Time-indexed invertible matrix ``L(t)`` with derivative access.

    ``dL_dt`` is exact when the frame is specified analytically; otherwise
    a central finite difference with step ``fd_step`` is used.
    """

    dim: int
    L: Callable[[float], np.ndarray]
    dL_dt: Callable[[float], np.ndarray] | None = None
    fd_step: float = DEFAULT_FD_FRACTION

    def __call__(self, t: float) -> np.ndarray:
        m = as_matrix(self.L(t), square=True)
        if m.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"frame returned shape {m.shape}, expected ({self.dim}, {self.dim})"
            )
        return m

    def derivative(self, t: float) -> np.ndarray:
        if self.dL_dt is not None:
            return as_matrix(self.dL_dt(t), square=True)
        return _central_difference(self.L, t, self.fd_step)

    @classmethod
    def identity(cls, dim: int) -> "FrameField":
        eye = np.eye(dim, dtype=complex)
        zero = np.zeros((dim, dim), dtype=complex)
        return cls(dim=dim, L=lambda t: eye, dL_dt=lambda t: zero)

    @classmethod
    def exponential_flow(cls, generator, t_ref: float = 0.0) -> "FrameField":
        """Frame ``L(t) = exp((t - t_ref) K)`` with exact derivative ``K L(t)``."""
        k = as_matrix(generator, square=True)

        def L(t: float) -> np.ndarray:
            return mat_exp((t - t_ref) * k)

        def dL_dt(t: float) -> np.ndarray:
            return k @ mat_exp((t - t_ref) * k)

        return cls(dim=k.shape[0], L=L, dL_dt=dL_dt)

    @classmethod
    def from_terms(cls, matrices, coefficients, derivatives) -> "FrameField":
        """Frame ``L(t) = sum_k c_k(t) M_k`` with analytic coefficient
        derivatives ``c_k'(t)``."""
        mats = [as_matrix(m, square=True) for m in matrices]
        if not mats:
            raise ValueError("at least one term is required")
        dim = mats[0].shape[0]

        def L(t: float) -> np.ndarray:
            return sum(c(t) * m for c, m in zip(coefficients, mats))

        def dL_dt(t: float) -> np.ndarray:
            return sum(d(t) * m for d, m in zip(derivatives, mats))

        return cls(dim=dim, L=L, dL_dt=dL_dt)

    @classmethod
    def tabulated(cls, times, matrices) -> "FrameField":
        """Frame interpolated from tabulated samples by a cubic spline."""
        times = np.asarray(times, dtype=float)
        data = np.stack([as_matrix(m, square=True) for m in matrices])
        spline = CubicSpline(times, data, axis=0)
        deriv = spline.derivative()
        dim = data.shape[1]
        return cls(dim=dim, L=lambda t: spline(t), dL_dt=lambda t: deriv(t))


@dataclass(frozen=True)
class BasisDrift:
    """Expansion matrix ``E(t)`` of the typical-fibre basis drift.

    The default (a drift-free basis) is identically zero.
    """

    dim: int
    E: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return as_matrix(self.E(t), square=True)

    @classmethod
    def zero(cls, dim: int) -> "BasisDrift":
        z = np.zeros((dim, dim), dtype=complex)
        return cls(dim=dim, E=lambda t: z)

    @property
    def is_zero(self) -> bool:
        # cheap structural probe used by Hermiticity shortcuts
        return bool(np.all(self.E(0.0) == 0))


@dataclass(frozen=True)
class GaugeTransform:
    """Invertible basis change ``Omega(t)`` along the path, with derivative."""

    dim: int
    Omega: Callable[[float], np.ndarray]
    dOmega_dt: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return as_matrix(self.Omega(t), square=True)

    def derivative(self, t: float) -> np.ndarray:
        return as_matrix(self.dOmega_dt(t), square=True)

    @classmethod
    def identity(cls, dim: int) -> "GaugeTransform":
        eye = np.eye(dim, dtype=complex)
        zero = np.zeros((dim, dim), dtype=complex)
        return cls(dim=dim, Omega=lambda t: eye, dOmega_dt=lambda t: zero)

    @classmethod
    def exponential_flow(cls, generator, t_ref: float = 0.0) -> "GaugeTransform":
        m = as_matrix(generator, square=True)
        return cls(
            dim=m.shape[0],
            Omega=lambda t: mat_exp((t - t_ref) * m),
            dOmega_dt=lambda t: m @ mat_exp((t - t_ref) * m),
        )


@dataclass(frozen=True)
class FibreMetric:
    """Hermitian positive-definite matrix ``G(t) = L(t)^dag L(t)``
    representing the fibre scalar product in components."""

    frame: FrameField = field(repr=False)

    def __call__(self, t: float) -> np.ndarray:
        return fibre_metric(self.frame, t)


def fibre_metric(frame: FrameField, t: float) -> np.ndarray:
    """Metric ``G(t) = L(t)^dag L(t)`` of the fibre scalar product."""
    L = frame(t)
    g = adjoint(L) @ L
    # symmetrize away roundoff so downstream Hermiticity checks are exact
    return 0.5 * (g + adjoint(g))


def transform_vector(omega_t, v) -> np.ndarray:
    """Component transform of a vector: ``(Omega^T)^{-1} v``."""
    omega_t = as_matrix(omega_t, square=True)
    return solve(omega_t.T, as_vector(v))


def transform_operator(omega_t, a) -> np.ndarray:
    """Component transform of an operator: ``(Omega^T)^{-1} A Omega^T``."""
    omega_t = as_matrix(omega_t, square=True)
    a = as_matrix(a, square=True)
    if a.shape != omega_t.shape:
        raise DimensionMismatchError(
            f"operator shape {a.shape} does not match transform {omega_t.shape}"
        )
    return solve(omega_t.T, a @ omega_t.T)


def transform_two_point(omega_t, omega_s, u_ts) -> np.ndarray:
    """Two-point transform ``(Omega^T(t))^{-1} U(t, s) Omega^T(s)``."""
    omega_t = as_matrix(omega_t, square=True)
    omega_s = as_matrix(omega_s, square=True)
    u_ts = as_matrix(u_ts, square=True)
    return solve(omega_t.T, u_ts @ omega_s.T)


def flat_transport(frame: FrameField, s: float, t: float) -> np.ndarray:
    """Flat transport ``L(t)^{-1} L(s)`` induced by the trivialization."""
    return solve(frame(t), frame(s))


def frame_logarithmic_derivative(frame: FrameField, t: float) -> np.ndarray:
    """Logarithmic derivative ``g(t) = -L(t)^{-1} dL/dt``."""
    return -solve(frame(t), frame.derivative(t))
