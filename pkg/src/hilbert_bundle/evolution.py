"""Hilbert-space-side dynamics.

The propagator is built as a time-ordered product of one-step exponential
factors on a uniform grid (later times act on the left).  Two kernels are
available:

* ``midpoint``  -- exp(dt/(i hbar) * Hm(t_mid)), globally second order;
* ``gauss4``    -- two-point Gauss quadrature with the leading commutator
  correction, globally fourth order.

Both kernels map Hermitian generators to exactly unitary factors (up to
the matrix-exponential roundoff), so unitarity is preserved by
construction rather than by accuracy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import (
    DimensionMismatchError,
    NonFiniteError,
    as_matrix,
    as_vector,
    is_hermitian,
    mat_exp,
    solve,
)
from .frames import BasisDrift

__all__ = [
    "HamiltonianSpec",
    "MatrixHamiltonian",
    "Propagator",
    "matrix_hamiltonian",
    "propagate",
    "solve_schrodinger",
    "hamiltonian_from_propagator",
]

KERNELS = ("midpoint", "gauss4")

# Default finite-difference step for recovering the generator from a
# propagator, as a fraction of the integration window.
DEFAULT_GENERATOR_FD_FRACTION = 1e-4

_GAUSS_OFFSET = np.sqrt(3.0) / 6.0  # nodes at 1/2 -+ sqrt(3)/6


@dataclass(frozen=True)
class HamiltonianSpec:
    """Hermitian operator family ``H(t)`` with the action constant ``hbar``.

    Hermiticity is validated on every query (1e-12 relative, max-norm).
    """

    dim: int
    H: Callable[[float], np.ndarray]
    hbar: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    def __call__(self, t: float) -> np.ndarray:
        h = as_matrix(self.H(t), square=True)
        if h.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"Hamiltonian returned shape {h.shape}, expected dim {self.dim}"
            )
        if not is_hermitian(h, rtol=1e-12):
            raise ValueError(f"Hamiltonian is not Hermitian at t={t}")
        return h

    @classmethod
    def constant(cls, matrix, hbar: float = 1.0) -> "HamiltonianSpec":
        m = as_matrix(matrix, square=True)
        return cls(dim=m.shape[0], H=lambda t: m, hbar=hbar)


@dataclass(frozen=True)
class MatrixHamiltonian:
    """Generator ``Hm(t)`` of the component Schroedinger equation.

    Hermitian whenever the basis drift vanishes; with a drifting basis no
    Hermiticity is guaranteed.
    """

    dim: int
    Hm: Callable[[float], np.ndarray]
    hbar: float = 1.0

    def __call__(self, t: float) -> np.ndarray:
        m = as_matrix(self.Hm(t), square=True)
        if m.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"generator returned shape {m.shape}, expected dim {self.dim}"
            )
        return m


def matrix_hamiltonian(spec: HamiltonianSpec, drift: BasisDrift | None = None) -> MatrixHamiltonian:
    """Component generator ``Hm(t) = H(t) - i hbar E(t)``."""
    if drift is None:
        drift = BasisDrift.zero(spec.dim)
    if drift.dim != spec.dim:
        raise DimensionMismatchError(
            f"basis drift dim {drift.dim} does not match Hamiltonian dim {spec.dim}"
        )
    hbar = spec.hbar

    def Hm(t: float) -> np.ndarray:
        return spec(t) - 1j * hbar * drift(t)

    return MatrixHamiltonian(dim=spec.dim, Hm=Hm, hbar=hbar)


def _step_factor(Hm: MatrixHamiltonian, s: float, t: float, kernel: str) -> np.ndarray:
    """One-step factor approximating U(t, s) for a short span."""
    dt = t - s
    ih = 1j * Hm.hbar
    if kernel == "midpoint":
        return mat_exp((dt / ih) * Hm(0.5 * (s + t)))
    if kernel == "gauss4":
        a1 = Hm(s + (0.5 - _GAUSS_OFFSET) * dt) / ih
        a2 = Hm(s + (0.5 + _GAUSS_OFFSET) * dt) / ih
        omega = 0.5 * dt * (a1 + a2) + (np.sqrt(3.0) / 12.0) * dt * dt * (a2 @ a1 - a1 @ a2)
        return mat_exp(omega)
    raise ValueError(f"unknown kernel {kernel!r}")


class Propagator:
    """Two-time propagator family ``U(t, s)`` on ``[t0, t1]``.

    Per-step factors are stored on a uniform grid; arbitrary arguments are
    served by composing the stored cumulative products with short
    partial-step factors.  Spans at most one grid cell wide are integrated
    directly with a single fourth-order factor, which keeps short-increment
    finite differences of ``U`` accurate independently of the grid.
    """

    def __init__(self, Hm: MatrixHamiltonian, t0: float, t1: float, steps: int,
                 kernel: str = "midpoint"):
        if steps < 1:
            raise ValueError("steps must be >= 1")
        if not t1 > t0:
            raise ValueError("t1 must exceed t0")
        if kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")
        self.Hm = Hm
        self.hbar = Hm.hbar
        self.dim = Hm.dim
        self.t0 = float(t0)
        self.t1 = float(t1)
        self.steps = int(steps)
        self.kernel = kernel
        self.dt = (self.t1 - self.t0) / self.steps
        self.times = self.t0 + self.dt * np.arange(self.steps + 1)

        cumulative = [np.eye(self.dim, dtype=complex)]
        for k in range(self.steps):
            factor = _step_factor(Hm, self.times[k], self.times[k + 1], kernel)
            if not np.all(np.isfinite(factor)):
                raise NonFiniteError(f"non-finite step factor at t={self.times[k]}")
            cumulative.append(factor @ cumulative[-1])
        # _cumulative[k] = U(times[k], t0)
        self._cumulative = cumulative

    # -- evaluation ------------------------------------------------------

    def _check_window(self, t: float):
        tol = 1e-9 * (self.t1 - self.t0)
        if t < self.t0 - tol or t > self.t1 + tol:
            raise ValueError(f"time {t} outside integration window [{self.t0}, {self.t1}]")

    def _grid_index(self, t: float) -> int | None:
        k = int(round((t - self.t0) / self.dt))
        if 0 <= k <= self.steps and abs(t - self.times[k]) <= 1e-9 * self.dt:
            return k
        return None

    def _from_t0(self, t: float) -> np.ndarray:
        """U(t, t0), anchoring off-grid times at the nearest lower node."""
        k = self._grid_index(t)
        if k is not None:
            return self._cumulative[k]
        k = min(int(np.floor((t - self.t0) / self.dt)), self.steps - 1)
        k = max(k, 0)
        return _step_factor(self.Hm, self.times[k], t, self.kernel) @ self._cumulative[k]

    def _short_span(self, s: float, t: float) -> np.ndarray:
        return _step_factor(self.Hm, s, t, "gauss4")

    def U(self, t: float, s: float) -> np.ndarray:
        """Propagator matrix carrying components from time ``s`` to ``t``."""
        self._check_window(t)
        self._check_window(s)
        if t == s:
            return np.eye(self.dim, dtype=complex)
        ks, kt = self._grid_index(s), self._grid_index(t)
        if abs(t - s) <= self.dt * (1.0 + 1e-9) and (ks is None or kt is None):
            return self._short_span(s, t)
        return self._from_t0(t) @ solve(self._from_t0(s), np.eye(self.dim, dtype=complex))


def propagate(Hm: MatrixHamiltonian, t0: float, t1: float, steps: int,
              kernel: str = "midpoint") -> Propagator:
    """Integrate the time-ordered exponential of ``Hm / (i hbar)``."""
    return Propagator(Hm, t0, t1, steps, kernel=kernel)


def solve_schrodinger(Hm: MatrixHamiltonian, psi0, grid) -> np.ndarray:
    """Trajectory ``psi(t_k) = U(t_k, t0) psi0`` on the given time grid.

    Integration steps coincide with the grid intervals.  Returns an array
    of shape ``(len(grid), dim)``.
    """
    psi0 = as_vector(psi0)
    if np.linalg.norm(psi0) == 0:
        raise ValueError("initial state must be nonzero")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty time grid")
    if grid.size == 1:
        return psi0[None, :].copy()
    trajectory = np.empty((grid.size, Hm.dim), dtype=complex)
    trajectory[0] = psi0
    psi = psi0
    for k in range(grid.size - 1):
        psi = _step_factor(Hm, grid[k], grid[k + 1], "midpoint") @ psi
        trajectory[k + 1] = psi
    return trajectory


def hamiltonian_from_propagator(P: Propagator, t: float, h: float | None = None) -> np.ndarray:
    """Recover the generator from the propagator by finite differences:
    ``i hbar [U(t+h, t0) - U(t-h, t0)] / (2h) @ U(t0, t)``.

    At a window boundary a one-sided difference (still second order) is
    used and a warning is emitted.
    """
    if h is None:
        h = DEFAULT_GENERATOR_FD_FRACTION * (P.t1 - P.t0)
    if t + h > P.t1 or t - h < P.t0:
        warnings.warn(
            f"t={t} is within h of the window boundary; using a one-sided difference",
            stacklevel=2,
        )
        if t + h > P.t1:
            dU = (
                3.0 * P.U(t, P.t0) - 4.0 * P.U(t - h, P.t0) + P.U(t - 2.0 * h, P.t0)
            ) / (2.0 * h)
        else:
            dU = (
                -3.0 * P.U(t, P.t0) + 4.0 * P.U(t + h, P.t0) - P.U(t + 2.0 * h, P.t0)
            ) / (2.0 * h)
    else:
        dU = (P.U(t + h, P.t0) - P.U(t - h, P.t0)) / (2.0 * h)
    return 1j * P.hbar * dU @ P.U(P.t0, t)
