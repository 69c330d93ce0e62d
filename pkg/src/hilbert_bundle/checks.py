"""Named identity checks and the scenario runner.

Every check name maps 1:1 to an identity label (the ``equation`` field of
report entries); the README carries the full table.  Checks return a
scalar residual in the entrywise max-norm, compared against a default
tolerance that scenarios may override.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .evolution import hamiltonian_from_propagator, matrix_hamiltonian, propagate
from .frames import (
    FrameField,
    fibre_metric,
    transform_operator,
    transform_two_point,
    transform_vector,
)
from .linalg import (
    adjoint,
    commutator,
    eigenvalues,
    inverse,
    hermitian_eigenvalues,
    mat_exp,
    max_norm,
    solve,
)
from .observables import (
    MorphismAlongPath,
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
from .report import CheckEntry, Report, TrajectoryRow
from .scenario import RuntimeScenario, ScenarioError, ScenarioModel, build_runtime
from .transport import (
    BundleTransport,
    TransportCoefficients,
    bundle_schrodinger_residual,
    bundle_transport,
    central_identity_residual,
    gauge_transform_bundle_hamiltonian,
    gauge_transform_coefficients,
    heisenberg_gauge,
    matrix_bundle_hamiltonian,
    transport_coefficients,
)

__all__ = ["CHECKS", "DEFAULT_TOLERANCES", "CheckContext", "run_scenario", "applicable_checks"]

N_SAMPLE_TIMES = 5
_PROBE_SEED = 0x5EED


@dataclass
class CheckContext:
    """Lazily built shared state for all checks of one scenario run."""

    runtime: RuntimeScenario

    @property
    def model(self) -> ScenarioModel:
        return self.runtime.model

    @cached_property
    def propagator(self):
        m = self.model
        Hm = matrix_hamiltonian(self.runtime.hamiltonian, self.runtime.drift)
        return propagate(Hm, m.t0, m.t1, m.steps, kernel=m.kernel)

    @cached_property
    def transport(self) -> BundleTransport:
        return bundle_transport(self.runtime.frame, self.propagator)

    @cached_property
    def gamma(self) -> TransportCoefficients:
        return TransportCoefficients.from_transport(self.transport, h=self.runtime.fd_step)

    @cached_property
    def bundle_hamiltonian(self):
        return matrix_bundle_hamiltonian(
            self.runtime.frame, self.runtime.hamiltonian, self.runtime.drift
        )

    @cached_property
    def sample_times(self) -> np.ndarray:
        m = self.model
        window = m.t1 - m.t0
        fractions = (np.arange(N_SAMPLE_TIMES) + 1.0) / (N_SAMPLE_TIMES + 1.0)
        return m.t0 + window * fractions

    @cached_property
    def psi0_fibre(self) -> np.ndarray:
        # scenario initial state is given in typical-fibre components at t0
        L0 = self.runtime.frame(self.model.t0)
        return solve(L0, self.runtime.psi0)

    def state_hilbert(self, t: float) -> np.ndarray:
        return self.propagator.U(t, self.model.t0) @ self.runtime.psi0

    def state_fibre(self, t: float) -> np.ndarray:
        return self.transport.U(t, self.model.t0) @ self.psi0_fibre

    @cached_property
    def probe_rng(self) -> np.random.Generator:
        return np.random.default_rng(_PROBE_SEED)

    def random_matrix(self, scale: float = 1.0) -> np.ndarray:
        n = self.model.dim
        return scale * (
            self.probe_rng.standard_normal((n, n)) + 1j * self.probe_rng.standard_normal((n, n))
        )

    def random_vector(self) -> np.ndarray:
        n = self.model.dim
        return self.probe_rng.standard_normal(n) + 1j * self.probe_rng.standard_normal(n)

    def require_gauge(self, check: str):
        if self.runtime.gauge is None:
            raise ScenarioError(f"check {check!r} requires a gauge spec in the scenario")
        return self.runtime.gauge

    def require_observables(self, check: str):
        if not self.runtime.observables:
            raise ScenarioError(f"check {check!r} requires at least one observable")
        return self.runtime.observables

    @cached_property
    def transformed_frame(self) -> FrameField:
        """Frame with fibre bases changed by the gauge: L'(t) = L(t) Om^T(t)."""
        gauge = self.require_gauge("gauge_coefficients")
        frame = self.runtime.frame

        def L(t: float) -> np.ndarray:
            return frame(t) @ gauge(t).T

        def dL(t: float) -> np.ndarray:
            return frame.derivative(t) @ gauge(t).T + frame(t) @ gauge.derivative(t).T

        return FrameField(dim=frame.dim, L=L, dL_dt=dL)


# --------------------------------------------------------------------------
# individual checks: residual in max-norm


def _check_unitarity(ctx: CheckContext) -> float:
    P = ctx.propagator
    eye = np.eye(P.dim)
    return max(
        max_norm(adjoint(P.U(t, P.t0)) @ P.U(t, P.t0) - eye) for t in P.times
    )


def _check_metric_unitarity(ctx: CheckContext) -> float:
    frame = ctx.runtime.frame
    tr = ctx.transport
    t_mid = 0.5 * (tr.t0 + tr.t1)
    worst = 0.0
    for t in ctx.sample_times:
        for s in (tr.t0, t_mid):
            u = tr.U(t, s)
            worst = max(
                worst,
                max_norm(adjoint(u) @ fibre_metric(frame, t) @ u - fibre_metric(frame, s)),
            )
    return worst


def _check_composition(ctx: CheckContext) -> float:
    P = ctx.propagator
    n = P.steps
    worst = 0.0
    for f0, f1, f2 in ((0.0, 0.3, 0.9), (0.1, 0.5, 1.0), (0.2, 0.6, 0.8)):
        t0, t1, t2 = (P.times[int(round(f * n))] for f in (f0, f1, f2))
        worst = max(worst, max_norm(P.U(t2, t1) @ P.U(t1, t0) - P.U(t2, t0)))
    return worst


def _closed_form_applicable(ctx: CheckContext) -> bool:
    m = ctx.model
    constant_h = all(term.coefficient.kind == "constant" for term in m.hamiltonian)
    return constant_h and m.frame.kind == "identity" and not m.basis_drift


def _check_closed_form(ctx: CheckContext) -> float:
    if not _closed_form_applicable(ctx):
        raise ScenarioError(
            "check 'closed_form' requires a constant Hamiltonian, identity frame, "
            "and no basis drift"
        )
    m = ctx.model
    h0 = ctx.runtime.hamiltonian(m.t0)
    expected = mat_exp(h0 * (m.t1 - m.t0) / (1j * m.hbar))
    return max_norm(ctx.propagator.U(m.t1, m.t0) - expected)


def _check_hamiltonian_recovery(ctx: CheckContext) -> float:
    P = ctx.propagator
    return max(
        max_norm(hamiltonian_from_propagator(P, t) - P.Hm(t)) for t in ctx.sample_times
    )


def _check_transport_identity(ctx: CheckContext) -> float:
    rt = ctx.runtime
    return max(
        central_identity_residual(
            rt.frame, rt.hamiltonian, rt.drift, ctx.transport, t, h=rt.fd_step
        )
        for t in ctx.sample_times
    )


def _check_bundle_schrodinger(ctx: CheckContext) -> float:
    return bundle_schrodinger_residual(ctx.transport, ctx.gamma)


def _check_vector_transform(ctx: CheckContext) -> float:
    gauge = ctx.require_gauge("vector_transform")
    worst = 0.0
    for t in ctx.sample_times:
        om = gauge(t)
        a = ctx.random_matrix()
        v = ctx.random_vector()
        consistency = max_norm(
            transform_operator(om, a) @ transform_vector(om, v)
            - transform_vector(om, a @ v)
        )
        roundtrip = max_norm(transform_vector(inverse(om), transform_vector(om, v)) - v)
        worst = max(worst, consistency, roundtrip)
    return worst


def _check_operator_transform(ctx: CheckContext) -> float:
    gauge = ctx.require_gauge("operator_transform")
    spec = ctx.runtime.hamiltonian
    worst = 0.0
    for t in ctx.sample_times:
        before = eigenvalues(spec(t))
        after = eigenvalues(transform_operator(gauge(t), spec(t)))
        worst = max(worst, float(np.max(np.abs(before - after))))
    return worst


def _check_two_point_transform(ctx: CheckContext) -> float:
    gauge = ctx.require_gauge("two_point_transform")
    P = ctx.propagator
    ts = ctx.sample_times
    t0, t1, t2 = ts[0], ts[2], ts[4]
    u21 = P.U(t2, t1)
    u10 = P.U(t1, t0)
    lhs = transform_two_point(gauge(t2), gauge(t0), u21 @ u10)
    rhs = transform_two_point(gauge(t2), gauge(t1), u21) @ transform_two_point(
        gauge(t1), gauge(t0), u10
    )
    return max_norm(lhs - rhs)


def _check_gauge_coefficients(ctx: CheckContext) -> float:
    gauge = ctx.require_gauge("gauge_coefficients")
    rebuilt = bundle_transport(ctx.transformed_frame, ctx.propagator)
    h = ctx.runtime.fd_step
    return max(
        max_norm(
            transport_coefficients(rebuilt, t, h)
            - gauge_transform_coefficients(gauge, ctx.gamma, t)
        )
        for t in ctx.sample_times
    )


def _check_gauge_hamiltonian(ctx: CheckContext) -> float:
    gauge = ctx.require_gauge("gauge_hamiltonian")
    rt = ctx.runtime
    rebuilt = matrix_bundle_hamiltonian(ctx.transformed_frame, rt.hamiltonian, rt.drift)
    hb = ctx.bundle_hamiltonian
    return max(
        max_norm(rebuilt(t) - gauge_transform_bundle_hamiltonian(gauge, hb, t))
        for t in ctx.sample_times
    )


def _check_gauge_covariance(ctx: CheckContext) -> float:
    """Transform state, coefficients, and generator together; the derivation
    residual must be the same vector expressed in the new frame."""
    gauge = ctx.require_gauge("gauge_covariance")
    m = ctx.model
    h = 1e-5 * (m.t1 - m.t0)
    gamma = ctx.gamma

    def psi(t: float) -> np.ndarray:
        return ctx.state_fibre(t)

    def psi_prime(t: float) -> np.ndarray:
        return solve(gauge(t).T, psi(t))

    worst = 0.0
    for t in ctx.sample_times:
        d_psi = (psi(t + h) - psi(t - h)) / (2 * h) + gamma(t) @ psi(t)
        gamma_prime = gauge_transform_coefficients(gauge, gamma, t)
        d_psi_prime = (psi_prime(t + h) - psi_prime(t - h)) / (2 * h) + gamma_prime @ psi_prime(t)
        mapped_back = gauge(t).T @ d_psi_prime
        scale = 1.0 + float(np.max(np.abs(psi(t))))
        worst = max(worst, max_norm(mapped_back - d_psi) / scale)
    return worst


def _check_heisenberg_gauge(ctx: CheckContext) -> float:
    spec = ctx.runtime.hamiltonian
    spectra_before = [hermitian_eigenvalues(spec(t)) for t in ctx.sample_times]
    om = heisenberg_gauge(ctx.transport, h=ctx.runtime.fd_step)
    hb = ctx.bundle_hamiltonian
    residual = max(
        max_norm(gauge_transform_bundle_hamiltonian(om, hb, t)) for t in ctx.sample_times
    )
    spectra_after = [hermitian_eigenvalues(spec(t)) for t in ctx.sample_times]
    for before, after in zip(spectra_before, spectra_after):
        if not np.array_equal(before, after):
            return float("inf")  # operator spectrum must be untouched
    return residual


def _check_expectation_equality(ctx: CheckContext) -> float:
    observables = ctx.require_observables("expectation_equality")
    frame = ctx.runtime.frame
    worst = 0.0
    for t in ctx.sample_times:
        psi_h = ctx.state_hilbert(t)
        psi_b = ctx.state_fibre(t)
        g = fibre_metric(frame, t)
        for _, obs in observables:
            e_h = expectation_hilbert(obs, psi_h, t)
            e_b = expectation_bundle(lift_observable(frame, obs, t), psi_b, g)
            worst = max(worst, abs(e_h - e_b) / (1.0 + abs(e_h)))
    return worst


def _check_hermiticity(ctx: CheckContext) -> float:
    observables = ctx.require_observables("hermiticity")
    frame = ctx.runtime.frame
    worst = 0.0
    for t in ctx.sample_times:
        g = fibre_metric(frame, t)
        for _, obs in observables:
            am = lift_observable(frame, obs, t)
            worst = max(worst, max_norm(metric_adjoint(am, g) - am) / (1.0 + max_norm(am)))
    return worst


def _check_morphism_derivative(ctx: CheckContext) -> float:
    observables = ctx.require_observables("morphism_derivative")
    frame = ctx.runtime.frame
    h = ctx.runtime.fd_step
    worst = 0.0
    for t in ctx.sample_times:
        for _, obs in observables:
            analytic = morphism_time_derivative(frame, obs, t)
            fd = (lift_observable(frame, obs, t + h) - lift_observable(frame, obs, t - h)) / (2 * h)
            worst = max(worst, max_norm(analytic - fd))
    return worst


def _product_polynomial():
    # quadratic and cubic monomials in two observables, composed left to right
    return [((0, 1), 1.0), ((0, 0), 0.5), ((1, 0, 1), 2.0), ((0,), -1.0)]


def _check_product_law(ctx: CheckContext) -> float:
    observables = [obs for _, obs in ctx.require_observables("product_law")]
    if len(observables) == 1:
        observables = observables * 2
    frame = ctx.runtime.frame
    poly = _product_polynomial()
    worst = 0.0
    for t in ctx.sample_times:
        lifted_first = lift_function(frame, poly, observables[:2], t)
        lifts = [lift_observable(frame, obs, t) for obs in observables[:2]]
        evaluated = np.zeros_like(lifted_first)
        for monomial, coeff in poly:
            term = np.eye(frame.dim, dtype=complex)
            for idx in monomial:
                term = term @ lifts[idx]
            evaluated = evaluated + coeff * term
        worst = max(worst, max_norm(lifted_first - evaluated))
    return worst


def _check_commutator_lift(ctx: CheckContext) -> float:
    observables = [obs for _, obs in ctx.require_observables("commutator_lift")]
    if len(observables) == 1:
        observables = observables * 2
    a, b = observables[0], observables[1]
    frame = ctx.runtime.frame
    worst = 0.0
    for t in ctx.sample_times:
        direct = commutator(lift_observable(frame, a, t), lift_observable(frame, b, t))
        worst = max(worst, max_norm(direct - lift_commutator(frame, a, b, t)))
    return worst


def _check_two_time(ctx: CheckContext) -> float:
    observables = ctx.require_observables("two_time")
    frame = ctx.runtime.frame
    ts = ctx.sample_times
    pairs = [(ts[0], ts[3]), (ts[1], ts[4]), (ts[2], ts[2])]
    worst = 0.0
    for _, obs in observables:
        for s, r in pairs:
            worst = max(
                worst,
                max_norm(
                    two_time_morphism(frame, obs, s, r)
                    - two_time_morphism_flat(frame, obs, s, r)
                ),
            )
    return worst


def _check_morphism_schrodinger(ctx: CheckContext) -> float:
    """Dual-path evaluation of the derivation applied to a state section."""
    observables = ctx.require_observables("morphism_schrodinger")
    frame = ctx.runtime.frame
    _, obs = observables[0]
    morphism = MorphismAlongPath.lifted(frame, obs)
    gamma = ctx.gamma
    h = ctx.runtime.fd_step

    def applied(t: float) -> np.ndarray:
        return morphism(t) @ ctx.state_fibre(t)

    worst = 0.0
    for t in ctx.sample_times:
        product_route = (applied(t + h) - applied(t - h)) / (2 * h) + gamma(t) @ applied(t)
        derivation_route = morphism_derivation(gamma, morphism, t, h) @ ctx.state_fibre(t)
        worst = max(worst, max_norm(product_route - derivation_route))
    return worst


# --------------------------------------------------------------------------
# registry

CHECKS: dict[str, tuple[str, float, Callable[[CheckContext], float]]] = {
    # name: (equation label, default tolerance, implementation)
    "unitarity": ("2.6", 1e-8, _check_unitarity),
    "metric_unitarity": ("4.8", 1e-7, _check_metric_unitarity),
    "composition": ("2.6", 1e-10, _check_composition),
    "closed_form": ("example-5.1", 1e-8, _check_closed_form),
    "hamiltonian_recovery": ("5.08", 1e-5, _check_hamiltonian_recovery),
    "transport_identity": ("5.10", 1e-5, _check_transport_identity),
    "bundle_schrodinger": ("5.13", 1e-4, _check_bundle_schrodinger),
    "vector_transform": ("5.02", 1e-11, _check_vector_transform),
    "operator_transform": ("5.02a", 1e-10, _check_operator_transform),
    "two_point_transform": ("5.03/5.04", 1e-10, _check_two_point_transform),
    "gauge_coefficients": ("5.11", 1e-5, _check_gauge_coefficients),
    "gauge_hamiltonian": ("5.12", 1e-10, _check_gauge_hamiltonian),
    "gauge_covariance": ("5.13", 1e-9, _check_gauge_covariance),
    "heisenberg_gauge": ("5.12", 1e-4, _check_heisenberg_gauge),
    "expectation_equality": ("6.1''", 1e-11, _check_expectation_equality),
    "hermiticity": ("6.2", 1e-11, _check_hermiticity),
    "morphism_derivative": ("6.6", 1e-6, _check_morphism_derivative),
    "product_law": ("6.072", 1e-10, _check_product_law),
    "commutator_lift": ("6.073", 1e-11, _check_commutator_lift),
    "two_time": ("6.082", 1e-11, _check_two_time),
    "morphism_schrodinger": ("6.4", 1e-5, _check_morphism_schrodinger),
}

DEFAULT_TOLERANCES = {name: tol for name, (_, tol, _) in CHECKS.items()}

GAUGE_CHECKS = (
    "vector_transform",
    "operator_transform",
    "two_point_transform",
    "gauge_coefficients",
    "gauge_hamiltonian",
    "gauge_covariance",
)
OBSERVABLE_CHECKS = (
    "expectation_equality",
    "hermiticity",
    "morphism_derivative",
    "product_law",
    "commutator_lift",
    "two_time",
    "morphism_schrodinger",
)
BASE_CHECKS = (
    "unitarity",
    "metric_unitarity",
    "composition",
    "transport_identity",
    "bundle_schrodinger",
    "heisenberg_gauge",
)


def applicable_checks(ctx: CheckContext) -> list[str]:
    """Default check set given what the scenario provides."""
    names = list(BASE_CHECKS)
    if _closed_form_applicable(ctx):
        names.append("closed_form")
    if ctx.runtime.gauge is not None:
        names.extend(GAUGE_CHECKS)
    if ctx.runtime.observables:
        names.extend(OBSERVABLE_CHECKS)
    return sorted(names)


# --------------------------------------------------------------------------
# trajectory emission


def _trajectory(ctx: CheckContext, stride: int) -> list[TrajectoryRow]:
    rt = ctx.runtime
    frame = rt.frame
    P = ctx.propagator
    tr = ctx.transport
    grid = rt.grid
    eye = np.eye(P.dim)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # endpoint rows use one-sided differences
        for k in range(0, grid.size, stride):
            t = float(grid[k])
            u = P.U(t, P.t0)
            ut = tr.U(t, P.t0)
            values: dict[str, float] = {}
            psi_h = u @ rt.psi0
            psi_b = ut @ ctx.psi0_fibre
            g = fibre_metric(frame, t)
            for name, obs in rt.observables:
                values[f"{name}_hilbert"] = expectation_hilbert(obs, psi_h, t)
                values[f"{name}_bundle"] = expectation_bundle(
                    lift_observable(frame, obs, t), psi_b, g
                )
            values["unitarity_residual"] = max_norm(adjoint(u) @ u - eye)
            values["d5_10_residual"] = central_identity_residual(
                frame, rt.hamiltonian, rt.drift, tr, t, h=rt.fd_step
            )
            if 0 < k < grid.size - 1:
                du = (tr.U(grid[k + 1], P.t0) - tr.U(grid[k - 1], P.t0)) / (
                    grid[k + 1] - grid[k - 1]
                )
                values["d5_13_residual"] = max_norm(du + ctx.gamma(t) @ ut)
            else:
                values["d5_13_residual"] = 0.0
            rows.append(TrajectoryRow(t=t, values=values))
    return rows


# --------------------------------------------------------------------------
# runner


def run_scenario(model: ScenarioModel, *, with_trajectory: bool = True) -> Report:
    """Run every requested check of a scenario and assemble the report."""
    started = time.perf_counter()
    runtime = build_runtime(model)
    ctx = CheckContext(runtime=runtime)

    names = model.checks if model.checks is not None else applicable_checks(ctx)
    unknown = sorted(set(names) - set(CHECKS))
    if unknown:
        raise ScenarioError(f"unknown check name(s): {', '.join(unknown)}")

    entries = []
    for name in sorted(set(names)):
        equation, default_tol, impl = CHECKS[name]
        tolerance = model.tolerances.get(name, default_tol)
        try:
            residual = float(impl(ctx))
        except ScenarioError:
            raise
        except Exception as exc:  # surface the offending check by name
            raise ScenarioError(f"check {name!r} failed to evaluate: {exc}") from exc
        entries.append(
            CheckEntry(
                name=name,
                equation=equation,
                residual=residual,
                tolerance=tolerance,
                passed=bool(residual <= tolerance),
            )
        )

    trajectory = None
    if with_trajectory:
        stride = model.output.stride if model.output else 1
        trajectory = _trajectory(ctx, stride)

    meta = {
        "dim": model.dim,
        "steps": model.steps,
        "kernel": model.kernel,
        "fd_step": runtime.fd_step,
        "hbar": model.hbar,
        "window": [model.t0, model.t1],
        "wall_time_s": time.perf_counter() - started,
    }
    return Report(checks=entries, trajectory=trajectory, meta=meta)
