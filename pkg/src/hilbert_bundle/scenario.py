"""Scenario configuration: schema, parsing, and construction of the
runtime objects (frames, Hamiltonians, gauges, observables).

Scenario files are JSON documents validated against the pydantic models
below; unknown fields are rejected.  Matrices are given either as named
shorthands (``sx``, ``sy``, ``sz``, ``id``, ``n``, ``a``, ``adag``) or as
row-major lists of ``[re, im]`` pairs.  Time-dependent coefficients come
from a closed function library (constant, polynomial of degree <= 4,
cos, sin, exp) so that derivatives are analytic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Callable, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .evolution import KERNELS, HamiltonianSpec
from .frames import BasisDrift, FrameField, GaugeTransform
from .linalg import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    LinalgError,
    as_matrix,
    inverse,
    is_hermitian,
)
from .observables import ObservableSpec

__all__ = [
    "ScenarioError",
    "CoefficientModel",
    "TermModel",
    "FrameModel",
    "GaugeModel",
    "ObservableModel",
    "OutputModel",
    "ScenarioModel",
    "RuntimeScenario",
    "load_scenario",
    "build_runtime",
    "named_matrix",
]

MAX_POLY_DEGREE = 4


class ScenarioError(Exception):
    """Scenario file is unreadable, malformed, or inconsistent."""


# --------------------------------------------------------------------------
# matrix shorthands

def named_matrix(name: str, dim: int) -> np.ndarray:
    """Resolve a named matrix shorthand at the given fibre dimension."""
    if name in ("sx", "sy", "sz"):
        if dim != 2:
            raise ScenarioError(f"Pauli shorthand {name!r} requires dim=2, got dim={dim}")
        return {"sx": SIGMA_X, "sy": SIGMA_Y, "sz": SIGMA_Z}[name].copy()
    if name == "id":
        return np.eye(dim, dtype=complex)
    if name == "zero":
        return np.zeros((dim, dim), dtype=complex)
    if name == "n":
        return np.diag(np.arange(dim, dtype=complex))
    if name == "a":
        return np.diag(np.sqrt(np.arange(1, dim, dtype=complex)), k=1)
    if name == "adag":
        return np.diag(np.sqrt(np.arange(1, dim, dtype=complex)), k=-1)
    raise ScenarioError(f"unknown matrix shorthand {name!r}")


MatrixInput = Union[str, list]


def parse_matrix(spec: MatrixInput, dim: int, where: str) -> np.ndarray:
    """Parse a matrix field: shorthand name or dim x dim rows of [re, im]."""
    if isinstance(spec, str):
        return named_matrix(spec, dim)
    try:
        arr = np.asarray(spec, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: matrix entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ScenarioError(
            f"{where}: expected rows of [re, im] pairs, got shape {arr.shape}"
        )
    if arr.shape[0] != dim or arr.shape[1] != dim:
        raise ScenarioError(
            f"{where}: matrix is {arr.shape[0]}x{arr.shape[1]}, scenario dim is {dim}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def matrix_to_pairs(m: np.ndarray) -> list:
    """Inverse of :func:`parse_matrix` for raw matrices."""
    m = as_matrix(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


# --------------------------------------------------------------------------
# coefficient function library

class CoefficientModel(BaseModel):
    """One function from the closed coefficient library.

    constant: value
    poly:     coeffs[0] + coeffs[1] t + ... (degree <= 4)
    cos/sin:  value * cos(omega t + phi) (resp. sin)
    exp:      value * exp(rate t)
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["constant", "poly", "cos", "sin", "exp"] = "constant"
    value: float = 1.0
    coeffs: Optional[list[float]] = None
    omega: float = 1.0
    phi: float = 0.0
    rate: float = 1.0

    @field_validator("coeffs")
    @classmethod
    def _degree_bound(cls, v):
        if v is not None and (len(v) == 0 or len(v) > MAX_POLY_DEGREE + 1):
            raise ValueError(f"poly needs 1..{MAX_POLY_DEGREE + 1} coefficients")
        return v

    def callables(self) -> tuple[Callable[[float], float], Callable[[float], float]]:
        """Return ``(f, df/dt)``, both analytic."""
        if self.kind == "constant":
            value = self.value
            return (lambda t: value), (lambda t: 0.0)
        if self.kind == "poly":
            if self.coeffs is None:
                raise ScenarioError("poly coefficient requires 'coeffs'")
            poly = np.polynomial.Polynomial(self.coeffs)
            dpoly = poly.deriv()
            return (lambda t: float(poly(t))), (lambda t: float(dpoly(t)))
        if self.kind == "cos":
            amp, omega, phi = self.value, self.omega, self.phi
            return (
                lambda t: amp * math.cos(omega * t + phi),
                lambda t: -amp * omega * math.sin(omega * t + phi),
            )
        if self.kind == "sin":
            amp, omega, phi = self.value, self.omega, self.phi
            return (
                lambda t: amp * math.sin(omega * t + phi),
                lambda t: amp * omega * math.cos(omega * t + phi),
            )
        amp, rate = self.value, self.rate
        return (
            lambda t: amp * math.exp(rate * t),
            lambda t: amp * rate * math.exp(rate * t),
        )


class TermModel(BaseModel):
    """One matrix term with a time-dependent scalar coefficient."""

    model_config = ConfigDict(extra="forbid")

    matrix: MatrixInput
    coefficient: CoefficientModel = Field(default_factory=CoefficientModel)


class FrameModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["identity", "exponential", "terms", "tabulated"] = "identity"
    generator: Optional[MatrixInput] = None
    terms: Optional[list[TermModel]] = None
    times: Optional[list[float]] = None
    values: Optional[list[MatrixInput]] = None


class GaugeModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["exponential", "terms"] = "exponential"
    generator: Optional[MatrixInput] = None
    terms: Optional[list[TermModel]] = None


class ObservableModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    matrix: MatrixInput
    coefficient: CoefficientModel = Field(default_factory=CoefficientModel)


class OutputModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    stride: int = 1

    @field_validator("stride")
    @classmethod
    def _positive(cls, v):
        if v < 1:
            raise ValueError("stride must be >= 1")
        return v


class ScenarioModel(BaseModel):
    """Full scenario description; unknown fields are errors."""

    model_config = ConfigDict(extra="forbid")

    dim: int
    hbar: float = 1.0
    t0: float = 0.0
    t1: float
    steps: int
    kernel: Literal["midpoint", "gauss4"] = "midpoint"
    hamiltonian: list[TermModel]
    frame: FrameModel = Field(default_factory=FrameModel)
    basis_drift: list[TermModel] = Field(default_factory=list)
    gauge: Optional[GaugeModel] = None
    observables: list[ObservableModel] = Field(default_factory=list)
    initial_state: Optional[list[list[float]]] = None
    checks: Optional[list[str]] = None
    fd_step: Optional[float] = None
    tolerances: dict[str, float] = Field(default_factory=dict)
    output: Optional[OutputModel] = None

    @field_validator("dim")
    @classmethod
    def _dim_positive(cls, v):
        if v < 1:
            raise ValueError("dim must be positive")
        return v

    @field_validator("steps")
    @classmethod
    def _steps_bound(cls, v):
        if v < 2:
            raise ValueError("steps must be >= 2")
        return v

    @field_validator("hbar")
    @classmethod
    def _hbar_positive(cls, v):
        if v <= 0:
            raise ValueError("hbar must be positive")
        return v


# --------------------------------------------------------------------------
# runtime construction

def _terms_to_callables(terms: list[TermModel], dim: int, where: str,
                        hermitian: bool = False):
    """Parse a term list into (matrices, coefficient fns, derivative fns)."""
    matrices, funcs, derivs = [], [], []
    for idx, term in enumerate(terms):
        label = f"{where} term {idx}"
        m = parse_matrix(term.matrix, dim, label)
        if hermitian and not is_hermitian(m):
            raise ScenarioError(f"{label}: matrix declared Hermitian is not")
        f, df = term.coefficient.callables()
        matrices.append(m)
        funcs.append(f)
        derivs.append(df)
    return matrices, funcs, derivs


def _sum_callable(matrices, funcs):
    def value(t: float) -> np.ndarray:
        return sum(f(t) * m for f, m in zip(funcs, matrices))

    return value


def _build_frame(model: FrameModel, dim: int, t0: float, window: float) -> FrameField:
    if model.kind == "identity":
        return FrameField.identity(dim)
    if model.kind == "exponential":
        if model.generator is None:
            raise ScenarioError("exponential frame requires 'generator'")
        gen = parse_matrix(model.generator, dim, "frame generator")
        return FrameField.exponential_flow(gen, t_ref=t0)
    if model.kind == "terms":
        if not model.terms:
            raise ScenarioError("terms frame requires a nonempty 'terms' list")
        matrices, funcs, derivs = _terms_to_callables(model.terms, dim, "frame")
        frame = FrameField.from_terms(matrices, funcs, derivs)
        return frame
    # tabulated
    if not model.times or not model.values:
        raise ScenarioError("tabulated frame requires 'times' and 'values'")
    if len(model.times) != len(model.values):
        raise ScenarioError("tabulated frame: times and values differ in length")
    mats = [parse_matrix(v, dim, f"frame sample {i}") for i, v in enumerate(model.values)]
    frame = FrameField.tabulated(model.times, mats)
    return FrameField(dim=dim, L=frame.L, dL_dt=frame.dL_dt, fd_step=1e-5 * window)


def _build_gauge(model: GaugeModel, dim: int, t0: float) -> GaugeTransform:
    if model.kind == "exponential":
        if model.generator is None:
            raise ScenarioError("exponential gauge requires 'generator'")
        gen = parse_matrix(model.generator, dim, "gauge generator")
        return GaugeTransform.exponential_flow(gen, t_ref=t0)
    if not model.terms:
        raise ScenarioError("terms gauge requires a nonempty 'terms' list")
    matrices, funcs, derivs = _terms_to_callables(model.terms, dim, "gauge")
    return GaugeTransform(
        dim=dim,
        Omega=_sum_callable(matrices, funcs),
        dOmega_dt=_sum_callable(matrices, derivs),
    )


def _validate_invertible(frame: FrameField, t0: float, t1: float, what: str):
    for t in np.linspace(t0, t1, 9):
        try:
            inverse(frame.L(t))
        except LinalgError as exc:
            raise ScenarioError(f"{what} is singular near t={t:.6g}: {exc}") from exc


@dataclass
class RuntimeScenario:
    """Scenario with all callables bound and matrices instantiated."""

    model: ScenarioModel
    frame: FrameField
    hamiltonian: HamiltonianSpec
    drift: BasisDrift
    gauge: Optional[GaugeTransform]
    observables: list[tuple[str, ObservableSpec]]
    psi0: np.ndarray
    fd_step: float

    @property
    def grid(self) -> np.ndarray:
        m = self.model
        return np.linspace(m.t0, m.t1, m.steps + 1)


def build_runtime(model: ScenarioModel) -> RuntimeScenario:
    """Instantiate and validate every matrix and callable of a scenario."""
    dim = model.dim
    window = model.t1 - model.t0
    if window <= 0:
        raise ScenarioError("t1 must exceed t0")

    matrices, funcs, _ = _terms_to_callables(
        model.hamiltonian, dim, "hamiltonian", hermitian=True
    )
    spec = HamiltonianSpec(dim=dim, H=_sum_callable(matrices, funcs), hbar=model.hbar)

    frame = _build_frame(model.frame, dim, model.t0, window)
    _validate_invertible(frame, model.t0, model.t1, "frame")

    if model.basis_drift:
        d_matrices, d_funcs, _ = _terms_to_callables(model.basis_drift, dim, "basis_drift")
        drift = BasisDrift(dim=dim, E=_sum_callable(d_matrices, d_funcs))
    else:
        drift = BasisDrift.zero(dim)

    gauge = _build_gauge(model.gauge, dim, model.t0) if model.gauge else None

    observables: list[tuple[str, ObservableSpec]] = []
    seen = set()
    for idx, obs in enumerate(model.observables):
        if obs.name in seen:
            raise ScenarioError(f"duplicate observable name {obs.name!r}")
        seen.add(obs.name)
        m = parse_matrix(obs.matrix, dim, f"observable {obs.name!r}")
        if not is_hermitian(m):
            raise ScenarioError(f"observable {obs.name!r} is not Hermitian")
        f, df = obs.coefficient.callables()

        def A(t, m=m, f=f):
            return f(t) * m

        def dA(t, m=m, df=df):
            return df(t) * m

        observables.append((obs.name, ObservableSpec(dim=dim, A=A, dA_dt=dA)))

    if model.initial_state is not None:
        arr = np.asarray(model.initial_state, dtype=float)
        if arr.shape != (dim, 2):
            raise ScenarioError(
                f"initial_state must be {dim} rows of [re, im], got shape {arr.shape}"
            )
        psi0 = arr[:, 0] + 1j * arr[:, 1]
        if np.linalg.norm(psi0) == 0:
            raise ScenarioError("initial_state must be nonzero")
    else:
        psi0 = np.zeros(dim, dtype=complex)
        psi0[0] = 1.0

    fd_step = model.fd_step if model.fd_step is not None else 1e-4 * window
    return RuntimeScenario(
        model=model,
        frame=frame,
        hamiltonian=spec,
        drift=drift,
        gauge=gauge,
        observables=observables,
        psi0=psi0,
        fd_step=fd_step,
    )


def load_scenario(path) -> ScenarioModel:
    """Read and validate a scenario file (JSON)."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"scenario file {path} is not valid JSON (line {exc.lineno}): {exc.msg}"
        ) from exc
    try:
        model = ScenarioModel.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ScenarioError(f"invalid scenario field {loc!r}: {first['msg']}") from exc
    # fail fast on anything the schema alone cannot see
    build_runtime(model)
    return model
