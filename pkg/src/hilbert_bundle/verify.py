"""Randomized verification suites.

Each suite draws random scenario instances (seeded, hence reproducible),
runs the named identity checks on every instance, and aggregates the
worst residual per check into a single report.
"""

from __future__ import annotations

import time

import numpy as np

from .checks import CHECKS, run_scenario
from .report import CheckEntry, Report
from .scenario import ScenarioError, ScenarioModel, matrix_to_pairs

__all__ = ["SUITES", "parse_dims", "verify_suite"]

DEFAULT_INSTANCES = 3
_WINDOW = 2.0
_STEPS = 320
_FRAME_SCALE = 0.4
_GAUGE_SCALE = 0.3
_H_SCALE = 1.0

SUITES: dict[str, tuple[str, ...]] = {
    "transport": (
        "unitarity",
        "metric_unitarity",
        "composition",
        "hamiltonian_recovery",
        "transport_identity",
        "bundle_schrodinger",
        "heisenberg_gauge",
    ),
    "gauge": (
        "vector_transform",
        "operator_transform",
        "two_point_transform",
        "gauge_coefficients",
        "gauge_hamiltonian",
        "gauge_covariance",
    ),
    "observables": (
        "expectation_equality",
        "hermiticity",
        "morphism_derivative",
        "product_law",
        "commutator_lift",
        "two_time",
        "morphism_schrodinger",
    ),
    "closed-form": ("closed_form", "unitarity", "composition"),
}
SUITES["full"] = tuple(
    sorted(set(SUITES["transport"]) | set(SUITES["gauge"]) | set(SUITES["observables"]))
)


def parse_dims(spec) -> list[int]:
    """Parse a dimension spec: ``"2..6"``, ``"2,3,5"``, a single int, or a
    list of ints."""
    if isinstance(spec, int):
        dims = [spec]
    elif isinstance(spec, (list, tuple)):
        dims = [int(d) for d in spec]
    else:
        text = str(spec).strip()
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ScenarioError(f"empty dimension range {text!r}")
            dims = list(range(lo, hi + 1))
        else:
            dims = [int(part) for part in text.split(",") if part.strip()]
    if not dims or any(d < 2 for d in dims):
        raise ScenarioError(f"dimensions must all be >= 2, got {dims}")
    return dims


def _random_hermitian(rng: np.random.Generator, dim: int, scale: float) -> np.ndarray:
    r = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (r + r.conj().T)


def _random_general(rng: np.random.Generator, dim: int, scale: float) -> np.ndarray:
    r = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * r / max(np.max(np.abs(r)), 1.0)


def _random_state(rng: np.random.Generator, dim: int) -> list:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v = v / np.linalg.norm(v)
    return [[float(z.real), float(z.imag)] for z in v]


def _random_instance(rng: np.random.Generator, dim: int, checks: list[str],
                     closed_form: bool) -> ScenarioModel:
    if closed_form:
        hamiltonian = [
            {
                "matrix": matrix_to_pairs(_random_hermitian(rng, dim, _H_SCALE)),
                "coefficient": {"kind": "constant", "value": 1.0},
            }
        ]
        frame = {"kind": "identity"}
    else:
        hamiltonian = [
            {
                "matrix": matrix_to_pairs(_random_hermitian(rng, dim, _H_SCALE)),
                "coefficient": {"kind": "constant", "value": 1.0},
            },
            {
                "matrix": matrix_to_pairs(_random_hermitian(rng, dim, 0.5 * _H_SCALE)),
                "coefficient": {"kind": "cos", "value": 1.0, "omega": float(rng.uniform(0.5, 2.0))},
            },
        ]
        frame = {
            "kind": "exponential",
            "generator": matrix_to_pairs(_random_general(rng, dim, _FRAME_SCALE)),
        }

    data = {
        "dim": dim,
        "t0": 0.0,
        "t1": _WINDOW,
        "steps": _STEPS,
        "kernel": "gauss4",
        "hamiltonian": hamiltonian,
        "frame": frame,
        "gauge": {
            "kind": "exponential",
            "generator": matrix_to_pairs(_random_general(rng, dim, _GAUGE_SCALE)),
        },
        "observables": [
            {"name": "obs1", "matrix": matrix_to_pairs(_random_hermitian(rng, dim, 1.0))},
            {"name": "obs2", "matrix": matrix_to_pairs(_random_hermitian(rng, dim, 1.0))},
        ],
        "initial_state": _random_state(rng, dim),
        "checks": checks,
    }
    return ScenarioModel.model_validate(data)


def verify_suite(suite: str, seed: int, dims="2..6",
                 instances: int = DEFAULT_INSTANCES) -> Report:
    """Run a named suite over randomized instances and aggregate residuals."""
    if suite not in SUITES:
        raise ScenarioError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    if instances < 1:
        raise ScenarioError("instances must be >= 1")
    checks = sorted(SUITES[suite])
    dim_list = parse_dims(dims)
    rng = np.random.default_rng(seed)
    started = time.perf_counter()

    worst: dict[str, float] = {name: 0.0 for name in checks}
    runs = 0
    for dim in dim_list:
        for _ in range(instances):
            model = _random_instance(rng, dim, checks, closed_form=(suite == "closed-form"))
            report = run_scenario(model, with_trajectory=False)
            runs += 1
            for entry in report.checks:
                worst[entry.name] = max(worst[entry.name], entry.residual)

    entries = [
        CheckEntry(
            name=name,
            equation=CHECKS[name][0],
            residual=worst[name],
            tolerance=CHECKS[name][1],
            passed=bool(worst[name] <= CHECKS[name][1]),
        )
        for name in checks
    ]
    meta = {
        "suite": suite,
        "seed": seed,
        "dims": dim_list,
        "instances": instances,
        "runs": runs,
        "wall_time_s": time.perf_counter() - started,
    }
    return Report(checks=entries, meta=meta)
