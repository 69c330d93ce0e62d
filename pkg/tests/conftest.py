"""Shared fixtures and scenario builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from hilbert_bundle.scenario import ScenarioModel, matrix_to_pairs


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    r = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (r + r.conj().T)


def random_general(rng: np.random.Generator, dim: int, scale: float) -> np.ndarray:
    r = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * r / max(float(np.max(np.abs(r))), 1.0)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def state_to_pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in v]


def make_scenario(rng: np.random.Generator, dim: int, *, steps: int = 200,
                  t1: float = 2.0, kernel: str = "gauss4",
                  checks: list[str] | None = None, with_gauge: bool = True,
                  with_observables: bool = True, fd_step: float | None = None,
                  frame_scale: float = 0.4) -> ScenarioModel:
    """Randomized dense scenario: driven Hamiltonian, exponential frame."""
    data = {
        "dim": dim,
        "t0": 0.0,
        "t1": t1,
        "steps": steps,
        "kernel": kernel,
        "hamiltonian": [
            {
                "matrix": matrix_to_pairs(random_hermitian(rng, dim)),
                "coefficient": {"kind": "constant", "value": 1.0},
            },
            {
                "matrix": matrix_to_pairs(random_hermitian(rng, dim, 0.5)),
                "coefficient": {
                    "kind": "cos",
                    "value": 1.0,
                    "omega": float(rng.uniform(0.5, 2.0)),
                },
            },
        ],
        "frame": {
            "kind": "exponential",
            "generator": matrix_to_pairs(random_general(rng, dim, frame_scale)),
        },
        "initial_state": state_to_pairs(random_state(rng, dim)),
    }
    if with_gauge:
        data["gauge"] = {
            "kind": "exponential",
            "generator": matrix_to_pairs(random_general(rng, dim, 0.3)),
        }
    if with_observables:
        data["observables"] = [
            {"name": "obs1", "matrix": matrix_to_pairs(random_hermitian(rng, dim))},
            {"name": "obs2", "matrix": matrix_to_pairs(random_hermitian(rng, dim))},
        ]
    if checks is not None:
        data["checks"] = checks
    if fd_step is not None:
        data["fd_step"] = fd_step
    return ScenarioModel.model_validate(data)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
