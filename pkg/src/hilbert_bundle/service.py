"""HTTP service exposing the scenario runner and verification suites.

Endpoints:

* ``GET  /health`` -- liveness probe;
* ``POST /run``    -- run a scenario document, returning the check report;
* ``POST /verify`` -- run a randomized verification suite.

Malformed scenarios and unknown suites map to HTTP 400 with the original
error message.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict

from .checks import run_scenario
from .report import Report
from .scenario import ScenarioError, ScenarioModel
from .verify import verify_suite

__all__ = ["app", "VerifyRequest"]

app = FastAPI(title="hilbert-bundle", version="1.0.0")


class VerifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: str
    seed: int
    dims: str = "2..6"
    instances: int = 3


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/run", response_model=Report, response_model_by_alias=True)
def run(scenario: ScenarioModel) -> Report:
    try:
        return run_scenario(scenario)
    except ScenarioError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/verify", response_model=Report, response_model_by_alias=True)
def verify(request: VerifyRequest) -> Report:
    try:
        return verify_suite(
            request.suite, request.seed, dims=request.dims, instances=request.instances
        )
    except ScenarioError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
