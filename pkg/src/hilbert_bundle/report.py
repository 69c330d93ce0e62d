"""Report data model and JSON/CSV emission.

A report carries one entry per requested check plus optional per-grid-time
expectation trajectories.  JSON serialization is deterministic apart from
the wall-time entry in ``meta``.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field

__all__ = ["CheckEntry", "TrajectoryRow", "Report", "report_to_json", "report_to_csv"]


class CheckEntry(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    equation: str
    residual: float
    tolerance: float
    passed: bool = Field(alias="pass")


class TrajectoryRow(BaseModel):
    t: float
    values: dict[str, float]


class Report(BaseModel):
    checks: list[CheckEntry]
    trajectory: Optional[list[TrajectoryRow]] = None
    meta: dict[str, Any] = Field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(entry.passed for entry in self.checks)


def report_to_json(report: Report, *, include_timing: bool = True, indent: int = 2) -> str:
    data = report.model_dump(by_alias=True)
    if not include_timing:
        data["meta"] = {k: v for k, v in data["meta"].items() if k != "wall_time_s"}
    return json.dumps(data, indent=indent, sort_keys=True)


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def report_to_csv(report: Report, observable_names: list[str]) -> str:
    """Trajectory CSV with 15-significant-digit floats."""
    if report.trajectory is None:
        raise ValueError("report has no trajectory to emit as CSV")
    columns = ["t"]
    for name in observable_names:
        columns += [f"{name}_hilbert", f"{name}_bundle"]
    columns += ["unitarity_residual", "d5_10_residual", "d5_13_residual"]
    lines = [", ".join(columns)]
    for row in report.trajectory:
        cells = [_fmt(row.t)] + [_fmt(row.values[c]) for c in columns[1:]]
        lines.append(", ".join(cells))
    return "\n".join(lines) + "\n"
