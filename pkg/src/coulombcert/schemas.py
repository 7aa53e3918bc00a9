"""Request/response models of the certification service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from .pipeline import RunConfig


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class SkRequest(BaseModel):
    n_min: int = Field(ge=2)
    n_max: int = Field(ge=2)
    ks: Optional[list[int]] = None  # default: every mode 0..n-1


class SkRow(BaseModel):
    n: int
    k: int
    lo: str  # repr strings keep the enclosure lossless in transit
    hi: str
    strictly_below_n: Optional[bool] = None
    symmetric_pair_overlaps: Optional[bool] = None


class SkResponse(BaseModel):
    rows: list[SkRow]


class RunConfigModel(BaseModel):
    n: int
    k: int
    family: int = 1
    direction: str = "plus"
    max_points: int = 120
    ds0: float = 1e-3
    eps0: float = 1e-4
    ds_min: float = 1e-8
    ds_max: float = 1e-1
    newton_tol: float = 1e-12
    newton_max_iter: int = 20
    collision_stop: float = 1e-3
    mu_hi_factor: float = 10.0
    spectra_every: int = 1
    parallelism: int = 0

    def to_config(self) -> RunConfig:
        return RunConfig(**self.model_dump())


class ContinueResponse(BaseModel):
    branch_text: str
    spectra_text: str
    report: dict
    file_prefix: str


class VerifyRequest(BaseModel):
    branch_text: str


class VerifyResponse(BaseModel):
    ok: bool
    checked: int
    passed: int
    mismatches: list[str]


class PlotdataRequest(BaseModel):
    branch_text: str
    spectra_text: Optional[str] = None
    point: Optional[int] = None
    eps: float = 0.2
    samples: int = Field(default=128, ge=2, le=100_000)


class PlotdataResponse(BaseModel):
    configurations_csv: str
    diagram_csv: str
    modes: dict[str, str]
    notices: list[str]
