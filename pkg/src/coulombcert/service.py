"""FastAPI service exposing the certification pipeline.

The service is stateless: every endpoint returns the full result (branch
and spectra files as text, reports as JSON) and persists nothing, so any
number of clients can share one instance.  The bundled CLI is a thin client
that talks to this app, in process by default.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .branchio import branch_from_text, spectra_from_text, spectra_to_text, branch_to_text, verify_branch
from .errors import CoulombCertError, IntegrityError
from .pipeline import critical_value_table, run
from .plotdata import configurations_csv, diagram_csv, mode_exports
from .schemas import (
    ContinueResponse,
    HealthResponse,
    PlotdataRequest,
    PlotdataResponse,
    RunConfigModel,
    SkRequest,
    SkResponse,
    SkRow,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(
    title="coulombcert",
    description="Certified relative equilibria and normal-mode nonresonance "
    "for rings of unit charges around a fixed center.",
    version=__version__,
)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(version=__version__)


@app.post("/sk", response_model=SkResponse)
def sk(req: SkRequest) -> SkResponse:
    try:
        rows = critical_value_table(req.n_min, req.n_max, req.ks)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return SkResponse(rows=[SkRow(**row) for row in rows])


@app.post("/branches/continue", response_model=ContinueResponse)
def continue_branch(req: RunConfigModel) -> ContinueResponse:
    try:
        config = req.to_config()
        result = run(config)
    except (ValueError, CoulombCertError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return ContinueResponse(
        branch_text=branch_to_text(result.branch),
        spectra_text=spectra_to_text(result.spectral, result.branch),
        report=result.report,
        file_prefix=config.file_prefix(),
    )


@app.post("/branches/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    try:
        branch = branch_from_text(req.branch_text)
    except IntegrityError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    report = verify_branch(branch)
    return VerifyResponse(
        ok=report.ok,
        checked=report.checked,
        passed=report.passed,
        mismatches=report.mismatches,
    )


@app.post("/branches/plotdata", response_model=PlotdataResponse)
def plotdata(req: PlotdataRequest) -> PlotdataResponse:
    try:
        branch = branch_from_text(req.branch_text)
        spectral = spectra_from_text(req.spectra_text) if req.spectra_text else {}
    except IntegrityError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    modes, notices = mode_exports(
        branch, spectral, point_index=req.point, eps=req.eps, samples=req.samples
    )
    return PlotdataResponse(
        configurations_csv=configurations_csv(branch),
        diagram_csv=diagram_csv(branch),
        modes=modes,
        notices=notices,
    )
