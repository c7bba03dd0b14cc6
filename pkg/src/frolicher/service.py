"""HTTP facade over the analysis pipeline."""
from __future__ import annotations

from typing import Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .analysis import AnalyzeOptions, run_analysis, run_sweep
from .catalog import catalog_listing, load_manifold, parse_metric
from .errors import FrolicherError, VerificationError


class OptionsModel(BaseModel):
    j_max: int = Field(default=10, ge=4, le=16)
    tol: float = Field(default=1e-10, gt=0)
    exact: bool = True
    seed: int = 0
    r_max: int = Field(default=3, ge=1, le=8)


class AnalyzeRequest(BaseModel):
    manifold: Union[str, dict]
    metric: Union[list, None] = None
    options: OptionsModel = OptionsModel()


class AnalyzeResponse(BaseModel):
    all_passed: bool
    failures: list[str]
    report: dict


class SweepRequest(BaseModel):
    manifold: Union[str, dict]
    metric: Union[list, None] = None
    j_max: int = Field(default=10, ge=4, le=16)
    r_max: int = Field(default=3, ge=1, le=8)
    exact: bool = True


class SweepResponse(BaseModel):
    all_passed: bool
    eigenvalues_csv: str
    classification_csv: str
    verdicts_csv: str


class CatalogEntry(BaseModel):
    name: str
    n: int
    summary: str


app = FastAPI(title="frolicher", version=__version__,
              description="Frölicher spectral sequence workbench on invariant-form models")


def _resolve(manifold, metric_rows):
    structure, metric = load_manifold(manifold)
    if metric_rows is not None:
        metric = parse_metric(metric_rows, structure.n)
    return structure, metric


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.get("/catalog", response_model=list[CatalogEntry])
def get_catalog():
    return catalog_listing()


@app.post("/analyze", response_model=AnalyzeResponse)
def post_analyze(req: AnalyzeRequest):
    try:
        _, metric = _resolve(req.manifold, req.metric)
        options = AnalyzeOptions(**req.options.model_dump())
        report = run_analysis(req.manifold, metric=metric, options=options)
    except VerificationError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    except FrolicherError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return AnalyzeResponse(all_passed=report.all_passed, failures=report.failures,
                           report=_jsonable_payload(report))


@app.post("/sweep", response_model=SweepResponse)
def post_sweep(req: SweepRequest):
    try:
        structure, metric = _resolve(req.manifold, req.metric)
        result = run_sweep(req.manifold, metric=metric, j_max=req.j_max,
                           r_max=req.r_max, exact=req.exact)
    except VerificationError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    except FrolicherError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return SweepResponse(all_passed=result["all_passed"],
                         eigenvalues_csv=result["eigenvalues_csv"],
                         classification_csv=result["classification_csv"],
                         verdicts_csv=result["verdicts_csv"])


def _jsonable_payload(report):
    from .report import to_jsonable

    return to_jsonable(report.payload)
