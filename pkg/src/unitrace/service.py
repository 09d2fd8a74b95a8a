"""HTTP service exposing the analysis runners.

Run with: uvicorn unitrace.service:app
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import analysis
from .config import AnalysisConfig, parse_config_text
from .errors import ConfigError, UnitraceError

app = FastAPI(title="unitrace", version="1.0.0")


class AnalyzeRequest(BaseModel):
    source: str = Field(..., description="algebra shape, e.g. 'M2 (+) M1'")
    hom: str = Field(..., description="homomorphism expression")
    mode: str = "unitary"
    target: str | None = None
    analyses: list[str] = []
    seed: int = 0
    trials: int = 50
    tol: float | None = None


class PropertiesRequest(BaseModel):
    seed: int = 0
    trials: int = 50


class CorpusRequest(BaseModel):
    tol: float = 1e-9


class ReportResponse(BaseModel):
    kind: str
    config: dict
    sections: dict
    status: str


def _respond(report: analysis.Report) -> ReportResponse:
    return ReportResponse(**report.to_dict())


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/analyze", response_model=ReportResponse)
def analyze(req: AnalyzeRequest) -> ReportResponse:
    lines = [f"source = {req.source}", f"hom = {req.hom}", f"mode = {req.mode}"]
    if req.target:
        lines.append(f"target = {req.target}")
    if req.analyses:
        lines.append(f"analyses = {', '.join(req.analyses)}")
    lines.append(f"seed = {req.seed}")
    lines.append(f"trials = {req.trials}")
    if req.tol is not None:
        lines.append(f"tol = {req.tol}")
    try:
        cfg: AnalysisConfig = parse_config_text("\n".join(lines))
        return _respond(analysis.run_analysis(cfg))
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except UnitraceError as exc:
        raise HTTPException(status_code=500, detail=f"{type(exc).__name__}: {exc}")


@app.post("/corpus", response_model=ReportResponse)
def corpus(req: CorpusRequest) -> ReportResponse:
    return _respond(analysis.run_corpus(tol=req.tol))


@app.post("/properties", response_model=ReportResponse)
def properties(req: PropertiesRequest) -> ReportResponse:
    return _respond(analysis.run_properties(seed=req.seed, trials=req.trials))
