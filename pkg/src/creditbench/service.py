"""FastAPI service exposing the benchmark pipeline and the standalone
metric/comparison stack.  The service is stateless: clients send config or
CSV content and receive rendered artifacts back; dataset paths inside a run
config must be visible to the server process.
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .config import RunConfig
from .metrics import METRIC_NAMES, evaluate_cell
from .pipeline import (
    build_reports,
    records_from_csv,
    records_to_csv,
    render_provenance,
    run_benchmark,
    timings_to_csv,
)
from .compare import render_report_csv, render_report_markdown, render_sampler_comparison_csv

app = FastAPI(title="creditbench", version=__version__)


class HealthResponse(BaseModel):
    status: str
    version: str


class ValidateRequest(BaseModel):
    config: dict


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[str]


class PredictionRow(BaseModel):
    row_id: str
    score: float = Field(ge=0.0, le=1.0)
    label: int = Field(ge=0, le=1)


class MetricsRequest(BaseModel):
    predictions: list[PredictionRow]
    train_good_rate: float | None = None


class MetricsResponse(BaseModel):
    metrics: dict[str, float]
    threshold: float
    n_rows: int


class ReportRequest(BaseModel):
    records_csv: str
    metrics: list[str] = Field(default_factory=lambda: list(METRIC_NAMES))


class ScenarioReport(BaseModel):
    markdown: str
    csv: str


class ReportResponse(BaseModel):
    reports: dict[str, ScenarioReport]
    sampler_comparison_csv: str | None


class RunRequest(BaseModel):
    config: dict


class RunResponse(BaseModel):
    records_csv: str
    timings_csv: str
    reports: dict[str, ScenarioReport]
    sampler_comparison_csv: str | None
    provenance: str
    errors: list[str]


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/config/validate", response_model=ValidateResponse)
def validate_config(req: ValidateRequest) -> ValidateResponse:
    try:
        cfg = RunConfig.model_validate(req.config)
    except Exception as exc:  # pydantic's error text is the payload
        return ValidateResponse(valid=False, errors=[str(exc)])
    problems = cfg.validate_files()
    return ValidateResponse(valid=not problems, errors=problems)


@app.post("/metrics", response_model=MetricsResponse)
def metrics_endpoint(req: MetricsRequest) -> MetricsResponse:
    if not req.predictions:
        raise HTTPException(status_code=422, detail="predictions must be non-empty")
    scores = np.array([p.score for p in req.predictions])
    labels = np.array([p.label for p in req.predictions])
    rate = req.train_good_rate
    if rate is None:
        rate = float((labels == 0).mean())
    if not 0.0 < rate < 1.0:
        raise HTTPException(status_code=422, detail="train_good_rate must lie strictly in (0, 1)")
    try:
        metric_set, tau = evaluate_cell(scores, labels, rate)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    return MetricsResponse(metrics=metric_set.as_dict(), threshold=tau.tau, n_rows=len(labels))


def _render(reports, sampler_cmp) -> tuple[dict[str, ScenarioReport], str | None]:
    rendered = {
        sampler: ScenarioReport(
            markdown=render_report_markdown(rep, f"Scenario: {sampler}"),
            csv=render_report_csv(rep),
        )
        for sampler, rep in reports.items()
    }
    cmp_csv = render_sampler_comparison_csv(sampler_cmp) if sampler_cmp is not None else None
    return rendered, cmp_csv


@app.post("/report", response_model=ReportResponse)
def report_endpoint(req: ReportRequest) -> ReportResponse:
    try:
        records = records_from_csv(req.records_csv)
        if not records:
            raise ValueError("records file contains no rows")
        datasets = list(dict.fromkeys(r.dataset for r in records))
        samplers = list(dict.fromkeys(r.sampler for r in records))
        models = list(dict.fromkeys(r.model for r in records))
        reports, sampler_cmp = build_reports(
            records, datasets, samplers, models, req.metrics, strict=True
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    rendered, cmp_csv = _render(reports, sampler_cmp)
    return ReportResponse(reports=rendered, sampler_comparison_csv=cmp_csv)


@app.post("/run", response_model=RunResponse)
def run_endpoint(req: RunRequest) -> RunResponse:
    try:
        cfg = RunConfig.model_validate(req.config)
    except Exception as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    try:
        result = run_benchmark(cfg)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    rendered, cmp_csv = _render(result.reports, result.sampler_comparison)
    return RunResponse(
        records_csv=records_to_csv(result.records),
        timings_csv=timings_to_csv(result.records),
        reports=rendered,
        sampler_comparison_csv=cmp_csv,
        provenance=result.provenance,
        errors=[f"{e.dataset}/{e.sampler}/{e.model}: {e.reason}" for e in result.errors],
    )
