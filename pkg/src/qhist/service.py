"""HTTP service exposing the analysis engine.

Stateless request/response wrapper around :mod:`qhist.analysis`: clients
POST a scenario document (or name a built-in) and get the full analysis
report back.  Built-in documents are served for download so clients can
use them as schema templates.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, model_validator

from . import __version__
from .analysis import AnalysisOptions, analyze
from .errors import ParseError, QHistError
from .scenarios import BUILTIN_BUILDERS, builtin_names, compile_document
from .schemas import AnalysisReport, ScenarioDocument, document_diagnostics

app = FastAPI(
    title="qhist analysis service",
    description="consistent-histories analysis of delayed-choice scenarios",
    version=__version__,
)


class HealthResponse(BaseModel):
    status: str
    version: str


class ScenarioListResponse(BaseModel):
    scenarios: list[str]


class AnalyzeRequest(BaseModel):
    """Either name a built-in scenario or supply a full document."""

    builtin: str | None = None
    document: ScenarioDocument | None = None
    tolerance: float = 1e-10
    show_zero_branches: bool = False

    @model_validator(mode="after")
    def _exactly_one_source(self) -> "AnalyzeRequest":
        if (self.builtin is None) == (self.document is None):
            raise ValueError("provide exactly one of 'builtin' or 'document'")
        return self


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/scenarios", response_model=ScenarioListResponse)
def list_scenarios() -> ScenarioListResponse:
    return ScenarioListResponse(scenarios=builtin_names())


@app.get("/scenarios/{name}", response_model=ScenarioDocument)
def get_scenario(name: str) -> ScenarioDocument:
    builder = BUILTIN_BUILDERS.get(name)
    if builder is None:
        raise HTTPException(status_code=404, detail=f"unknown scenario {name!r}")
    return builder().document


@app.post("/analyze", response_model=AnalysisReport)
def analyze_scenario(request: AnalyzeRequest) -> AnalysisReport:
    if request.builtin is not None:
        builder = BUILTIN_BUILDERS.get(request.builtin)
        if builder is None:
            raise HTTPException(
                status_code=400, detail=f"unknown scenario {request.builtin!r}"
            )
        scenario = builder()
    else:
        diagnostics = document_diagnostics(request.document)
        if diagnostics:
            raise HTTPException(status_code=400, detail=diagnostics)
        try:
            scenario = compile_document(request.document)
        except ParseError as exc:
            raise HTTPException(status_code=400, detail=exc.diagnostics) from None
        except QHistError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
    options = AnalysisOptions(
        tolerance=request.tolerance, show_zero_branches=request.show_zero_branches
    )
    return analyze(scenario, options)
