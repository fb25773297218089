"""HTTP front end for the experiment runner.

Exposes the batch runner and the lemma-check matrix to multiple clients;
the CLI can talk to this service instead of running in-process.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .analysis import TooLarge
from .experiments import BatchResult, ExperimentSpec, SpecError, run_batch
from .protocols import PROTOCOL_NAMES
from .reporting import lemma_report

app = FastAPI(title="scatterbits", version=__version__)


class RunRequest(BaseModel):
    protocol: str = "dp2"
    ns: List[int] = Field(default=[2], description="robot counts to sweep")
    mode: str = "none"
    policy: str = "fsync"
    trials: int = 1
    master_seed: int = 0
    script_n: int = 2
    max_rounds: Optional[int] = None
    init: str = "gathered"
    workers: int = 1


class TrialRow(BaseModel):
    protocol: str
    n: int
    mode: str
    policy: str
    seed: int
    rounds: int
    total_bits: int
    max_per_robot_bits: int
    timed_out: int


class SizeSummary(BaseModel):
    trials: int = 0
    timed_out: int = 0
    mean_rounds: Optional[float] = None
    mean_bits: Optional[float] = None
    ci95_rounds: Optional[List[float]] = None
    ci95_bits: Optional[List[float]] = None
    max_per_robot_bits: Optional[int] = None
    all_timed_out: bool = False


class RunResponse(BaseModel):
    rows: List[TrialRow]
    summaries: Dict[int, SizeSummary]
    any_timed_out: bool


class LemmaCell(BaseModel):
    n: int
    k: int
    lemma: str
    method: str
    probability: Optional[float]
    bound: Optional[float]
    passed: Optional[bool]
    detail: str = ""


class LemmaReportResponse(BaseModel):
    max_n: int
    max_k: int
    all_passed: bool
    cells: List[LemmaCell]


def _summaries(result: BatchResult) -> Dict[int, SizeSummary]:
    out: Dict[int, SizeSummary] = {}
    for n, est in result.summaries.items():
        if est is None:
            out[n] = SizeSummary(trials=result.spec.trials,
                                 timed_out=result.spec.trials,
                                 all_timed_out=True)
        else:
            out[n] = SizeSummary(trials=est.trials, timed_out=est.timed_out,
                                 mean_rounds=est.mean_rounds,
                                 mean_bits=est.mean_bits,
                                 ci95_rounds=list(est.ci95_rounds),
                                 ci95_bits=list(est.ci95_bits),
                                 max_per_robot_bits=est.max_per_robot_bits)
    return out


@app.get("/health")
def health() -> Dict[str, str]:
    return {"status": "ok", "version": __version__}


@app.get("/protocols")
def protocols() -> Dict[str, List[str]]:
    return {"protocols": list(PROTOCOL_NAMES)}


@app.post("/run", response_model=RunResponse)
def run(request: RunRequest) -> RunResponse:
    spec = ExperimentSpec(protocol=request.protocol, ns=tuple(request.ns),
                          mode=request.mode, policy=request.policy,
                          trials=request.trials, master_seed=request.master_seed,
                          script_n=request.script_n, max_rounds=request.max_rounds,
                          init=request.init, workers=request.workers)
    try:
        result = run_batch(spec)
    except (SpecError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return RunResponse(rows=[TrialRow(**row) for row in result.rows()],
                       summaries=_summaries(result),
                       any_timed_out=result.any_timed_out)


class LemmaReportRequest(BaseModel):
    max_n: int
    max_k: int


@app.post("/lemma-report", response_model=LemmaReportResponse)
def lemma_report_endpoint(request: LemmaReportRequest) -> LemmaReportResponse:
    try:
        matrix = lemma_report(request.max_n, request.max_k)
    except TooLarge as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return LemmaReportResponse(max_n=matrix.max_n, max_k=matrix.max_k,
                               all_passed=matrix.all_passed,
                               cells=[LemmaCell(**c) for c in matrix.cells])
