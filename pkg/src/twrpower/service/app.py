"""FastAPI service exposing the power-allocation solver.

The solver is stateless, so the service maps each request onto the matching
runner and streams the full result back as JSON.  Errors in the request
surface as 422 (validation) or 400 (domain errors); per-trial solver
failures inside a sweep are reported in the payload, not as HTTP errors.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import RunConfig
from ..errors import TwrError
from ..runners import run_oracle_suite, run_single, run_sweep
from .models import (
    ComplexMatrix,
    HealthResponse,
    OracleRequest,
    OracleResponse,
    OracleRowModel,
    SolveRequest,
    SolveResponse,
    SweepCellModel,
    SweepRequest,
    SweepResponse,
    TraceRow,
)

app = FastAPI(title="twrpower", version=__version__)


def _config(system, power, **extra) -> RunConfig:
    return RunConfig(
        n1=system.n1,
        n2=system.n2,
        nr=system.nr,
        v1=system.v1,
        v2=system.v2,
        sigma2_r=system.sigma2_r,
        sigma2_1=system.sigma2_1,
        sigma2_2=system.sigma2_2,
        reciprocal=system.reciprocal,
        p1max=power.p1max,
        p2max=power.p2max,
        prmax=power.prmax,
        **extra,
    )


@app.get("/healthz", response_model=HealthResponse)
def healthz() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    cfg = _config(req.system, req.power, seed=req.seed, eps=req.eps)
    try:
        res = run_single(cfg, trial=req.trial)
    except TwrError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    sol = res.solution
    return SolveResponse(
        status=sol.status,
        subcase=sol.subcase.label,
        pair_i=sol.subcase.i or 0,
        pair_j=sol.subcase.j or 0,
        iterations=sol.iterations,
        rates={
            "R_tw": sol.rates.R_tw,
            "R_ma": sol.rates.R_ma,
            "Rhat_r1": sol.rates.Rhat_r1,
            "Rhat_r2": sol.rates.Rhat_r2,
            "Rbar_1r": sol.rates.Rbar_1r,
            "Rbar_2r": sol.rates.Rbar_2r,
        },
        powers=sol.powers,
        levels={
            "inv_mu1": sol.levels.inv_mu1,
            "inv_mu2": sol.levels.inv_mu2,
            "inv_mu_ma": sol.levels.inv_mu_ma,
            "inv_lambda1": sol.relay.inv_lambda1,
            "inv_lambda2": sol.relay.inv_lambda2,
        },
        D1=ComplexMatrix.wrap(sol.D.D1),
        D2=ComplexMatrix.wrap(sol.D.D2),
        B1=ComplexMatrix.wrap(sol.relay.B1),
        B2=ComplexMatrix.wrap(sol.relay.B2),
        trace=[TraceRow(**row) for row in res.trace_rows],
        summary=res.summary,
    )


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    axes = {k: list(v) for k, v in req.axes.items()}
    cfg = _config(
        req.system,
        req.power,
        seed=req.seed,
        trials=req.trials,
        eps=req.eps,
        jobs=req.jobs,
        pairing=req.pairing,
        sweep_axes=axes,
    )
    try:
        cells = run_sweep(cfg)
    except TwrError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return SweepResponse(
        cells=[
            SweepCellModel(
                coords={k: float(v) for k, v in c.coords.items()},
                counts=c.counts,
                failures=c.failures,
                mean_Rtw=c.mean_Rtw,
                mean_power=c.mean_power,
                trials=c.trials,
            )
            for c in cells
        ]
    )


@app.post("/oracle", response_model=OracleResponse)
def oracle(req: OracleRequest) -> OracleResponse:
    cfg = _config(
        req.system, req.power, seed=req.seed, trials=req.trials, eps=req.eps, steps=req.steps
    )
    try:
        rows, rate = run_oracle_suite(cfg)
    except TwrError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return OracleResponse(
        rows=[
            OracleRowModel(
                trial=r.trial,
                seed=r.seed,
                Rtw_alg=r.Rtw_alg,
                Rtw_oracle=r.Rtw_oracle,
                dP=r.dP,
                passed=r.passed,
            )
            for r in rows
        ],
        pass_rate=rate,
    )
