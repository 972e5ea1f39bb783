"""HTTP API wrapping the toolkit: simulate either model, compute reproduction
numbers, and run calibrations. Start with ``psir serve`` or point uvicorn at
``psir.service:app``."""

from __future__ import annotations

from typing import Literal, Optional, Union

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .calibrate import FitProblem, fit, simulate_observable
from .dataio import TimeSeries, moving_average, normalize_cases
from .errors import NumericError
from .integrate import IntegratorConfig, integrate, sample_at
from .model import (AGG_LABELS, AggParams, NetParams, Trajectory, agg_rhs,
                    chain_mobility, make_agg_initial, make_net_initial,
                    net_labels, net_rhs)
from .reproduction import r0_aggregated, r0_network


class AggParamsIn(BaseModel):
    beta: float = Field(ge=0)
    gamma: float = Field(gt=0)
    rho: float = Field(ge=0)
    alpha: float = Field(ge=0)
    beta_R: float = Field(ge=0)
    N: float = Field(default=1.0, gt=0)

    def to_params(self) -> AggParams:
        return AggParams(beta=self.beta, gamma=self.gamma, rho=self.rho,
                         alpha=self.alpha, beta_R=self.beta_R, N=self.N)


class IntegratorIn(BaseModel):
    method: Literal["fixed-rk4", "adaptive-rk45"] = "fixed-rk4"
    dt: float = Field(default=0.05, gt=0)
    rel_tol: float = Field(default=1e-8, gt=0)
    abs_tol: float = Field(default=1e-10, gt=0)
    max_steps: int = Field(default=10_000_000, ge=1)

    def to_config(self) -> IntegratorConfig:
        return IntegratorConfig(method=self.method, dt=self.dt,
                                rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                max_steps=self.max_steps)


class SimulateAggRequest(BaseModel):
    params: AggParamsIn
    I0: float = Field(gt=0)
    pI0: float = Field(gt=0)
    t_end: float
    integrator: IntegratorIn = IntegratorIn()
    sample_dt: Optional[float] = Field(default=None, gt=0)


class SimulateNetRequest(BaseModel):
    beta: float = Field(ge=0)
    gamma: float = Field(gt=0)
    mobility: Union[str, list[list[float]]]   # "chain:D:p" or explicit matrix
    populations: Optional[list[float]] = None
    N: float = Field(default=1.0, gt=0)       # used when populations is omitted
    seed_district: int = Field(default=1, ge=1)
    seed_size: float = Field(gt=0)
    t_end: float
    integrator: IntegratorIn = IntegratorIn()
    sample_dt: Optional[float] = Field(default=None, gt=0)


class TrajectoryOut(BaseModel):
    times: list[float]
    columns: list[str]
    states: list[list[float]]


class R0AggRequest(BaseModel):
    params: AggParamsIn


class R0AggResponse(BaseModel):
    r0: float
    r_inf: float


class R0NetRequest(BaseModel):
    beta: float = Field(ge=0)
    gamma: float = Field(gt=0)
    mobility: Union[str, list[list[float]]]
    populations: Optional[list[float]] = None
    N: float = Field(default=1.0, gt=0)


class R0NetResponse(BaseModel):
    r0: float


class SeriesIn(BaseModel):
    times: list[float]
    values: list[float]


class FitRequest(BaseModel):
    observed: SeriesIn
    observable: Literal["prevalence", "daily-incidence"]
    free: list[str]
    fixed: dict[str, float]
    init: dict[str, float] = {}
    window: int = Field(default=1, ge=1)
    population: float = Field(default=1.0, gt=0)
    detection_factor: float = Field(default=1.0, gt=0)
    integrator: IntegratorIn = IntegratorIn()


class FitResponse(BaseModel):
    params: dict[str, float]
    sse: float
    rmse: float
    iterations: int
    converged: bool
    fitted: list[float]


app = FastAPI(title="psir", version=__version__,
              description="Aggregated spatial-SIR simulation and calibration")


@app.exception_handler(ValueError)
async def _value_error(request, exc: ValueError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.exception_handler(NumericError)
async def _numeric_error(request, exc: NumericError):
    return JSONResponse(status_code=500, content={"detail": str(exc)})


def _mobility_matrix(value: Union[str, list[list[float]]]) -> np.ndarray:
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 3 or parts[0] != "chain":
            raise ValueError(f"mobility string must be 'chain:D:p', got {value!r}")
        return chain_mobility(int(parts[1]), float(parts[2]))
    return np.asarray(value, dtype=float)


def _net_params(beta, gamma, mobility, populations, N) -> NetParams:
    mob = _mobility_matrix(mobility)
    if populations is None:
        pops = np.full(mob.shape[0], N / mob.shape[0])
    else:
        pops = np.asarray(populations, dtype=float)
    return NetParams(beta=beta, gamma=gamma, populations=pops, mobility=mob)


def _trajectory_out(traj: Trajectory, columns, sample_dt) -> TrajectoryOut:
    if sample_dt is not None:
        t0, t1 = traj.times[0], traj.times[-1]
        times = np.arange(t0, t1 + 1e-9 * sample_dt, sample_dt)
        states = sample_at(traj, times)
    else:
        times, states = traj.times, traj.states
    return TrajectoryOut(times=times.tolist(), columns=list(columns),
                         states=states.tolist())


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/simulate/aggregated", response_model=TrajectoryOut)
def simulate_aggregated(req: SimulateAggRequest) -> TrajectoryOut:
    params = req.params.to_params()
    y0 = make_agg_initial(params.N, req.I0, req.pI0).to_array()
    traj = integrate(lambda t, y: agg_rhs(y, params), y0, 0.0, req.t_end,
                     req.integrator.to_config())
    return _trajectory_out(traj, AGG_LABELS, req.sample_dt)


@app.post("/simulate/network", response_model=TrajectoryOut)
def simulate_network(req: SimulateNetRequest) -> TrajectoryOut:
    params = _net_params(req.beta, req.gamma, req.mobility, req.populations,
                         req.N)
    y0 = make_net_initial(params, req.seed_district, req.seed_size).to_array()
    traj = integrate(lambda t, y: net_rhs(y, params), y0, 0.0, req.t_end,
                     req.integrator.to_config())
    return _trajectory_out(traj, net_labels(params.D), req.sample_dt)


@app.post("/r0/aggregated", response_model=R0AggResponse)
def r0_agg(req: R0AggRequest) -> R0AggResponse:
    params = req.params.to_params()
    return R0AggResponse(r0=r0_aggregated(params), r_inf=params.r_inf)


@app.post("/r0/network", response_model=R0NetResponse)
def r0_net(req: R0NetRequest) -> R0NetResponse:
    params = _net_params(req.beta, req.gamma, req.mobility, req.populations,
                         req.N)
    return R0NetResponse(r0=r0_network(params))


@app.post("/fit", response_model=FitResponse)
def run_fit(req: FitRequest) -> FitResponse:
    series = TimeSeries(times=np.array(req.observed.times),
                        values=np.array(req.observed.values))
    series = moving_average(series, req.window)
    series = normalize_cases(series, req.population, req.detection_factor)
    problem = FitProblem(observed=series, observable=req.observable,
                         free=tuple(req.free), fixed=dict(req.fixed),
                         init=dict(req.init),
                         integrator=req.integrator.to_config())
    result = fit(problem)
    p = result.params
    params = AggParams(beta=p["beta"], gamma=p["gamma"], rho=p["rho"],
                       alpha=p["alpha"], beta_R=p["beta_R"], N=p["N"])
    fitted = simulate_observable(params, p["pI0"], p["I0"], series.times,
                                 req.observable, problem.integrator)
    return FitResponse(params=p, sse=result.sse, rmse=result.rmse,
                       iterations=result.iterations,
                       converged=result.converged, fitted=fitted.tolist())
