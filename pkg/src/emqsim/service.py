"""HTTP service exposing the simulation toolkit.

A small FastAPI application wrapping the experiments layer; the CLI talks
to it in-process, and the same app can be served standalone::

    uvicorn emqsim.service:app

Every compute endpoint accepts a JSON body with the experiment-config
schema (the YAML file schema, as JSON).  Responses carry both structured
series data and the rendered CSV/QASM text so clients write artifacts
byte-identically to a server-side rendering.  Infinite coherence times are
encoded as the string ``"inf"`` because JSON has no infinity literal.

Error mapping: invalid configs return 400 with ``error.type = "config"``;
numerical-integrity aborts (including calibration failures) return 500
with ``error.type = "integrity"``.
"""

from __future__ import annotations

import math
from typing import Literal, Optional, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .devsim.calibration import device_calibration
from .errors import ConfigError, IntegrityError
from .experiments import (
    ExperimentConfig,
    SweepSpec,
    TimeSeries,
    compile_circuit,
    csv_text,
    fmt_float,
    run_experiment,
    sweep,
)
from .qasm import export_qasm
from .trotter import NativeSet, format_circuit, relower

app = FastAPI(title="emqsim", version=__version__)


class HealthResponse(BaseModel):
    status: str
    version: str


class SeriesPayload(BaseModel):
    """JSON form of a :class:`~emqsim.experiments.TimeSeries`."""

    t: list[float]
    value: list[float]
    stderr: Optional[list[float]] = None
    backend: str
    model: str
    n: int
    t2: str
    shots: int
    seed: int
    diagnostics: dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_series(cls, ts: TimeSeries) -> "SeriesPayload":
        return cls(
            t=[float(x) for x in ts.t],
            value=[float(x) for x in ts.value],
            stderr=None if ts.stderr is None else [float(x) for x in ts.stderr],
            backend=ts.backend,
            model=ts.model,
            n=ts.n,
            t2=fmt_float(ts.t2),
            shots=ts.shots,
            seed=ts.seed,
            diagnostics=dict(ts.diagnostics),
        )


class RunResponse(BaseModel):
    series: SeriesPayload
    csv: str


class SweepRequest(BaseModel):
    config: ExperimentConfig
    axis: Literal["steps", "t2"]
    values: list[Union[float, str]] = Field(min_length=1)


class SweepResponse(BaseModel):
    series: list[SeriesPayload]
    csv: str


class CompileResponse(BaseModel):
    listing: str
    native_set: str
    n_gates: int


class QasmResponse(BaseModel):
    qasm: str


class CalibrateResponse(BaseModel):
    """Exchange and drive calibration summary for the configured device."""

    j_hz: float
    j_analytic_hz: float
    t_sqiswap: float
    zeta1: float
    zeta2: float
    zeta12: float
    residual: float
    stark_hz: list[float]


@app.exception_handler(ConfigError)
async def _config_error(_request: Request, exc: ConfigError) -> JSONResponse:
    return JSONResponse(
        status_code=400, content={"error": {"type": "config", "message": str(exc)}}
    )


@app.exception_handler(RequestValidationError)
async def _body_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
    problems = "; ".join(
        ".".join(str(p) for p in err["loc"] if p != "body") + f": {err['msg']}"
        for err in exc.errors()
    )
    return JSONResponse(
        status_code=400,
        content={"error": {"type": "config", "message": f"invalid config: {problems}"}},
    )


@app.exception_handler(IntegrityError)
async def _integrity_error(_request: Request, exc: IntegrityError) -> JSONResponse:
    return JSONResponse(
        status_code=500, content={"error": {"type": "integrity", "message": str(exc)}}
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/run", response_model=RunResponse)
def run(cfg: ExperimentConfig) -> RunResponse:
    series = run_experiment(cfg)
    return RunResponse(series=SeriesPayload.from_series(series), csv=csv_text(series))


def _parse_axis_value(axis: str, value: Union[float, str]) -> float:
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError as exc:
            raise ConfigError(f"sweep value {value!r} is not a number") from exc
    if axis == "steps":
        if value != int(value) or value < 1:
            raise ConfigError(f"steps sweep values must be positive integers, got {value}")
        return float(value)
    if not value > 0:
        raise ConfigError(f"t2 sweep values must be positive, got {value}")
    return float(value)


@app.post("/sweep", response_model=SweepResponse)
def run_sweep(req: SweepRequest) -> SweepResponse:
    values = [_parse_axis_value(req.axis, v) for v in req.values]
    series = sweep(req.config, req.axis, values)
    return SweepResponse(
        series=[SeriesPayload.from_series(ts) for ts in series], csv=csv_text(series)
    )


@app.post("/compile", response_model=CompileResponse)
def compile_listing(cfg: ExperimentConfig) -> CompileResponse:
    circuit = compile_circuit(cfg)
    return CompileResponse(
        listing=format_circuit(circuit),
        native_set=circuit.native_set.value,
        n_gates=len(circuit.gates),
    )


@app.post("/export-qasm", response_model=QasmResponse)
def export(cfg: ExperimentConfig) -> QasmResponse:
    circuit = relower(compile_circuit(cfg), NativeSet.CNOT_SET)
    return QasmResponse(qasm=export_qasm(circuit))


@app.post("/calibrate", response_model=CalibrateResponse)
def calibrate(cfg: ExperimentConfig) -> CalibrateResponse:
    spec = cfg.device.to_spec(t2_override=cfg.t2)
    cal = device_calibration(spec)
    two_pi = 2.0 * math.pi
    return CalibrateResponse(
        j_hz=cal.exchange.j_fit / two_pi,
        j_analytic_hz=cal.exchange.j_analytic / two_pi,
        t_sqiswap=cal.exchange.t_sqiswap,
        zeta1=cal.exchange.zeta1,
        zeta2=cal.exchange.zeta2,
        zeta12=cal.exchange.zeta12,
        residual=cal.exchange.residual,
        stark_hz=[s / two_pi for s in cal.drive.stark],
    )
