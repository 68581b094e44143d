"""HTTP service wrapping the simulator, and the schema it publishes.

The pydantic response models double as the stable JSON schema of the
command-line front end: the CLI builds the same models in-process and
serializes them, so output validated here is valid there and vice versa.

Run with ``icnl serve`` or ``uvicorn icnl.service:app``.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, dsl, runner
from .errors import IcnlError
from .experiments import golden_sources


class KappaAmplitude(BaseModel):
    ket: str
    re: float
    im: float


class DensityOut(BaseModel):
    basis: list[str]
    re: list[list[float]]
    im: list[list[float]]


class OracleOut(BaseModel):
    g: float
    alpha: float
    max_deviation: float
    bound_coefficient: float
    passed: bool
    norm_drift: float


class RunRequest(BaseModel):
    source: str = Field(description="circuit document text")
    overrides: dict[str, str] = Field(default_factory=dict, description="NAME -> expression")
    density: Optional[list[str]] = Field(default=None, description="paths to keep")
    oracle: Optional[OracleRequest] = None


class OracleRequest(BaseModel):
    g: float = 1e-2
    alpha: float = 1.0


class RunResponse(BaseModel):
    paths: list[str]
    kappa_sector: list[KappaAmplitude]
    pair_coefficient: float
    density: Optional[DensityOut] = None
    detectors: Optional[dict[str, float]] = None
    oracle: Optional[OracleOut] = None


class DiagnosticOut(BaseModel):
    line: int
    col: int
    message: str
    token: Optional[str] = None
    expected: Optional[str] = None


class CheckRequest(BaseModel):
    source: str


class CheckResponse(BaseModel):
    ok: bool
    diagnostics: list[DiagnosticOut]


class SweepRequest(BaseModel):
    source: str
    overrides: dict[str, str] = Field(default_factory=dict)
    param: Optional[str] = None
    values: Optional[list[float]] = None


class SweepRowOut(BaseModel):
    value: float
    pair_coefficient: float
    detectors: dict[str, float] = Field(default_factory=dict)


class SweepResponse(BaseModel):
    param: str
    rows: list[SweepRowOut]


class ExamplesResponse(BaseModel):
    files: dict[str, str]


RunRequest.model_rebuild()


def _diag_out(d: dsl.Diagnostic) -> DiagnosticOut:
    return DiagnosticOut(
        line=d.line, col=d.col, message=d.message, token=d.token, expected=d.expected
    )


def run_result_to_response(result: runner.RunResult) -> RunResponse:
    density = None
    if result.density is not None:
        density = DensityOut(
            basis=list(result.density.basis),
            re=result.density.matrix.real.tolist(),
            im=result.density.matrix.imag.tolist(),
        )
    oracle = None
    if result.oracle is not None:
        rep = result.oracle
        oracle = OracleOut(
            g=abs(rep.g),
            alpha=abs(rep.alpha),
            max_deviation=rep.max_deviation,
            bound_coefficient=rep.bound_coefficient,
            passed=rep.passed,
            norm_drift=rep.norm_drift,
        )
    return RunResponse(
        paths=list(result.paths),
        kappa_sector=[
            KappaAmplitude(ket=ket, re=amp.real, im=amp.imag) for ket, amp in result.kappa
        ],
        pair_coefficient=result.pair_coefficient,
        density=density,
        detectors=result.detectors,
        oracle=oracle,
    )


def do_run(request: RunRequest) -> RunResponse:
    oracle = None
    if request.oracle is not None:
        oracle = runner.OracleOptions(request.oracle.g, request.oracle.alpha)
    result = runner.run_source(
        request.source,
        overrides=request.overrides,
        density_paths=request.density,
        oracle=oracle,
    )
    return run_result_to_response(result)


def do_check(request: CheckRequest) -> CheckResponse:
    diags = dsl.check(request.source)
    return CheckResponse(ok=not diags, diagnostics=[_diag_out(d) for d in diags])


def do_sweep(request: SweepRequest) -> SweepResponse:
    result = runner.sweep_source(
        request.source,
        overrides=request.overrides,
        param=request.param,
        values=request.values,
    )
    return SweepResponse(
        param=result.param,
        rows=[
            SweepRowOut(
                value=row.value,
                pair_coefficient=row.pair_coefficient,
                detectors=row.detectors,
            )
            for row in result.rows
        ],
    )


def do_examples() -> ExamplesResponse:
    return ExamplesResponse(files=golden_sources())


def build_app() -> FastAPI:
    app = FastAPI(title="icnl", version=__version__)

    @app.exception_handler(dsl.DslDiagnosticsError)
    async def diagnostics_handler(_, exc: dsl.DslDiagnosticsError):
        return JSONResponse(
            status_code=422,
            content={
                "detail": "document has diagnostics",
                "diagnostics": [_diag_out(d).model_dump() for d in exc.diagnostics],
            },
        )

    @app.exception_handler(IcnlError)
    async def runtime_handler(_, exc: IcnlError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/run", response_model=RunResponse, response_model_exclude_none=True)
    def run(request: RunRequest):
        return do_run(request)

    @app.post("/check", response_model=CheckResponse)
    def check(request: CheckRequest):
        return do_check(request)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(request: SweepRequest):
        return do_sweep(request)

    @app.get("/examples", response_model=ExamplesResponse)
    def examples():
        return do_examples()

    return app


app = build_app()
