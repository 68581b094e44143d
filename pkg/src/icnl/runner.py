"""Elaborate parsed documents into circuits and execute them.

Parameter expressions are evaluated here, after command-line overrides are
merged in, so a swept or overridden document is simply re-elaborated per
value. Results carry the one-pair amplitudes, the pair-probability
coefficient and whatever analysis the document (or caller) asked for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import analysis, dsl
from .analysis import ConditionalDensity, SweepRow
from .errors import EmptyKappaSectorError, GateParameterError, UnknownParameterError
from .fock import FirstOrderReport, compare_first_order
from .gates import Circuit, GateApplication, simulate
from .linalg import completion_unitary, matrix_rows
from .perturb import KetState, make_state, vacuum_state

_PRESET_MATRICES = {
    "X": ((0j, 1 + 0j), (1 + 0j, 0j)),
    "H": matrix_rows([[2**-0.5, 2**-0.5], [2**-0.5, -(2**-0.5)]]),
}

# Generous cap for oracle runs started from the CLI/service; the per-call
# dense factors stay small either way.
ORACLE_DIM_LIMIT = 1 << 18


@dataclass(frozen=True)
class OracleOptions:
    g: float = 1e-2
    alpha: float = 1.0


@dataclass(frozen=True)
class Program:
    """A document bound to concrete parameter values."""

    doc: dsl.CircuitDoc
    env: dict[str, float]
    circuit: Circuit
    initial: KetState


def resolve_env(doc: dsl.CircuitDoc, overrides: Mapping[str, float | str] | None) -> dict:
    env: dict[str, float] = {}
    for decl in doc.params:
        env[decl.name] = decl.expr.evaluate(env)
    for name, value in (overrides or {}).items():
        if name not in env:
            raise UnknownParameterError(
                f"override names unknown parameter {name!r} (have {sorted(env)})"
            )
        env[name] = (
            dsl.parse_expression(value, env) if isinstance(value, str) else float(value)
        )
    return env


def _gate_to_application(stmt: dsl.GateStmt, env: Mapping[str, float]) -> GateApplication:
    kind = stmt.kind
    if kind in ("nl", "align", "bs", "hwp", "nl1p"):
        params = {"g": 1.0 + 0j} if kind == "nl1p" else {}
        if kind == "bs":
            params = {"convention": "hadamard"}
        return GateApplication(kind, stmt.paths, params)
    if kind == "phase":
        return GateApplication("phase", stmt.paths, {"phi": stmt.args[0].evaluate(env)})
    if kind == "object":
        t = stmt.args[0].evaluate(env)
        gamma = stmt.args[1].evaluate(env)
        return GateApplication("object", stmt.paths, {"t": float(t), "gamma": float(gamma)})
    if kind == "unitary":
        arg = stmt.args[0]
        if isinstance(arg, dsl.PresetArg):
            matrix = _PRESET_MATRICES[arg.name]
        elif isinstance(arg, dsl.HouseholderArg):
            matrix = matrix_rows(completion_unitary(arg.evaluate(env)))
        else:
            matrix = arg.evaluate(env)
        gate_kind = "unitary" if len(stmt.paths) == 1 else "unitary2"
        return GateApplication(gate_kind, stmt.paths, {"matrix": matrix})
    raise GateParameterError(f"cannot elaborate gate kind {kind!r}")


def elaborate(
    doc: dsl.CircuitDoc, overrides: Mapping[str, float | str] | None = None
) -> Program:
    """Bind parameters and build the executable circuit and initial state.

    Validation that depends on parameter values (transmittance range,
    matrix unitarity) reruns here, since overrides may change them.
    """
    env = resolve_env(doc, overrides)
    try:
        ops = tuple(_gate_to_application(stmt, env) for stmt in doc.gates)
        circuit = Circuit(doc.paths, ops)
    except (GateParameterError, ZeroDivisionError) as exc:
        raise dsl.DslDiagnosticsError(
            [dsl.Diagnostic(0, 0, f"invalid gate parameter after overrides: {exc}")]
        ) from exc
    if doc.init:
        initial = make_state(doc.paths, {occ: 1.0 for occ in doc.init})
    else:
        initial = vacuum_state(doc.paths)
    return Program(doc, env, circuit, initial)


@dataclass(frozen=True)
class RunResult:
    paths: tuple[str, ...]
    kappa: tuple[tuple[str, complex], ...]
    pair_coefficient: float
    detectors: dict[str, float] | None = None
    density: ConditionalDensity | None = None
    oracle: FirstOrderReport | None = None


def run_program(
    prog: Program,
    density_paths: Sequence[str] | None = None,
    oracle: OracleOptions | None = None,
) -> RunResult:
    final = simulate(prog.circuit, prog.initial)
    kappa = tuple(sorted(final.kappa_amplitudes().items()))
    coefficient = analysis.pair_probability_coefficient(final)

    detectors = None
    if prog.doc.measure:
        try:
            detectors = {
                p: analysis.occupancy_probability(final, p) for p in prog.doc.measure
            }
        except EmptyKappaSectorError:
            detectors = None

    keep = tuple(density_paths) if density_paths else prog.doc.trace_keep
    density = analysis.conditional_density(final, keep) if keep else None

    report = None
    if oracle is not None:
        report = compare_first_order(
            prog.circuit, oracle.g, oracle.alpha, dim_limit=ORACLE_DIM_LIMIT
        )
    return RunResult(final.paths, kappa, coefficient, detectors, density, report)


def run_source(
    text: str,
    overrides: Mapping[str, float | str] | None = None,
    density_paths: Sequence[str] | None = None,
    oracle: OracleOptions | None = None,
) -> RunResult:
    return run_program(elaborate(dsl.parse(text), overrides), density_paths, oracle)


@dataclass(frozen=True)
class DocTemplate:
    """Sweep template backed by a document plus fixed base overrides."""

    doc: dsl.CircuitDoc
    base: dict[str, float | str]

    @property
    def param_names(self):
        return {decl.name for decl in self.doc.params}

    def run(self, overrides: Mapping[str, float]) -> KetState:
        merged: dict[str, float | str] = dict(self.base)
        merged.update(overrides)
        prog = elaborate(self.doc, merged)
        return simulate(prog.circuit, prog.initial)


@dataclass(frozen=True)
class SweepResult:
    param: str
    rows: tuple[SweepRow, ...]
    detectors: tuple[str, ...]


def grid_values(start: float, stop: float, count: int) -> list[float]:
    """Inclusive linear grid with exactly ``count`` points."""
    if count == 1:
        return [start]
    step = (stop - start) / (count - 1)
    return [start + k * step for k in range(count)]


def sweep_source(
    text: str,
    overrides: Mapping[str, float | str] | None = None,
    param: str | None = None,
    values: Sequence[float] | None = None,
) -> SweepResult:
    """Sweep a document over its declared grid or an explicit one.

    ``param``/``values`` take precedence; otherwise the document must carry
    a ``sweep`` directive.
    """
    doc = dsl.parse(text)
    env = resolve_env(doc, overrides)
    if param is None:
        if doc.sweep is None:
            raise UnknownParameterError(
                "document has no sweep directive; pass an explicit parameter and grid"
            )
        param = doc.sweep.name
        values = grid_values(
            doc.sweep.start.evaluate(env), doc.sweep.stop.evaluate(env), doc.sweep.count
        )
    elif values is None:
        raise UnknownParameterError("an explicit sweep needs both parameter and grid")
    template = DocTemplate(doc, dict(overrides or {}))
    rows = analysis.sweep(template, param, values, detectors=doc.measure)
    return SweepResult(param, tuple(rows), doc.measure)
