"""Command-line front end.

Subcommands: ``run`` (execute a circuit file), ``sweep`` (parameter scan),
``check`` (parse only), ``examples`` (write the golden circuit files) and
``serve`` (start the HTTP service). Exit codes: 0 success, 1 diagnostics,
2 runtime errors. Diagnostics honor ICNL_COLOR={auto,never,always}.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import __version__, dsl, runner, service
from .errors import IcnlError
from .experiments import golden_sources

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_RUNTIME = 2


def _use_color() -> bool:
    mode = os.environ.get("ICNL_COLOR", "auto").lower()
    if mode == "always":
        return True
    if mode == "never":
        return False
    return sys.stderr.isatty()


def _print_diagnostics(diags, filename: str) -> None:
    color = _use_color()
    for d in diags:
        print(d.render(filename=filename, color=color), file=sys.stderr)


def _parse_overrides(pairs: list[str]) -> dict[str, str]:
    overrides = {}
    for item in pairs:
        name, sep, expr = item.partition("=")
        if not sep or not name:
            raise IcnlError(f"--set expects NAME=EXPR, got {item!r}")
        overrides[name.strip()] = expr.strip()
    return overrides


def _fmt_float(x: float) -> str:
    return f"{x:.12g}"


def _render_run_text(resp: service.RunResponse) -> str:
    out = [f"paths: {' '.join(resp.paths)}"]
    if resp.kappa_sector:
        out.append("pair sector (coefficient of -i*kappa):")
        for amp in resp.kappa_sector:
            out.append(f"  |{amp.ket}>  {amp.re:.12g}{amp.im:+.12g}i")
    else:
        out.append("pair sector: empty")
    out.append(f"pair coefficient: {_fmt_float(resp.pair_coefficient)}")
    if resp.detectors:
        for path, p in resp.detectors.items():
            out.append(f"detector {path}: {_fmt_float(p)}")
    if resp.density is not None:
        out.append(f"conditional density over {resp.density.basis}:")
        for re_row, im_row in zip(resp.density.re, resp.density.im):
            out.append(
                "  [" + ", ".join(f"{r:.6g}{i:+.6g}i" for r, i in zip(re_row, im_row)) + "]"
            )
    if resp.oracle is not None:
        o = resp.oracle
        out.append(
            f"oracle: max deviation {o.max_deviation:.3e} at g={o.g} alpha={o.alpha} "
            f"(bound {o.bound_coefficient}*|g*alpha|^2, {'ok' if o.passed else 'FAILED'})"
        )
    return "\n".join(out) + "\n"


def _render_run_csv(resp: service.RunResponse) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["record", "key", "re", "im"])
    for amp in resp.kappa_sector:
        writer.writerow(["amplitude", amp.ket, repr(amp.re), repr(amp.im)])
    writer.writerow(["pair_coefficient", "", repr(resp.pair_coefficient), ""])
    for path, p in (resp.detectors or {}).items():
        writer.writerow(["detector", path, repr(p), ""])
    if resp.density is not None:
        basis = resp.density.basis
        for r, row_label in enumerate(basis):
            for c, col_label in enumerate(basis):
                writer.writerow(
                    [
                        "density",
                        f"{row_label}|{col_label}",
                        repr(resp.density.re[r][c]),
                        repr(resp.density.im[r][c]),
                    ]
                )
    return buf.getvalue()


def _render_sweep_text(resp: service.SweepResponse) -> str:
    detector_names = sorted({k for row in resp.rows for k in row.detectors})
    head = [resp.param, "pair_coefficient", *[f"det_{d}" for d in detector_names]]
    lines = ["  ".join(head)]
    for row in resp.rows:
        cells = [_fmt_float(row.value), _fmt_float(row.pair_coefficient)]
        cells += [_fmt_float(row.detectors.get(d, float("nan"))) for d in detector_names]
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"


def _render_sweep_csv(resp: service.SweepResponse) -> str:
    detector_names = sorted({k for row in resp.rows for k in row.detectors})
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([resp.param, "pair_coefficient", *[f"det_{d}" for d in detector_names]])
    for row in resp.rows:
        writer.writerow(
            [repr(row.value), repr(row.pair_coefficient)]
            + [repr(row.detectors.get(d, float("nan"))) for d in detector_names]
        )
    return buf.getvalue()


def _cmd_run(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    request = service.RunRequest(
        source=source,
        overrides=_parse_overrides(args.set),
        density=args.density.split(",") if args.density else None,
        oracle=service.OracleRequest(g=args.g, alpha=args.alpha) if args.oracle else None,
    )
    resp = service.do_run(request)
    if args.format == "json":
        print(json.dumps(resp.model_dump(exclude_none=True), indent=2))
    elif args.format == "csv":
        print(_render_run_csv(resp), end="")
    else:
        print(_render_run_text(resp), end="")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    values = None
    if args.param is not None:
        if args.steps < 1:
            raise IcnlError("--steps must be at least 1")
        values = runner.grid_values(
            dsl.parse_expression(args.start), dsl.parse_expression(args.stop), args.steps
        )
    request = service.SweepRequest(
        source=source,
        overrides=_parse_overrides(args.set),
        param=args.param,
        values=values,
    )
    resp = service.do_sweep(request)
    if args.format == "json":
        print(json.dumps(resp.model_dump(), indent=2))
    elif args.format == "csv":
        print(_render_sweep_csv(resp), end="")
    else:
        print(_render_sweep_text(resp), end="")
    return EXIT_OK


def _cmd_check(args) -> int:
    status = EXIT_OK
    for name in args.files:
        diags = dsl.check(Path(name).read_text(encoding="utf-8"))
        if diags:
            _print_diagnostics(diags, name)
            status = EXIT_DIAGNOSTICS
        else:
            print(f"{name}: ok")
    return status


def _cmd_examples(args) -> int:
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    for name, text in golden_sources().items():
        (target / name).write_text(text, encoding="utf-8")
        print(target / name)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("icnl.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icnl",
        description="Simulate photon-pair interference circuits at first order.",
    )
    parser.add_argument("--version", action="version", version=f"icnl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a circuit file")
    run.add_argument("file")
    run.add_argument("--set", action="append", default=[], metavar="NAME=EXPR")
    run.add_argument("--format", choices=("text", "json", "csv"), default="text")
    run.add_argument("--density", metavar="P1,P2,...", default=None)
    run.add_argument("--oracle", action="store_true", help="cross-check with the Fock oracle")
    run.add_argument("--g", type=float, default=1e-2, help="oracle coupling")
    run.add_argument("--alpha", type=float, default=1.0, help="oracle pump amplitude")
    run.set_defaults(func=_cmd_run)

    swp = sub.add_parser("sweep", help="scan a parameter over a grid")
    swp.add_argument("file")
    swp.add_argument("--set", action="append", default=[], metavar="NAME=EXPR")
    swp.add_argument("--format", choices=("text", "json", "csv"), default="text")
    swp.add_argument("--param", default=None, help="override the document's sweep directive")
    swp.add_argument("--start", default="0", help="grid start (expression)")
    swp.add_argument("--stop", default="2 * pi", help="grid stop (expression)")
    swp.add_argument("--steps", type=int, default=65, help="number of grid points")
    swp.set_defaults(func=_cmd_sweep)

    chk = sub.add_parser("check", help="parse files and report diagnostics")
    chk.add_argument("files", nargs="+")
    chk.set_defaults(func=_cmd_check)

    ex = sub.add_parser("examples", help="write the golden circuit files")
    ex.add_argument("dir", nargs="?", default=".")
    ex.set_defaults(func=_cmd_examples)

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    filename = getattr(args, "file", None) or "<input>"
    try:
        return args.func(args)
    except dsl.DslDiagnosticsError as exc:
        _print_diagnostics(exc.diagnostics, filename)
        return EXIT_DIAGNOSTICS
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except IcnlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
