"""Grammar, diagnostics, formatter stability, and builder equivalence."""

import math

import numpy as np
import pytest

from icnl import dsl
from icnl.dsl import DslDiagnosticsError, check, format_doc, parse, parse_expression
from icnl.errors import UnknownParameterError
from icnl.experiments import (
    build_bell,
    build_frustrated,
    build_frustrated_single_pump,
    build_object_id,
    golden_sources,
    single_pump_initial,
)
from icnl.gates import simulate
from icnl.runner import elaborate


def test_golden_corpus_round_trips_byte_stable():
    for name, text in golden_sources().items():
        doc = parse(text)
        assert format_doc(doc) == text, name
        assert parse(format_doc(doc)) == doc, name


def test_formatter_idempotence_on_messy_input():
    messy = """
    # a comment
    paths   s1 i1   s2 i2

    param PHI = 2*pi/ 8   # trailing comment
    nl s1    i1
    phase i1 PHI
    align s1 s2
    align i1 i2
    nl s2 i2
    """
    doc = parse(messy)
    once = format_doc(doc)
    assert format_doc(parse(once)) == once


def test_frustrated_file_has_five_gate_statements():
    doc = parse(golden_sources()["frustrated.icl"])
    assert len(doc.gates) == 5


def test_parse_rejects_arity_error():
    diags = check("paths s1 i1\nnl s1\n")
    assert any(d.message == "nl requires 2 paths" for d in diags)
    assert diags[0].line == 2


def test_parse_rejects_empty_file():
    diags = check("")
    assert [d.message for d in diags] == ["missing paths declaration"]
    diags = check("# only a comment\n")
    assert [d.message for d in diags] == ["missing paths declaration"]


def test_diagnostics_catalog():
    cases = {
        "paths a\npaths b\n": "duplicate paths declaration",
        "paths a a\n": "duplicate path name 'a'",
        "paths a\nnl a b\n": "undeclared path 'b'",
        "paths a b\nphase a THETA\n": "unknown parameter 'THETA'",
        "paths a b\nparam X = 1\nparam X = 2\n": "duplicate parameter 'X'",
        "paths a b\nobject a b 2 0\n": "transmittance out of range [0, 1]: 2.0",
        "paths a b\nmeasure\n": "measure requires at least one path",
        "paths a b\ntrace_keep\n": "trace_keep requires at least one path",
        "paths a\nphase a 1 1\n": "trailing input after statement",
        "paths a\nhwp a $\n": "unexpected character '$'",
        "paths a b\nparam X = 1\nsweep X 0 1 0\n": "sweep count must be a positive integer, got 0.0",
        "paths a\nunitary a [[(1, 0)], [(0, 0)]]\n": "matrix row must have 2 entries, got 1",
        "paths a\ninit |H>\ninit |0>\n": "duplicate init statement",
        "paths a b\ninit |HHH>\n": "occupation needs one symbol per path (2), got 3",
        "paths a\ninit |X>\n": "invalid occupation symbol 'X'",
    }
    for source, expected in cases.items():
        diags = check(source)
        assert any(d.message == expected for d in diags), (source, [d.message for d in diags])


def test_diagnostics_carry_position_token_and_hint():
    diags = check("paths s1 i1\nnl s1\n")
    d = diags[0]
    assert (d.line, d.col) == (2, 6)
    assert d.expected == "path name"
    diags = check("paths a\nphase a +\n")
    assert diags[0].expected is not None


def test_parser_recovers_and_reports_multiple_errors():
    diags = check("paths a b\nnl a\nbogus a\nhwp c\n")
    assert [d.line for d in diags] == [2, 3, 4]


def test_parse_raises_with_diagnostics():
    with pytest.raises(DslDiagnosticsError) as err:
        parse("paths a\nnl a a\n")
    assert err.value.diagnostics


def test_expression_grammar():
    assert parse_expression("2 * pi / 4") == math.pi / 2
    assert parse_expression("-(1 + 1) / 4") == -0.5
    assert parse_expression("pi") == math.pi
    assert parse_expression("X + 1", {"X": 2.0}) == 3.0
    with pytest.raises(DslDiagnosticsError):
        parse_expression("2 +")
    with pytest.raises(DslDiagnosticsError):
        parse_expression("nope")


def test_unitary_presets_and_matrices():
    doc = parse(
        "paths a b\n"
        "unitary a X\n"
        "unitary a H\n"
        "unitary a [[(0, 0), (1, 0)], [(1, 0), (0, 0)]]\n"
        "unitary a b householder (1, 0) (0, 0) (0, 0) (0, 0)\n"
    )
    prog = elaborate(doc)
    kinds = [op.kind for op in prog.circuit.ops]
    assert kinds == ["unitary", "unitary", "unitary", "unitary2"]
    # householder of e0 onto itself is the identity
    assert np.allclose(np.asarray(prog.circuit.ops[3].params["matrix"]), np.eye(4))


def test_unitary_non_unitary_matrix_diagnostic():
    diags = check("paths a\nunitary a [[(1, 0), (0, 0)], [(0, 0), (2, 0)]]\n")
    assert any("not unitary" in d.message for d in diags)


def test_householder_norm_diagnostic():
    diags = check("paths a b\nunitary a b householder (1, 0) (1, 0) (0, 0) (0, 0)\n")
    assert any("unit norm" in d.message for d in diags)


def test_builder_emitted_files_reproduce_in_memory_circuits():
    sources = golden_sources()
    prog = elaborate(parse(sources["frustrated.icl"]))
    assert prog.circuit == build_frustrated(math.pi)

    prog = elaborate(parse(sources["bell.icl"]))
    assert prog.circuit == build_bell()

    prog = elaborate(parse(sources["object_id.icl"]))
    assert prog.circuit == build_object_id(0.7, 0.0)

    prog = elaborate(parse(sources["frustrated_single_pump.icl"]))
    assert prog.circuit == build_frustrated_single_pump(math.pi)
    assert prog.initial.terms == single_pump_initial().terms


def test_elaborated_golden_files_run_like_builders():
    sources = golden_sources()
    for name, builder in [
        ("frustrated.icl", lambda: simulate(build_frustrated(math.pi))),
        ("bell.icl", lambda: simulate(build_bell())),
        ("object_id.icl", lambda: simulate(build_object_id(0.7, 0.0))),
    ]:
        prog = elaborate(parse(sources[name]))
        assert simulate(prog.circuit, prog.initial).terms == builder().terms


def test_overrides():
    doc = parse(golden_sources()["frustrated.icl"])
    prog = elaborate(doc, {"PHI": "pi / 2"})
    assert prog.env["PHI"] == math.pi / 2
    prog = elaborate(doc, {"PHI": 1.25})
    assert prog.env["PHI"] == 1.25
    with pytest.raises(UnknownParameterError):
        elaborate(doc, {"THETA": "1"})


def test_override_can_invalidate_gate_parameter():
    doc = parse(golden_sources()["object_id.icl"])
    with pytest.raises(DslDiagnosticsError):
        elaborate(doc, {"T": "2"})


def test_param_referencing_earlier_param():
    doc = parse("paths a\nparam A = pi\nparam B = A / 2\nphase a B\n")
    assert elaborate(doc).env["B"] == math.pi / 2


def test_use_before_declaration_is_rejected():
    diags = check("paths a\nphase a LATER\nparam LATER = 1\n")
    assert any(d.message == "unknown parameter 'LATER'" for d in diags)


def test_init_statement_round_trip():
    text = golden_sources()["frustrated_single_pump.icl"]
    doc = parse(text)
    assert doc.init == ("H00000", "000H00")
    assert "init |H00000> + |000H00>" in format_doc(doc)


def test_sweep_directive():
    doc = parse(golden_sources()["frustrated.icl"])
    assert doc.sweep is not None
    assert doc.sweep.name == "PHI"
    assert doc.sweep.count == 65


def test_render_diagnostic_color_modes():
    d = dsl.Diagnostic(3, 7, "boom", token="x", expected="path name")
    plain = d.render("f.icl", color=False)
    assert plain.startswith("f.icl:3:7: error: boom")
    assert "expected path name" in plain and "got 'x'" in plain
    assert "\x1b[" in d.render("f.icl", color=True)
