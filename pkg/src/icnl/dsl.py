"""Circuit-description language: lexer, parser, and canonical formatter.

The grammar is line-oriented; ``#`` starts a comment. A document declares
its paths once, binds named parameters to pi-arithmetic expressions, then
lists gate statements and analysis directives::

    paths s1 i1 s2 i2
    param PHI = pi
    nl s1 i1
    phase i1 PHI
    align s1 s2
    align i1 i2
    nl s2 i2
    measure s2 i2
    sweep PHI 0 2 * pi 65

``init`` sets a non-vacuum initial state as a sum of occupation kets
(``init |H00000> + |000H00>``); ``unitary`` takes a row-major bracketed
matrix of ``(re, im)`` pairs, a named preset (``X``, ``H``) or a
``householder`` target column. ``align a b`` lowers to the two-qutrit swap.

Parsing never throws mid-file: every problem becomes a diagnostic with
line, column, the offending token and an expected-token hint, and the
parser resynchronizes at the next line. The formatter emits a canonical
form that re-parses to an identical document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .errors import IcnlError

KEYWORDS = frozenset(
    [
        "paths",
        "param",
        "init",
        "nl",
        "nl1p",
        "phase",
        "hwp",
        "unitary",
        "align",
        "bs",
        "object",
        "measure",
        "trace_keep",
        "sweep",
    ]
)

GATE_KEYWORDS = frozenset(
    ["nl", "nl1p", "phase", "hwp", "unitary", "align", "bs", "object"]
)

# (path count, scalar argument names) for the fixed-shape gates
GATE_SHAPES: dict[str, tuple[int, tuple[str, ...]]] = {
    "nl": (2, ()),
    "nl1p": (3, ()),
    "phase": (1, ("phase angle",)),
    "hwp": (1, ()),
    "align": (2, ()),
    "bs": (2, ()),
    "object": (2, ("transmittance", "object phase")),
}

PRESETS = ("X", "H")


@dataclass(frozen=True)
class Diagnostic:
    """One parse problem: position, message, offending token, expected hint."""

    line: int
    col: int
    message: str
    token: str | None = None
    expected: str | None = None

    def render(self, filename: str = "<input>", color: bool = False) -> str:
        label = "\x1b[1;31merror:\x1b[0m" if color else "error:"
        extra = ""
        if self.expected is not None:
            extra += f" (expected {self.expected}"
            extra += f", got {self.token!r})" if self.token is not None else ")"
        elif self.token is not None:
            extra += f" (at {self.token!r})"
        return f"{filename}:{self.line}:{self.col}: {label} {self.message}{extra}"


class DslDiagnosticsError(IcnlError):
    """Raised when a document fails to parse or validate."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        head = self.diagnostics[0]
        more = f" (+{len(self.diagnostics) - 1} more)" if len(self.diagnostics) > 1 else ""
        super().__init__(f"{head.line}:{head.col}: {head.message}{more}")


# ---------------------------------------------------------------------------
# Expressions


class Expr:
    __slots__ = ()

    def evaluate(self, env: Mapping[str, float]) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def evaluate(self, env):
        return self.value


@dataclass(frozen=True)
class PiConst(Expr):
    def evaluate(self, env):
        return math.pi


@dataclass(frozen=True)
class Ref(Expr):
    name: str

    def evaluate(self, env):
        return env[self.name]


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr

    def evaluate(self, env):
        v = self.operand.evaluate(env)
        return -v if self.op == "-" else v


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b


@dataclass(frozen=True)
class ComplexPair:
    re: Expr
    im: Expr

    def evaluate(self, env) -> complex:
        return complex(self.re.evaluate(env), self.im.evaluate(env))


@dataclass(frozen=True)
class MatrixArg:
    rows: tuple[tuple[ComplexPair, ...], ...]

    def evaluate(self, env) -> tuple[tuple[complex, ...], ...]:
        return tuple(tuple(p.evaluate(env) for p in row) for row in self.rows)


@dataclass(frozen=True)
class PresetArg:
    name: str


@dataclass(frozen=True)
class HouseholderArg:
    pairs: tuple[ComplexPair, ...]

    def evaluate(self, env) -> tuple[complex, ...]:
        return tuple(p.evaluate(env) for p in self.pairs)


GateArg = Union[Expr, MatrixArg, PresetArg, HouseholderArg]


# ---------------------------------------------------------------------------
# Document model


@dataclass(frozen=True)
class ParamDecl:
    name: str
    expr: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class GateStmt:
    kind: str
    paths: tuple[str, ...]
    args: tuple[GateArg, ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SweepDecl:
    name: str
    start: Expr
    stop: Expr
    count: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CircuitDoc:
    """Validated document: declarations, gates, analysis directives."""

    paths: tuple[str, ...]
    params: tuple[ParamDecl, ...] = ()
    init: tuple[str, ...] = ()
    gates: tuple[GateStmt, ...] = ()
    measure: tuple[str, ...] = ()
    trace_keep: tuple[str, ...] = ()
    sweep: SweepDecl | None = None

    @property
    def param_defaults(self) -> dict[str, float]:
        env: dict[str, float] = {}
        for decl in self.params:
            env[decl.name] = decl.expr.evaluate(env)
        return env


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_SINGLE = {
    "[": "LBRACKET",
    "]": "RBRACKET",
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    "=": "EQUALS",
    "+": "PLUS",
    "-": "MINUS",
    "*": "STAR",
    "/": "SLASH",
}


def _lex(text: str, diags: list[Diagnostic]) -> list[Token]:
    tokens: list[Token] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        had_token = False
        pos = 0
        n = len(line)
        while pos < n:
            ch = line[pos]
            col = pos + 1
            if ch in " \t":
                pos += 1
                continue
            if ch == "#":
                break
            if ch == "|":
                end = line.find(">", pos)
                if end < 0:
                    diags.append(Diagnostic(line_no, col, "unterminated ket", token="|"))
                    break
                tokens.append(Token("KET", line[pos + 1 : end], line_no, col))
                pos = end + 1
            elif ch.isdigit():
                end = pos + 1
                while end < n and (line[end].isdigit() or line[end] == "."):
                    end += 1
                if end < n and line[end] in "eE":
                    probe = end + 1
                    if probe < n and line[probe] in "+-":
                        probe += 1
                    if probe < n and line[probe].isdigit():
                        end = probe + 1
                        while end < n and line[end].isdigit():
                            end += 1
                lexeme = line[pos:end]
                try:
                    float(lexeme)
                except ValueError:
                    diags.append(
                        Diagnostic(line_no, col, f"malformed number {lexeme!r}", token=lexeme)
                    )
                    pos = end
                    continue
                tokens.append(Token("NUMBER", lexeme, line_no, col))
                pos = end
            elif ch.isalpha() or ch == "_":
                end = pos + 1
                while end < n and (line[end].isalnum() or line[end] == "_"):
                    end += 1
                tokens.append(Token("NAME", line[pos:end], line_no, col))
                pos = end
            elif ch in _SINGLE:
                tokens.append(Token(_SINGLE[ch], ch, line_no, col))
                pos += 1
            else:
                diags.append(Diagnostic(line_no, col, f"unexpected character {ch!r}", token=ch))
                pos += 1
                continue
            had_token = True
        if had_token:
            tokens.append(Token("NEWLINE", "", line_no, n + 1))
    last_line = text.count("\n") + 1
    tokens.append(Token("EOF", "", last_line, 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _StatementError(Exception):
    """Internal: abandon the current statement after recording a diagnostic."""


class _Parser:
    def __init__(self, tokens: list[Token], diags: list[Diagnostic]):
        self.tokens = tokens
        self.pos = 0
        self.diags = diags
        self.paths: tuple[str, ...] = ()
        self.paths_line: int | None = None
        self.params: list[ParamDecl] = []
        self.param_names: set[str] = set()
        self.init: tuple[str, ...] = ()
        self.init_seen = False
        self.gates: list[GateStmt] = []
        self.measure: tuple[str, ...] = ()
        self.trace_keep: tuple[str, ...] = ()
        self.sweep: SweepDecl | None = None

    # --- token plumbing

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def fail(self, message: str, *, token: Token | None = None, expected: str | None = None):
        tok = token if token is not None else self.peek()
        shown = tok.text if tok.kind not in ("NEWLINE", "EOF") else None
        if shown is None and expected is not None:
            shown = "end of line"
        self.diags.append(Diagnostic(tok.line, tok.col, message, token=shown, expected=expected))
        raise _StatementError

    def expect(self, kind: str, expected: str) -> Token:
        if not self.at(kind):
            self.fail(f"expected {expected}", expected=expected)
        return self.advance()

    def end_statement(self):
        if not self.at("NEWLINE") and not self.at("EOF"):
            self.fail("trailing input after statement", expected="end of line")
        if self.at("NEWLINE"):
            self.advance()

    def sync(self):
        while not self.at("NEWLINE") and not self.at("EOF"):
            self.advance()
        if self.at("NEWLINE"):
            self.advance()

    # --- document

    def parse_doc(self) -> CircuitDoc:
        while not self.at("EOF"):
            if self.at("NEWLINE"):
                self.advance()
                continue
            try:
                self.parse_statement()
            except _StatementError:
                self.sync()
        if self.paths_line is None:
            self.diags.append(Diagnostic(1, 1, "missing paths declaration"))
            return CircuitDoc(paths=())
        return CircuitDoc(
            paths=self.paths,
            params=tuple(self.params),
            init=self.init,
            gates=tuple(self.gates),
            measure=self.measure,
            trace_keep=self.trace_keep,
            sweep=self.sweep,
        )

    def parse_statement(self):
        head = self.peek()
        if head.kind != "NAME":
            self.fail("expected a statement keyword", expected="statement keyword")
        if head.text not in KEYWORDS:
            self.fail(f"unknown statement {head.text!r}", expected="statement keyword")
        if head.text != "paths" and self.paths_line is None:
            self.fail("missing paths declaration", token=head)
        handler = getattr(self, f"parse_{head.text}", None)
        if handler is not None:
            self.advance()
            handler(head)
        else:
            self.advance()
            self.parse_gate(head)

    def parse_paths(self, head: Token):
        if self.paths_line is not None:
            self.fail("duplicate paths declaration", token=head)
        names = []
        while self.at("NAME"):
            tok = self.advance()
            if tok.text in KEYWORDS or tok.text == "pi":
                self.fail(f"{tok.text!r} is reserved and cannot name a path", token=tok)
            if tok.text in names:
                self.fail(f"duplicate path name {tok.text!r}", token=tok)
            names.append(tok.text)
        if not names:
            self.fail("paths requires at least one path", expected="path name")
        self.paths = tuple(names)
        self.paths_line = head.line
        self.end_statement()

    def parse_param(self, head: Token):
        name = self.expect("NAME", "parameter name")
        if name.text in KEYWORDS or name.text == "pi":
            self.fail(f"{name.text!r} is reserved and cannot name a parameter", token=name)
        if name.text in self.param_names:
            self.fail(f"duplicate parameter {name.text!r}", token=name)
        self.expect("EQUALS", "'='")
        expr = self.parse_expr()
        self.end_statement()
        self.params.append(ParamDecl(name.text, expr, line=head.line))
        self.param_names.add(name.text)

    def parse_init(self, head: Token):
        if self.init_seen:
            self.fail("duplicate init statement", token=head)
        kets = [self.parse_ket()]
        while self.at("PLUS"):
            self.advance()
            kets.append(self.parse_ket())
        self.end_statement()
        self.init = tuple(kets)
        self.init_seen = True

    def parse_ket(self) -> str:
        tok = self.expect("KET", "occupation ket like |0H0>")
        occ = tok.text
        if len(occ) != len(self.paths):
            self.fail(
                f"occupation needs one symbol per path ({len(self.paths)}), got {len(occ)}",
                token=tok,
            )
        for ch in occ:
            if ch not in "0HV":
                self.fail(f"invalid occupation symbol {ch!r}", token=tok)
        return occ

    def parse_path_name(self) -> str:
        tok = self.expect("NAME", "path name")
        if tok.text not in self.paths:
            self.fail(f"undeclared path {tok.text!r}", token=tok)
        return tok.text

    def parse_path_list(self, head: Token) -> tuple[str, ...]:
        names = []
        while self.at("NAME"):
            names.append(self.parse_path_name())
        if not names:
            self.fail(f"{head.text} requires at least one path", expected="path name")
        if len(set(names)) != len(names):
            self.fail(f"{head.text} paths must be distinct", token=head)
        self.end_statement()
        return tuple(names)

    def parse_measure(self, head: Token):
        self.measure = self.parse_path_list(head)

    def parse_trace_keep(self, head: Token):
        self.trace_keep = self.parse_path_list(head)

    def parse_sweep(self, head: Token):
        if self.sweep is not None:
            self.fail("duplicate sweep directive", token=head)
        name = self.expect("NAME", "parameter name")
        if name.text not in self.param_names:
            self.fail(f"unknown parameter {name.text!r}", token=name)
        start = self.parse_expr()
        stop = self.parse_expr()
        count_tok = self.peek()
        count_expr = self.parse_expr()
        try:
            count = count_expr.evaluate({})
        except KeyError:
            self.fail("sweep count must be a constant", token=count_tok)
        if count != int(count) or count < 1:
            self.fail(f"sweep count must be a positive integer, got {count}", token=count_tok)
        self.end_statement()
        self.sweep = SweepDecl(name.text, start, stop, int(count), line=head.line)

    def parse_gate(self, head: Token):
        kind = head.text
        if kind == "unitary":
            self.parse_unitary(head)
            return
        n_paths, scalar_args = GATE_SHAPES[kind]
        paths = []
        for _ in range(n_paths):
            if not self.at("NAME") or self.peek().text not in self.paths:
                if self.at("NAME"):
                    self.fail(f"undeclared path {self.peek().text!r}")
                self.fail(f"{kind} requires {n_paths} paths", expected="path name")
            paths.append(self.advance().text)
        if len(set(paths)) != len(paths):
            self.fail(f"{kind} paths must be distinct", token=head)
        args = tuple(self.parse_expr() for _ in scalar_args)
        self.end_statement()
        self.gates.append(GateStmt(kind, tuple(paths), args, line=head.line))

    def parse_unitary(self, head: Token):
        paths = []
        while len(paths) < 2 and self.at("NAME") and self.peek().text in self.paths:
            paths.append(self.advance().text)
        if not paths:
            self.fail("unitary requires 1 or 2 paths", expected="path name")
        if len(set(paths)) != len(paths):
            self.fail("unitary paths must be distinct", token=head)
        dim = 2 ** len(paths)
        if self.at("LBRACKET"):
            arg: GateArg = self.parse_matrix(dim)
        elif self.at("NAME") and self.peek().text == "householder":
            self.advance()
            pairs = tuple(self.parse_complex_pair() for _ in range(dim))
            arg = HouseholderArg(pairs)
        elif self.at("NAME") and self.peek().text in PRESETS:
            if len(paths) != 1:
                self.fail(f"preset {self.peek().text!r} is a single-path unitary")
            arg = PresetArg(self.advance().text)
        else:
            self.fail(
                "expected a matrix literal, preset, or householder target",
                expected="'[', preset name, or 'householder'",
            )
        self.end_statement()
        self.gates.append(GateStmt("unitary", tuple(paths), (arg,), line=head.line))

    def parse_matrix(self, dim: int) -> MatrixArg:
        open_tok = self.expect("LBRACKET", "'['")
        rows = []
        while True:
            rows.append(self.parse_matrix_row(dim))
            if self.at("COMMA"):
                self.advance()
                continue
            break
        self.expect("RBRACKET", "']'")
        if len(rows) != dim:
            self.fail(
                f"matrix must have {dim} rows for this gate, got {len(rows)}", token=open_tok
            )
        return MatrixArg(tuple(rows))

    def parse_matrix_row(self, dim: int) -> tuple[ComplexPair, ...]:
        open_tok = self.expect("LBRACKET", "'['")
        entries = [self.parse_complex_pair()]
        while self.at("COMMA"):
            self.advance()
            entries.append(self.parse_complex_pair())
        self.expect("RBRACKET", "']'")
        if len(entries) != dim:
            self.fail(
                f"matrix row must have {dim} entries, got {len(entries)}", token=open_tok
            )
        return tuple(entries)

    def parse_complex_pair(self) -> ComplexPair:
        self.expect("LPAREN", "'('")
        re = self.parse_expr()
        self.expect("COMMA", "','")
        im = self.parse_expr()
        self.expect("RPAREN", "')'")
        return ComplexPair(re, im)

    # --- expressions

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.at("PLUS") or self.at("MINUS"):
            op = self.advance().text
            node = Binary(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.at("STAR") or self.at("SLASH"):
            op = self.advance().text
            node = Binary(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "NAME":
            if tok.text == "pi":
                self.advance()
                return PiConst()
            if tok.text in self.param_names:
                self.advance()
                return Ref(tok.text)
            self.fail(f"unknown parameter {tok.text!r}", token=tok)
        if tok.kind in ("PLUS", "MINUS"):
            self.advance()
            return Unary(tok.text, self.parse_factor())
        if tok.kind == "LPAREN":
            self.advance()
            node = self.parse_expr()
            self.expect("RPAREN", "')'")
            return node
        self.fail("expected an expression", expected="number, 'pi', or parameter")


def _semantic_checks(doc: CircuitDoc, diags: list[Diagnostic]) -> None:
    """Range and unitarity checks, evaluated with the parameter defaults."""
    from .linalg import require_unitary
    from .errors import NonUnitaryMatrixError
    import numpy as np

    try:
        env = doc.param_defaults
    except ZeroDivisionError:
        diags.append(Diagnostic(1, 1, "division by zero while evaluating parameter defaults"))
        return
    for stmt in doc.gates:
        try:
            if stmt.kind == "object":
                t = stmt.args[0].evaluate(env)
                if not 0.0 <= t <= 1.0:
                    diags.append(
                        Diagnostic(
                            stmt.line, 1, f"transmittance out of range [0, 1]: {t}"
                        )
                    )
            elif stmt.kind == "unitary":
                arg = stmt.args[0]
                dim = 2 ** len(stmt.paths)
                if isinstance(arg, MatrixArg):
                    try:
                        require_unitary(arg.evaluate(env), dim)
                    except NonUnitaryMatrixError as exc:
                        diags.append(Diagnostic(stmt.line, 1, str(exc)))
                elif isinstance(arg, HouseholderArg):
                    vec = np.asarray(arg.evaluate(env))
                    if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
                        diags.append(
                            Diagnostic(
                                stmt.line, 1, "householder target must be unit norm"
                            )
                        )
        except ZeroDivisionError:
            diags.append(Diagnostic(stmt.line, 1, "division by zero in gate argument"))


def check(text: str) -> list[Diagnostic]:
    """Parse and validate, returning every diagnostic (empty means valid)."""
    diags: list[Diagnostic] = []
    tokens = _lex(text, diags)
    doc = _Parser(tokens, diags).parse_doc()
    if not diags:
        _semantic_checks(doc, diags)
    return diags


def parse(text: str) -> CircuitDoc:
    """Parse a document or raise ``DslDiagnosticsError`` with every problem."""
    diags: list[Diagnostic] = []
    tokens = _lex(text, diags)
    doc = _Parser(tokens, diags).parse_doc()
    if not diags:
        _semantic_checks(doc, diags)
    if diags:
        raise DslDiagnosticsError(diags)
    return doc


def parse_expression(text: str, env: Mapping[str, float] = ()) -> float:
    """Evaluate a standalone pi-arithmetic expression (used by overrides)."""
    env = dict(env)
    diags: list[Diagnostic] = []
    tokens = _lex(text, diags)
    parser = _Parser(tokens, diags)
    parser.param_names = set(env)
    try:
        expr = parser.parse_expr()
        parser.end_statement()
        if not parser.at("EOF"):
            parser.fail("trailing input after expression", expected="end of input")
    except _StatementError:
        pass
    if diags:
        raise DslDiagnosticsError(diags)
    return expr.evaluate(env)


# ---------------------------------------------------------------------------
# Formatter

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _fmt_expr(expr: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Num):
        return _fmt_number(expr.value)
    if isinstance(expr, PiConst):
        return "pi"
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, Unary):
        inner = _fmt_expr(expr.operand, 3)
        text = f"{expr.op}{inner}"
        return f"({text})" if parent_prec >= 3 else text
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        left = _fmt_expr(expr.left, prec, False)
        right = _fmt_expr(expr.right, prec, True)
        text = f"{left} {expr.op} {right}"
        if prec < parent_prec or (prec == parent_prec and right_side):
            return f"({text})"
        return text
    raise TypeError(f"unknown expression node {expr!r}")


def _fmt_pair(pair: ComplexPair) -> str:
    return f"({_fmt_expr(pair.re)}, {_fmt_expr(pair.im)})"


def _fmt_arg(arg: GateArg) -> str:
    if isinstance(arg, MatrixArg):
        rows = ", ".join("[" + ", ".join(_fmt_pair(p) for p in row) + "]" for row in arg.rows)
        return f"[{rows}]"
    if isinstance(arg, PresetArg):
        return arg.name
    if isinstance(arg, HouseholderArg):
        return "householder " + " ".join(_fmt_pair(p) for p in arg.pairs)
    return _fmt_expr(arg)


def format_doc(doc: CircuitDoc) -> str:
    """Canonical text form; ``parse(format_doc(d)) == d`` and formatting is
    idempotent."""
    lines = ["paths " + " ".join(doc.paths)]
    for decl in doc.params:
        lines.append(f"param {decl.name} = {_fmt_expr(decl.expr)}")
    if doc.init:
        lines.append("init " + " + ".join(f"|{occ}>" for occ in doc.init))
    for stmt in doc.gates:
        parts = [stmt.kind, *stmt.paths]
        parts.extend(_fmt_arg(a) for a in stmt.args)
        lines.append(" ".join(parts))
    if doc.measure:
        lines.append("measure " + " ".join(doc.measure))
    if doc.trace_keep:
        lines.append("trace_keep " + " ".join(doc.trace_keep))
    if doc.sweep is not None:
        s = doc.sweep
        lines.append(
            f"sweep {s.name} {_fmt_expr(s.start)} {_fmt_expr(s.stop)} {s.count}"
        )
    return "\n".join(lines) + "\n"
