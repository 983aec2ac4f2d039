"""The probabilistic-loop language: parsing, validation, desugaring.

Grammar (``#`` starts a comment, ``@binary v`` pragmas precede the inits)::

    program   := pragma* init* "while" "true" "{" stmt* "}"
    pragma    := "@binary" ident
    init      := ident ":=" (number | dist)
    stmt      := ident ":=" expr ( "[" number "]" expr )?
               | ident ":=" dist
               | "if" ident "=" ("0"|"1") "{" stmt "}" "else" "{" stmt "}"
    dist      := ("Normal"|"Uniform"|"Bernoulli") "(" number ("," number)? ")"
    expr      := + - * / ^ over idents, numbers and parentheses; "/" only by
                 a constant divisor, "^" only with a constant integer exponent

Numbers are kept as exact rationals (``1/2``, ``0.3`` and ``-2`` all parse
exactly); they are converted to binary64 only at sampling time.

Desugaring rewrites every probabilistic choice ``x := e1 [p] e2`` into the
single polynomial update ``x := c*e1 + (1-c)*e2`` with a fresh Bernoulli(p)
symbol ``c``, and every binary guard into one polynomial update using the
idempotence ``s*s = s``.  Fresh symbols are named ``#d0, #d1, ...`` in
statement order (guards allocate the then-branch draw before the else one),
so two runs fed identical per-slot draw values follow identical paths.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DesugarUnsupported,
    DuplicateInit,
    ParseError,
    UndefinedVariable,
)
from .poly import Poly

DIST_KINDS = ("Normal", "Uniform", "Bernoulli")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: Fraction
    text: str = ""

    def __eq__(self, other):
        return isinstance(other, Num) and self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def render(self) -> str:
        return self.text or str(self.value)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


Expr = Num | Var | Neg | BinOp


@dataclass(frozen=True)
class DistributionSpec:
    kind: str  # Normal | Uniform | Bernoulli
    params: tuple[Num, ...]

    def values(self) -> tuple[Fraction, ...]:
        return tuple(p.value for p in self.params)

    def render(self) -> str:
        return f"{self.kind}({', '.join(p.render() for p in self.params)})"


@dataclass(frozen=True)
class DetAssign:
    target: str
    expr: Expr


@dataclass(frozen=True)
class ProbChoice:
    target: str
    left: Expr
    prob: Num
    right: Expr


@dataclass(frozen=True)
class DistDraw:
    target: str
    dist: DistributionSpec


@dataclass(frozen=True)
class BinaryGuard:
    guard: str
    value: int  # compared against 0 or 1
    then_stmt: "Statement"
    else_stmt: "Statement"


Statement = DetAssign | ProbChoice | DistDraw | BinaryGuard


@dataclass(frozen=True)
class Program:
    inits: tuple[tuple[str, Num | DistributionSpec], ...]
    body: tuple[Statement, ...]
    binary: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<number>\d+\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?|\.\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<assign>:=)
  | (?P<op>[@+\-*/^()\[\]{}=,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | keyword-ish punctuation
    text: str
    line: int
    column: int


_KEYWORDS = {"while", "true", "if", "else"}


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(lexeme)
        else:
            if kind == "ident" and lexeme in _KEYWORDS:
                tokens.append(Token(lexeme, lexeme, line, col))
            elif kind in ("assign", "op"):
                tokens.append(Token(lexeme, lexeme, line, col))
            else:
                tokens.append(Token(kind, lexeme, line, col))
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, message, *expected):
        tok = self.current
        raise ParseError(message, tok.line, tok.column, expected)

    def accept(self, kind: str) -> Token | None:
        if self.current.kind == kind:
            tok = self.current
            self.pos += 1
            return tok
        return None

    def expect(self, kind: str) -> Token:
        tok = self.accept(kind)
        if tok is None:
            self._fail(f"found {self.current.text or 'end of input'!r}", kind)
        return tok

    # -- numbers -----------------------------------------------------------

    def signed_number(self) -> Num:
        neg = self.accept("-") is not None
        tok = self.expect("number")
        text = tok.text
        value = Fraction(text)
        if self.accept("/"):
            den = self.expect("number")
            value = value / Fraction(den.text)
            text = f"{text}/{den.text}"
        if neg:
            value = -value
            text = "-" + text
        return Num(value, text)

    # -- distributions -----------------------------------------------------

    def maybe_dist(self) -> DistributionSpec | None:
        if self.current.kind == "ident" and self.current.text in DIST_KINDS:
            kind = self.expect("ident").text
            self.expect("(")
            params = [self.signed_number()]
            while self.accept(","):
                params.append(self.signed_number())
            self.expect(")")
            return DistributionSpec(kind, tuple(params))
        return None

    # -- expressions -------------------------------------------------------

    def expression(self) -> Expr:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.expect(self.current.kind).kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.current.kind in ("*", "/"):
            op = self.expect(self.current.kind).kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        if self.current.kind == "number":
            tok = self.expect("number")
            return Num(Fraction(tok.text), tok.text)
        if self.current.kind == "ident":
            return Var(self.expect("ident").text)
        if self.accept("("):
            node = self.expression()
            self.expect(")")
            return node
        self._fail(f"found {self.current.text or 'end of input'!r}",
                   "number", "identifier", "(")

    # -- statements --------------------------------------------------------

    def statement(self) -> Statement:
        if self.current.kind == "if":
            return self.guard()
        target = self.expect("ident").text
        self.expect(":=")
        dist = self.maybe_dist()
        if dist is not None:
            return DistDraw(target, dist)
        left = self.expression()
        if self.accept("["):
            prob = self.signed_number()
            self.expect("]")
            right = self.expression()
            return ProbChoice(target, left, prob, right)
        return DetAssign(target, left)

    def guard(self) -> BinaryGuard:
        self.expect("if")
        var = self.expect("ident").text
        self.expect("=")
        tok = self.expect("number")
        if tok.text not in ("0", "1"):
            raise ParseError("guard compares against 0 or 1 only",
                             tok.line, tok.column, ("0", "1"))
        self.expect("{")
        then_stmt = self.statement()
        self.expect("}")
        self.expect("else")
        self.expect("{")
        else_stmt = self.statement()
        self.expect("}")
        return BinaryGuard(var, int(tok.text), then_stmt, else_stmt)

    # -- program -----------------------------------------------------------

    def program(self) -> Program:
        binary: list[str] = []
        while self.accept("@"):
            word = self.expect("ident")
            if word.text != "binary":
                raise ParseError(f"unknown pragma @{word.text}",
                                 word.line, word.column, ("binary",))
            binary.append(self.expect("ident").text)
        inits: list[tuple[str, Num | DistributionSpec]] = []
        while self.current.kind == "ident":
            name = self.expect("ident").text
            self.expect(":=")
            dist = self.maybe_dist()
            inits.append((name, dist if dist is not None else self.signed_number()))
        self.expect("while")
        self.expect("true")
        self.expect("{")
        body: list[Statement] = []
        while self.current.kind != "}":
            if self.current.kind == "eof":
                self._fail("unterminated loop body", "}")
            body.append(self.statement())
        self.expect("}")
        self.expect("eof")
        return Program(tuple(inits), tuple(body), tuple(binary))


def _assigned_targets(stmt: Statement) -> list[str]:
    if isinstance(stmt, BinaryGuard):
        return _assigned_targets(stmt.then_stmt) + _assigned_targets(stmt.else_stmt)
    return [stmt.target]


def _read_vars(stmt: Statement) -> set[str]:
    if isinstance(stmt, DetAssign):
        return expr_vars(stmt.expr)
    if isinstance(stmt, ProbChoice):
        return expr_vars(stmt.left) | expr_vars(stmt.right)
    if isinstance(stmt, DistDraw):
        return set()
    return ({stmt.guard}
            | _read_vars(stmt.then_stmt)
            | _read_vars(stmt.else_stmt))


def expr_vars(expr: Expr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Neg):
        return expr_vars(expr.operand)
    if isinstance(expr, BinOp):
        return expr_vars(expr.left) | expr_vars(expr.right)
    return set()


def parse_program(text: str) -> Program:
    """Parse source text into a Program, or raise a positioned ParseError.

    Scoping is checked here as well: duplicate init targets raise
    DuplicateInit and reads of never-assigned variables raise
    UndefinedVariable.
    """
    program = _Parser(_tokenize(text)).program()
    seen: set[str] = set()
    for name, _ in program.inits:
        if name in seen:
            raise DuplicateInit(f"variable {name!r} initialized twice")
        seen.add(name)
    defined = set(seen)
    for stmt in program.body:
        missing = _read_vars(stmt) - defined
        if missing:
            raise UndefinedVariable(
                f"variable {sorted(missing)[0]!r} read before assignment")
        defined.update(_assigned_targets(stmt))
    return program


# ---------------------------------------------------------------------------
# Pretty printer

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _render_expr(expr: Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, Num):
        return expr.render()
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        inner = _render_expr(expr.operand, 2, True)
        text = f"-{inner}"
        return f"({text})" if parent_prec > 1 else text
    prec = _PRECEDENCE[expr.op]
    left = _render_expr(expr.left, prec, False)
    right = _render_expr(expr.right, prec + (expr.op in ("-", "/")), True)
    if expr.op == "^":
        left = _render_expr(expr.left, prec + 1, False)
        right = _render_expr(expr.right, prec, True)
    text = f"{left}{expr.op}{right}" if expr.op == "^" else f"{left} {expr.op} {right}"
    needs_parens = prec < parent_prec or (prec == parent_prec and right_side)
    return f"({text})" if needs_parens else text


def _render_stmt(stmt: Statement, indent: str) -> str:
    if isinstance(stmt, DetAssign):
        return f"{indent}{stmt.target} := {_render_expr(stmt.expr)}"
    if isinstance(stmt, ProbChoice):
        return (f"{indent}{stmt.target} := {_render_expr(stmt.left)} "
                f"[{stmt.prob.render()}] {_render_expr(stmt.right)}")
    if isinstance(stmt, DistDraw):
        return f"{indent}{stmt.target} := {stmt.dist.render()}"
    return (f"{indent}if {stmt.guard} = {stmt.value} "
            f"{{ {_render_stmt(stmt.then_stmt, '')} }} "
            f"else {{ {_render_stmt(stmt.else_stmt, '')} }}")


def pretty_print(program: Program) -> str:
    lines = [f"@binary {name}" for name in program.binary]
    for name, value in program.inits:
        lines.append(f"{name} := {value.render()}")
    lines.append("while true {")
    for stmt in program.body:
        lines.append(_render_stmt(stmt, "  "))
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning"
    message: str


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)
    propagation_eligible: bool = True

    @property
    def ok(self) -> bool:
        return not self.errors

    def _add(self, severity: str, message: str):
        issue = Issue(severity, message)
        (self.errors if severity == "error" else self.warnings).append(issue)


def _check_dist(report: ValidationReport, dist: DistributionSpec, where: str):
    values = dist.values()
    if dist.kind == "Normal":
        if len(values) != 2:
            report._add("error", f"{where}: Normal takes (mean, variance)")
        elif values[1] < 0:
            report._add("error", f"{where}: variance must be >= 0")
    elif dist.kind == "Uniform":
        if len(values) != 2:
            report._add("error", f"{where}: Uniform takes (lo, hi)")
        elif not values[0] < values[1]:
            report._add("error", f"{where}: lo < hi violated")
    elif dist.kind == "Bernoulli":
        if len(values) != 1:
            report._add("error", f"{where}: Bernoulli takes (p)")
        elif not 0 <= values[0] <= 1:
            report._add("error", f"{where}: p must lie in [0, 1]")


def _stmt_dists(stmt: Statement) -> list[DistributionSpec]:
    if isinstance(stmt, DistDraw):
        return [stmt.dist]
    if isinstance(stmt, BinaryGuard):
        return _stmt_dists(stmt.then_stmt) + _stmt_dists(stmt.else_stmt)
    return []


def _stmt_probs(stmt: Statement) -> list[Num]:
    if isinstance(stmt, ProbChoice):
        return [stmt.prob]
    if isinstance(stmt, BinaryGuard):
        return _stmt_probs(stmt.then_stmt) + _stmt_probs(stmt.else_stmt)
    return []


def _expr_degrees(expr: Expr) -> dict[str, int]:
    """Max per-variable exponent over the expanded form of the expression."""
    degrees: dict[str, int] = {}
    for mono in _expr_poly_nocheck(expr).terms:
        for name, e in mono:
            degrees[name] = max(degrees.get(name, 0), e)
    return degrees


def _expr_poly_nocheck(expr: Expr) -> Poly:
    try:
        return expr_to_poly(expr, {})
    except DesugarUnsupported:
        # Treat unexpandable expressions as worst-case nonlinear everywhere.
        return Poly({tuple((v, 2) for v in sorted(expr_vars(expr))): Fraction(1)})


def _dependency_degrees(stmt: Statement) -> dict[str, dict[str, int]]:
    """target -> {read var -> max degree} for the statement."""
    if isinstance(stmt, DetAssign):
        return {stmt.target: _expr_degrees(stmt.expr)}
    if isinstance(stmt, ProbChoice):
        merged: dict[str, int] = {}
        for e in (stmt.left, stmt.right):
            for name, d in _expr_degrees(e).items():
                merged[name] = max(merged.get(name, 0), d)
        return {stmt.target: merged}
    if isinstance(stmt, DistDraw):
        return {stmt.target: {}}
    out: dict[str, dict[str, int]] = {}
    for branch in (stmt.then_stmt, stmt.else_stmt):
        for target, deps in _dependency_degrees(branch).items():
            cur = out.setdefault(target, {})
            for name, d in deps.items():
                cur[name] = max(cur.get(name, 0), d)
            cur[stmt.guard] = max(cur.get(stmt.guard, 0), 1)
    return out


def _eligible(program: Program) -> bool:
    """True when no dependency cycle passes through a superlinear edge.

    Nonlinear reads are harmless as long as they point strictly "backwards"
    (acyclically): powers of an affine chain stay a finite family.  A cycle
    with a degree >= 2 edge doubles monomial degrees every iteration and the
    closure cannot terminate.
    """
    deps: dict[str, dict[str, int]] = {}
    for stmt in program.body:
        for target, d in _dependency_degrees(stmt).items():
            cur = deps.setdefault(target, {})
            for name, deg in d.items():
                cur[name] = max(cur.get(name, 0), deg)
    names = sorted(deps)
    index = {n: i for i, n in enumerate(names)}

    def reaches(src: str, dst: str, seen: set[str]) -> bool:
        if src == dst:
            return True
        if src in seen or src not in deps:
            return False
        seen.add(src)
        return any(reaches(read, dst, seen) for read in deps[src])

    for target, reads in deps.items():
        for read, degree in reads.items():
            if degree >= 2 and read in index and reaches(read, target, set()):
                return False
    return True


def validate(program: Program) -> ValidationReport:
    """Semantic checks; returns a report instead of raising.

    Errors: distribution-parameter violations, probabilities outside [0, 1],
    guards or guard-branch targets that are not declared binary.  Warnings:
    variables that are never read.  Also flags whether the program is
    eligible for exact moment propagation.
    """
    report = ValidationReport()
    for name, value in program.inits:
        if isinstance(value, DistributionSpec):
            _check_dist(report, value, f"init of {name}")
    binary = set(program.binary)
    read_anywhere: set[str] = set()
    for stmt in program.body:
        read_anywhere |= _read_vars(stmt)
        for dist in _stmt_dists(stmt):
            _check_dist(report, dist, f"assignment to {_assigned_targets(stmt)[0]}")
        for prob in _stmt_probs(stmt):
            if not 0 <= prob.value <= 1:
                report._add("error",
                            f"choice probability {prob.render()} outside [0, 1]")
        if isinstance(stmt, BinaryGuard):
            if stmt.guard not in binary:
                report._add("error",
                            f"guard variable must be binary: {stmt.guard!r}")
            for target in _assigned_targets(stmt):
                if target not in binary:
                    report._add(
                        "error",
                        f"guard branch target must be binary: {target!r}")
    for name, _ in program.inits:
        if name not in read_anywhere:
            report._add("warning", f"unused variable {name!r}")
    report.propagation_eligible = _eligible(program)
    return report


# ---------------------------------------------------------------------------
# Desugaring


@dataclass(frozen=True)
class FreshDraw:
    name: str  # "#d<k>"
    dist: DistributionSpec


@dataclass(frozen=True)
class CoreProgram:
    """Normal form: ordered polynomial updates over state and fresh draws.

    Init-only variables bound to numeric constants are folded into the
    update polynomials; variables first assigned inside the body start at
    zero (the language forbids reading them before their first assignment,
    so the placeholder is unobservable).
    """

    state_vars: tuple[str, ...]
    inits: tuple[tuple[str, Fraction | DistributionSpec], ...]
    updates: tuple[tuple[str, Poly], ...]
    draws: tuple[FreshDraw, ...]
    binary_vars: frozenset[str]

    @property
    def binary_symbols(self) -> frozenset[str]:
        """Binary state variables plus 0/1-valued fresh draws."""
        bern = {d.name for d in self.draws if d.dist.kind == "Bernoulli"}
        return self.binary_vars | frozenset(bern)


def expr_to_poly(expr: Expr, const_env: dict[str, Fraction]) -> Poly:
    if isinstance(expr, Num):
        return Poly.number(expr.value)
    if isinstance(expr, Var):
        if expr.name in const_env:
            return Poly.number(const_env[expr.name])
        return Poly.variable(expr.name)
    if isinstance(expr, Neg):
        return -expr_to_poly(expr.operand, const_env)
    left = expr_to_poly(expr.left, const_env)
    right = expr_to_poly(expr.right, const_env)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if expr.op == "/":
        divisor = right.constant()
        if divisor is None or divisor == 0:
            raise DesugarUnsupported("division only by a nonzero constant")
        return left.scale(Fraction(1) / divisor)
    if expr.op == "^":
        exponent = right.constant()
        if exponent is None or exponent.denominator != 1 or exponent < 0:
            raise DesugarUnsupported(
                "exponent must be a nonnegative integer constant")
        return left.pow(int(exponent))
    raise DesugarUnsupported(f"operator {expr.op!r}")


class _Desugarer:
    def __init__(self, const_env: dict[str, Fraction], binary: frozenset[str]):
        self.const_env = const_env
        self.binary = binary
        self.draws: list[FreshDraw] = []

    def fresh(self, dist: DistributionSpec) -> Poly:
        name = f"#d{len(self.draws)}"
        self.draws.append(FreshDraw(name, dist))
        return Poly.variable(name)

    def branch_poly(self, stmt: Statement) -> tuple[str, Poly]:
        """Right-hand side of a guard branch, with its own fresh draws."""
        if isinstance(stmt, DetAssign):
            return stmt.target, expr_to_poly(stmt.expr, self.const_env)
        if isinstance(stmt, ProbChoice):
            return stmt.target, self.choice_poly(stmt)
        if isinstance(stmt, DistDraw):
            if stmt.dist.kind != "Bernoulli":
                raise DesugarUnsupported(
                    "guard branches may draw from Bernoulli only")
            return stmt.target, self.fresh(stmt.dist)
        raise DesugarUnsupported("nested guards are not supported")

    def choice_poly(self, stmt: ProbChoice) -> Poly:
        coin = self.fresh(DistributionSpec("Bernoulli", (stmt.prob,)))
        left = expr_to_poly(stmt.left, self.const_env)
        right = expr_to_poly(stmt.right, self.const_env)
        mixed = coin * left + (Poly.number(1) - coin) * right
        return mixed.reduce_binary(self.binary)

    def update(self, stmt: Statement) -> tuple[str, Poly]:
        if isinstance(stmt, DetAssign):
            return stmt.target, expr_to_poly(stmt.expr, self.const_env)
        if isinstance(stmt, ProbChoice):
            return stmt.target, self.choice_poly(stmt)
        if isinstance(stmt, DistDraw):
            return stmt.target, self.fresh(stmt.dist)
        then_target, then_poly = self.branch_poly(stmt.then_stmt)
        else_target, else_poly = self.branch_poly(stmt.else_stmt)
        if then_target != else_target:
            raise DesugarUnsupported(
                "guard branches must assign the same variable "
                f"({then_target!r} vs {else_target!r})")
        guard = Poly.variable(stmt.guard)
        taken_when_guard_zero = then_poly if stmt.value == 0 else else_poly
        taken_when_guard_one = else_poly if stmt.value == 0 else then_poly
        one = Poly.number(1)
        combined = (one - guard) * taken_when_guard_zero + guard * taken_when_guard_one
        return then_target, combined.reduce_binary(self.binary)


def desugar(program: Program) -> CoreProgram:
    """Rewrite a validated Program into polynomial-update normal form.

    Sampling the result is distributionally identical to the source; with
    coupled draws (shared per-slot values) the trajectories match exactly.
    """
    assigned_in_body: set[str] = set()
    for stmt in program.body:
        assigned_in_body.update(_assigned_targets(stmt))
    const_env = {
        name: value.value
        for name, value in program.inits
        if isinstance(value, Num) and name not in assigned_in_body
    }
    state_vars: list[str] = []
    inits: list[tuple[str, Fraction | DistributionSpec]] = []
    for name, value in program.inits:
        if name in const_env:
            continue
        state_vars.append(name)
        inits.append((name, value.value if isinstance(value, Num) else value))
    for stmt in program.body:
        for target in _assigned_targets(stmt):
            if target not in state_vars:
                state_vars.append(target)
                inits.append((target, Fraction(0)))
    binary = frozenset(program.binary)
    worker = _Desugarer(const_env, binary)
    updates = tuple(worker.update(stmt) for stmt in program.body)
    return CoreProgram(
        state_vars=tuple(state_vars),
        inits=tuple(inits),
        updates=updates,
        draws=tuple(worker.draws),
        binary_vars=binary,
    )
