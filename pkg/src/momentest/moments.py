"""Exact raw moments of loop variables.

``closure_basis`` finds the smallest monomial family containing
``var**1..var**m`` whose expectations evolve autonomously under one loop
iteration; ``propagate`` then iterates that linear map ``n`` times.  The
arithmetic stays in exact rationals while every constant is rational and the
basis is small, so the results are exact, not approximations.

Externally computed moments (numeric values or closed-form expressions in
the iteration counter ``n``) are ingested by ``load_moments``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dsl import CoreProgram, DistributionSpec
from .errors import (
    ClosureExceeded,
    EvalError,
    NumericOverflow,
    SchemaError,
    UnknownVariable,
)
from .poly import UNIT, Monomial, Poly

RATIONAL_BASIS_LIMIT = 128
DEFAULT_CLOSURE_CAP = 512


@dataclass(frozen=True)
class MomentSet:
    """Raw moments E(x**1..m) of one variable at a fixed iteration."""

    var: str
    n: int
    values: tuple  # Fraction (exact propagation) or float, orders 1..m
    provenance: str  # "propagated" | "empirical" | "external"

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("need at least one moment")

    @property
    def order(self) -> int:
        return len(self.values)

    @property
    def float_values(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, order: int):
        """1-based access: ms[i] is E(x**i)."""
        return self.values[order - 1]

    def prefix(self, m: int) -> "MomentSet":
        if not 1 <= m <= self.order:
            raise ValueError(f"no prefix of length {m}")
        return MomentSet(self.var, self.n, self.values[:m], self.provenance)

    def to_json(self) -> dict:
        return {"var": self.var, "n": self.n,
                "values": list(self.float_values),
                "provenance": self.provenance}


def raw_moment(dist: DistributionSpec, k: int) -> Fraction:
    """E(X**k) for a draw from ``dist``, exact in rational arithmetic."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return Fraction(1)
    values = dist.values()
    if dist.kind == "Bernoulli":
        return values[0]
    if dist.kind == "Uniform":
        a, b = values
        return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))
    mean, variance = values
    total = Fraction(0)
    for j in range(0, k + 1, 2):
        # E(Z**j) = (j-1)!! for standard normal Z, odd orders vanish.
        double_fact = math.factorial(j) // (2 ** (j // 2) * math.factorial(j // 2))
        total += math.comb(k, j) * mean ** (k - j) * variance ** (j // 2) * double_fact
    return total


@dataclass(frozen=True)
class MonomialBasis:
    """Monomial family closed under one-step expectation pullback."""

    var: str
    order: int
    monomials: tuple[Monomial, ...]
    # transfer[i] lists (j, coeff): E(monomials[i]) after one iteration is
    # sum_j coeff * E(monomials[j]) before it.
    transfer: tuple[tuple[tuple[int, Fraction], ...], ...]

    def __len__(self) -> int:
        return len(self.monomials)


def _compose_updates(core: CoreProgram) -> dict[str, Poly]:
    """End-of-iteration state as polynomials in start state and fresh draws."""
    binary = core.binary_symbols
    env = {name: Poly.variable(name) for name in core.state_vars}
    for target, update in core.updates:
        env[target] = update.substitute(env, binary)
    return env


def _expected_over_draws(poly: Poly, draw_dists: dict[str, DistributionSpec]) -> Poly:
    """Integrate out fresh-draw symbols (independent of state and each other)."""
    out: dict[Monomial, Fraction] = {}
    for mono, coeff in poly.terms.items():
        state_part = []
        factor = coeff
        for name, exp in mono:
            if name in draw_dists:
                factor *= raw_moment(draw_dists[name], exp)
            else:
                state_part.append((name, exp))
        if factor == 0:
            continue
        key = tuple(state_part)
        out[key] = out.get(key, Fraction(0)) + factor
    return Poly(out)


def closure_basis(core: CoreProgram, var: str, m: int,
                  cap: int = DEFAULT_CLOSURE_CAP) -> MonomialBasis:
    """Fixpoint of expectation pullback starting from ``var**1..var**m``.

    Raises ClosureExceeded when more than ``cap`` monomials appear, which
    signals a program whose moments do not satisfy finite linear
    recurrences (e.g. superlinear self-updates).
    """
    if var not in core.state_vars:
        raise UnknownVariable(f"no state variable {var!r}")
    if m < 1:
        raise ValueError("m must be >= 1")
    composed = _compose_updates(core)
    draw_dists = {d.name: d.dist for d in core.draws}
    binary = core.binary_symbols

    pending: list[Monomial] = [((var, k),) for k in range(m, 0, -1)]
    known: set[Monomial] = {UNIT, *pending}
    rows: dict[Monomial, Poly] = {}
    while pending:
        mono = pending.pop()
        product = Poly.number(1)
        for name, exp in mono:
            product = (product * composed[name].pow(exp, binary)).reduce_binary(binary)
        row = _expected_over_draws(product, draw_dists)
        rows[mono] = row
        for new in row.terms:
            if new not in known:
                known.add(new)
                pending.append(new)
                if len(known) > cap:
                    raise ClosureExceeded(cap, len(known))
    ordered = [UNIT] + sorted(k for k in known if k != UNIT)
    rows[UNIT] = Poly.number(1)
    index = {mono: i for i, mono in enumerate(ordered)}
    transfer = tuple(
        tuple(sorted((index[t], c) for t, c in rows[mono].terms.items()))
        for mono in ordered
    )
    return MonomialBasis(var, m, tuple(ordered), transfer)


def _initial_expectations(core: CoreProgram, basis: MonomialBasis) -> list[Fraction]:
    init_map = dict(core.inits)
    values = []
    for mono in basis.monomials:
        v = Fraction(1)
        for name, exp in mono:
            init = init_map[name]
            if isinstance(init, DistributionSpec):
                v *= raw_moment(init, exp)
            else:
                v *= init ** exp
        values.append(v)
    return values


def propagate(core: CoreProgram, basis: MonomialBasis, n: int) -> MomentSet:
    """Iterate the expectation-update map ``n`` times from the init block."""
    if n < 0:
        raise ValueError("n must be >= 0")
    exact = len(basis) <= RATIONAL_BASIS_LIMIT
    state = _initial_expectations(core, basis)
    if exact:
        for _ in range(n):
            state = [
                sum((c * state[j] for j, c in row), Fraction(0))
                for row in basis.transfer
            ]
    else:
        size = len(basis)
        matrix = np.zeros((size, size))
        for i, row in enumerate(basis.transfer):
            for j, c in row:
                matrix[i, j] = float(c)
        vec = np.array([float(v) for v in state])
        for _ in range(n):
            vec = matrix @ vec
            if not np.all(np.isfinite(vec)):
                raise NumericOverflow("moment propagation overflowed binary64")
        state = list(vec)
    index = {mono: i for i, mono in enumerate(basis.monomials)}
    values = []
    for k in range(1, basis.order + 1):
        values.append(state[index[((basis.var, k),)]])
    if exact:
        for v in values:
            if not math.isfinite(float(v)):
                raise NumericOverflow("propagated moment exceeds binary64 range")
    return MomentSet(var=basis.var, n=n, values=tuple(values),
                     provenance="propagated")


def propagated_moments(core: CoreProgram, var: str, m: int, n: int,
                       cap: int = DEFAULT_CLOSURE_CAP) -> MomentSet:
    """Convenience wrapper: closure then propagation."""
    return propagate(core, closure_basis(core, var, m, cap), n)


# ---------------------------------------------------------------------------
# External moments (Algorithm input path)

_EXPR_TOKEN = re.compile(r"\s*(?:(\d+\.\d+|\d+)|([A-Za-z_]\w*)|([-+*/^()]))")


class _ExprEval:
    """Tiny arithmetic evaluator: + - * / ^, n, e, exp(...), rationals."""

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens: list[str] = []
        pos = 0
        while pos < len(text):
            m = _EXPR_TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise EvalError(f"bad character in expression: {text[pos:]!r}")
            self.tokens.append(m.group(1) or m.group(2) or m.group(3))
            pos = m.end()
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise EvalError(f"unexpected end of expression: {self.text!r}")
        self.pos += 1
        return tok

    def parse(self):
        value = self.sum()
        if self.peek() is not None:
            raise EvalError(f"trailing tokens in expression: {self.text!r}")
        return value

    def sum(self):
        value = self.product()
        while self.peek() in ("+", "-"):
            if self.next() == "+":
                value = value + self.product()
            else:
                value = value - self.product()
        return value

    def product(self):
        value = self.unary()
        while self.peek() in ("*", "/"):
            if self.next() == "*":
                value = value * self.unary()
            else:
                divisor = self.unary()
                if divisor == 0:
                    raise EvalError("division by zero")
                value = value / divisor
        return value

    def unary(self):
        if self.peek() == "-":
            self.next()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.next()
            exponent = self.unary()
            return self._pow(base, exponent)
        return base

    @staticmethod
    def _pow(base, exponent):
        if isinstance(exponent, Fraction) and exponent.denominator == 1:
            k = int(exponent)
            if isinstance(base, Fraction):
                if base == 0 and k < 0:
                    raise EvalError("zero to a negative power")
                return base ** k
            return float(base) ** k
        return float(base) ** float(exponent)

    def atom(self):
        tok = self.next()
        if tok == "(":
            value = self.sum()
            if self.next() != ")":
                raise EvalError(f"unbalanced parentheses in {self.text!r}")
            return value
        if tok == "exp":
            if self.next() != "(":
                raise EvalError("exp must be called as exp(...)")
            value = self.sum()
            if self.next() != ")":
                raise EvalError(f"unbalanced parentheses in {self.text!r}")
            return math.exp(float(value))
        if tok == "n":
            return Fraction(self.n)
        if tok == "e":
            return math.e
        if re.fullmatch(r"\d+\.\d+|\d+", tok):
            return Fraction(tok)
        raise EvalError(f"unknown token {tok!r} in expression {self.text!r}")


def eval_closed_form(expression: str, n: int) -> float:
    """Evaluate a closed-form moment expression at iteration ``n``."""
    return float(_ExprEval(expression, n).parse())


def load_moments(document: dict) -> MomentSet:
    """Build a MomentSet from an external JSON document.

    Schema: ``{"var": str, "n": int, "values": [number...]}`` or the same
    with ``"closed_form": [expr...]`` instead of values; orders are implicit
    1..len.
    """
    if not isinstance(document, dict):
        raise SchemaError("moments document must be a JSON object")
    for field in ("var", "n"):
        if field not in document:
            raise SchemaError(f"missing {field!r} field")
    var = document["var"]
    n = document["n"]
    if not isinstance(var, str):
        raise SchemaError("'var' must be a string")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise SchemaError("'n' must be a nonnegative integer")
    has_values = "values" in document
    has_closed = "closed_form" in document
    if has_values == has_closed:
        raise SchemaError("exactly one of 'values' and 'closed_form' required")
    if has_values:
        values = document["values"]
        if (not isinstance(values, list) or not values
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in values)):
            raise SchemaError("'values' must be a nonempty list of numbers")
        return MomentSet(var, n, tuple(float(v) for v in values), "external")
    forms = document["closed_form"]
    if (not isinstance(forms, list) or not forms
            or not all(isinstance(s, str) for s in forms)):
        raise SchemaError("'closed_form' must be a nonempty list of strings")
    return MomentSet(var, n, tuple(eval_closed_form(s, n) for s in forms),
                     "external")


# ---------------------------------------------------------------------------
# Validity of a would-be moment sequence


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    detail: str


def moment_validity(ms: MomentSet) -> ValidityReport:
    """Variance and Hankel positive-semidefiniteness checks.

    Necessary conditions for genuine moment sequences; failures name the
    violated minor so bad inputs are rejected before any fitting.
    """
    values = ms.float_values
    if len(values) < 2:
        raise ValueError("need at least two moments")
    variance = values[1] - values[0] ** 2
    if variance < 0:
        return ValidityReport(False, f"variance {variance:.6g} < 0")
    seq = (1.0,) + values

    def hankel(offset: int, size: int) -> np.ndarray:
        return np.array([[seq[i + j + offset] for j in range(size)]
                         for i in range(size)])

    m = len(values)
    for offset, label in ((0, "H0"), (1, "H1")):
        size = (m - offset) // 2 + 1
        matrix = hankel(offset, size)
        scale = np.sqrt(np.abs(np.diag(matrix)))
        scale[scale == 0] = 1.0
        normalized = matrix / np.outer(scale, scale)
        for k in range(1, size + 1):
            minor = float(np.linalg.det(normalized[:k, :k]))
            if minor < -1e-9:
                return ValidityReport(
                    False, f"{label} leading minor {k} is negative ({minor:.3g})")
    return ValidityReport(True, "variance and Hankel minors nonnegative")
