"""Sparse multivariate polynomials with exact rational coefficients.

Monomials are sorted ``((name, exponent), ...)`` tuples; the empty tuple is
the unit monomial.  Coefficients are ``fractions.Fraction`` so that loop
desugaring and moment propagation stay exact whenever the program constants
are rational.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

Monomial = tuple[tuple[str, int], ...]

UNIT: Monomial = ()


def monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps: dict[str, int] = dict(a)
    for name, e in b:
        exps[name] = exps.get(name, 0) + e
    return tuple(sorted(exps.items()))


def monomial_reduce(m: Monomial, binary: frozenset[str]) -> Monomial:
    """Cap exponents of 0/1-valued symbols at one (v**k == v for k >= 1)."""
    if not binary or not any(name in binary and e > 1 for name, e in m):
        return m
    return tuple((name, 1 if name in binary else e) for name, e in m)


class Poly:
    """Immutable sparse polynomial over named symbols."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        self.terms: dict[Monomial, Fraction] = {
            m: c for m, c in (terms or {}).items() if c != 0
        }

    @staticmethod
    def number(value) -> "Poly":
        return Poly({UNIT: Fraction(value)})

    @staticmethod
    def variable(name: str) -> "Poly":
        return Poly({((name, 1),): Fraction(1)})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) - c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = monomial_mul(ma, mb)
                out[m] = out.get(m, Fraction(0)) + ca * cb
        return Poly(out)

    def scale(self, factor) -> "Poly":
        f = Fraction(factor)
        return Poly({m: c * f for m, c in self.terms.items()})

    def pow(self, exponent: int, binary: frozenset[str] = frozenset()) -> "Poly":
        if exponent < 0:
            raise ValueError("negative exponent")
        result = Poly.number(1)
        for _ in range(exponent):
            result = (result * self).reduce_binary(binary)
        return result

    def reduce_binary(self, binary: frozenset[str]) -> "Poly":
        if not binary:
            return self
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            r = monomial_reduce(m, binary)
            out[r] = out.get(r, Fraction(0)) + c
        return Poly(out)

    def substitute(self, env: Mapping[str, "Poly"],
                   binary: frozenset[str] = frozenset()) -> "Poly":
        """Replace each symbol by ``env[symbol]`` (identity when absent)."""
        result = Poly()
        for m, c in self.terms.items():
            term = Poly({UNIT: c})
            for name, e in m:
                base = env.get(name)
                if base is None:
                    base = Poly.variable(name)
                term = (term * base.pow(e, binary)).reduce_binary(binary)
            result = result + term
        return result

    def variables(self) -> set[str]:
        return {name for m in self.terms for name, _ in m}

    def degree_of(self, name: str) -> int:
        deg = 0
        for m in self.terms:
            for v, e in m:
                if v == name:
                    deg = max(deg, e)
        return deg

    def constant(self) -> Fraction | None:
        """The value if the polynomial is constant, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and UNIT in self.terms:
            return self.terms[UNIT]
        return None

    def compiled(self) -> list[tuple[float, Monomial]]:
        """Float-coefficient term list for fast repeated evaluation."""
        return [(float(c), m) for m, c in sorted(self.terms.items())]

    def evaluate(self, env: Mapping[str, float]) -> float:
        total = 0.0
        for m, c in self.terms.items():
            v = float(c)
            for name, e in m:
                v *= env[name] ** e
            total += v
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly(0)"
        parts = []
        for m, c in sorted(self.terms.items()):
            mono = "*".join(f"{n}^{e}" if e > 1 else n for n, e in m)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "Poly(" + " + ".join(parts) + ")"


def poly_sum(polys: Iterable[Poly]) -> Poly:
    total = Poly()
    for p in polys:
        total = total + p
    return total
