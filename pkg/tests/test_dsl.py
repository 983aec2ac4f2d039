"""Parser, validation and desugaring behavior."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from momentest import dsl, engine
from momentest.errors import (
    DesugarUnsupported,
    DuplicateInit,
    ParseError,
    UndefinedVariable,
)
from momentest.poly import Poly

from conftest import BENCHMARKS, corpus_text


# ---------------------------------------------------------------------------
# parse_program


def test_parse_vasicek_shape():
    program = dsl.parse_program(corpus_text("vasicek"))
    assert len(program.inits) == 5
    assert len(program.body) == 2
    assert isinstance(program.body[0], dsl.DistDraw)
    assert isinstance(program.body[1], dsl.DetAssign)


def test_parse_minimal_choice():
    program = dsl.parse_program("x:=0 while true { x := x+1 [0.5] x }")
    assert len(program.body) == 1
    stmt = program.body[0]
    assert isinstance(stmt, dsl.ProbChoice)
    assert stmt.prob.value == Fraction(1, 2)


def test_parse_requires_loop():
    with pytest.raises(ParseError):
        dsl.parse_program("x := x+1")


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as excinfo:
        dsl.parse_program("x := 0\nwhile true { x := + }")
    assert excinfo.value.line == 2
    assert excinfo.value.expected


def test_parse_undefined_variable():
    with pytest.raises(UndefinedVariable):
        dsl.parse_program("x := 0 while true { x := x + y }")


def test_parse_duplicate_init():
    with pytest.raises(DuplicateInit):
        dsl.parse_program("x := 0 x := 1 while true { x := x }")


def test_parse_body_variable_usable_after_assignment():
    program = dsl.parse_program(
        "x := 0 while true { k := x + 1 x := k }")
    assert len(program.body) == 2


def test_parse_fraction_and_comment():
    program = dsl.parse_program(
        "# leading comment\nx := 1/2\nwhile true { x := x/2 }  # trailing")
    assert program.inits[0][1].value == Fraction(1, 2)


def test_parse_is_deterministic():
    text = corpus_text("pdp")
    assert dsl.parse_program(text) == dsl.parse_program(text)


# ---------------------------------------------------------------------------
# pretty_print round trip


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_pretty_print_round_trip(name):
    program = dsl.parse_program(corpus_text(name))
    assert dsl.parse_program(dsl.pretty_print(program)) == program


def test_pretty_print_preserves_guard():
    program = dsl.parse_program(corpus_text("pdp"))
    text = dsl.pretty_print(program)
    assert "if s = 0" in text
    assert "@binary s" in text


# ---------------------------------------------------------------------------
# validate


def test_validate_vasicek_clean(corpus_programs):
    report = dsl.validate(corpus_programs["vasicek"])
    assert report.ok
    assert report.propagation_eligible
    assert not report.warnings


def test_validate_guard_needs_binary_declaration():
    text = corpus_text("pdp").replace("@binary s\n", "")
    report = dsl.validate(dsl.parse_program(text))
    assert not report.ok
    assert any("binary" in issue.message for issue in report.errors)


def test_validate_uniform_bounds():
    program = dsl.parse_program("x := 0 while true { x := Uniform(2, 1) }")
    report = dsl.validate(program)
    assert any("lo < hi" in issue.message for issue in report.errors)


def test_validate_probability_range():
    program = dsl.parse_program("x := 0 while true { x := x [1.5] x+1 }")
    report = dsl.validate(program)
    assert not report.ok


def test_validate_unused_variable_warning():
    program = dsl.parse_program("x := 0 z := 3 while true { x := x + 1 }")
    report = dsl.validate(program)
    assert report.ok
    assert any("unused" in issue.message for issue in report.warnings)


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_validate_corpus_eligible(corpus_programs, name):
    report = dsl.validate(corpus_programs[name])
    assert report.ok
    assert report.propagation_eligible


def test_validate_superlinear_self_update_ineligible():
    program = dsl.parse_program(
        "x := 2 w := 0 while true {"
        " w := Normal(0, 1)"
        " x := x - 0.25*x^3 - 0.05*x^2*w }")
    report = dsl.validate(program)
    assert report.ok
    assert not report.propagation_eligible


def test_validate_nonlinear_acyclic_is_eligible():
    report = dsl.validate(dsl.parse_program(corpus_text("square")))
    assert report.propagation_eligible


# ---------------------------------------------------------------------------
# desugar


def test_desugar_choice_simplifies():
    program = dsl.parse_program("x := 0 while true { x := x+1 [0.3] x }")
    core = dsl.desugar(program)
    target, update = core.updates[0]
    assert target == "x"
    assert update == Poly.variable("x") + Poly.variable("#d0")
    assert core.draws[0].dist.kind == "Bernoulli"
    assert core.draws[0].dist.values() == (Fraction(3, 10),)


def test_desugar_deterministic_program_has_no_draws():
    core = dsl.desugar(dsl.parse_program("x := 1 while true { x := x + 1 }"))
    assert core.draws == ()


def test_desugar_inlines_init_constants(corpus_cores):
    core = corpus_cores["vasicek"]
    assert core.state_vars == ("w", "r")
    target, update = core.updates[1]
    assert target == "r"
    # r := (1-a)r + ab + sigma*w with a=0.5, b=0.2, sigma=0.2 folded in.
    expected = (Poly.variable("r").scale(Fraction(1, 2))
                + Poly.number(Fraction(1, 10))
                + Poly.variable("w").scale(Fraction(1, 5)))
    assert update == expected
    assert core.updates[0][1] == Poly.variable("#d0")


def test_desugar_guard_enumeration():
    # Exhaustive check of the guard encoding against branch semantics:
    # for s in {0,1} and both coin outcomes the polynomial must equal the
    # value the chosen branch would assign.
    core = dsl.desugar(dsl.parse_program(
        "@binary s\ns := 0\nwhile true {"
        " if s = 0 { s := 1 [0.1] 0 } else { s := 0 [0.6] 1 } }"))
    (target, update), = core.updates
    assert target == "s"
    c_then, c_else = core.draws[0].name, core.draws[1].name
    for s, then_coin, else_coin in product((0, 1), (0, 1), (0, 1)):
        env = {"s": float(s), c_then: float(then_coin), c_else: float(else_coin)}
        got = update.evaluate(env)
        expected = float(then_coin) if s == 0 else float(1 - else_coin)
        assert got == expected


def test_desugar_mixed_guard_value():
    core = dsl.desugar(dsl.parse_program(
        "@binary s\ns := 1\nwhile true {"
        " if s = 1 { s := 0 } else { s := 1 } }"))
    (_, update), = core.updates
    # alternates: new s = 1 - s
    assert update.evaluate({"s": 0.0}) == 1.0
    assert update.evaluate({"s": 1.0}) == 0.0


def test_desugar_rejects_mismatched_branch_targets():
    program = dsl.parse_program(
        "@binary s\n@binary t\ns := 0\nt := 0\nwhile true {"
        " if s = 0 { s := 1 } else { t := 1 } }")
    with pytest.raises(DesugarUnsupported):
        dsl.desugar(program)


def test_desugar_body_only_variable_starts_at_zero(corpus_cores):
    core = corpus_cores["pdp"]
    assert dict(core.inits)["k"] == Fraction(0)


def test_fresh_symbols_unique_per_update(corpus_cores):
    for core in corpus_cores.values():
        seen = {}
        for target, update in core.updates:
            for name in update.variables():
                if name.startswith("#d"):
                    assert name not in seen, f"{name} reused"
                    seen[name] = target
        assert set(seen) == {d.name for d in core.draws}


# ---------------------------------------------------------------------------
# Coupled execution: Program and CoreProgram agree exactly


def test_desugar_coupling_exact(coupling_outcome):
    assert coupling_outcome.seeds == 100
    assert coupling_outcome.iterations == 50
    assert coupling_outcome.mismatches == []


def test_binary_variables_stay_binary(corpus_cores):
    core = corpus_cores["pdp"]
    observed = set()

    def sink(_t, state):
        observed.update(np.unique(state["s"]).tolist())

    keys = np.array([engine.derive_row_seed(99, i) for i in range(10_000)],
                    dtype=np.uint64)
    engine._simulate(core, 50, keys, sink=sink)
    assert observed <= {0.0, 1.0}
