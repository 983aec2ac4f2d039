"""Shared fixtures: corpus access, coupled-execution oracle, samplers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from momentest import dsl, engine
from momentest.poly import Poly

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"

# name -> (target variable, moments used for fitting, fixed support or None)
BENCHMARKS = {
    "stuttering": ("s", 2, None),
    "square": ("y", 2, None),
    "binomial": ("x", 2, None),
    "random_walk_1d": ("x", 2, None),
    "uniform": ("u", 6, (0.0, 1.0)),
    "vasicek": ("r", 2, (-0.8, 1.2)),
    "pdp": ("x", 3, None),
}


def corpus_text(name: str) -> str:
    return (CORPUS / f"{name}.pp").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus_programs() -> dict[str, dsl.Program]:
    return {name: dsl.parse_program(corpus_text(name)) for name in BENCHMARKS}


@pytest.fixture(scope="session")
def corpus_cores(corpus_programs) -> dict[str, dsl.CoreProgram]:
    return {name: dsl.desugar(p) for name, p in corpus_programs.items()}


# ---------------------------------------------------------------------------
# Reference interpreter with coupled draws (exact rational arithmetic)
#
# Slot numbering mirrors desugaring: statement order, and inside a guard the
# then-branch draw comes before the else-branch one.  The branch that is not
# taken still consumes its slot, which is exactly what makes the coupling
# argument work.


def _branch_slot_count(stmt: dsl.Statement) -> int:
    if isinstance(stmt, (dsl.ProbChoice, dsl.DistDraw)):
        return 1
    return 0


def _eval_expr(expr: dsl.Expr, state: dict[str, Fraction]) -> Fraction:
    if isinstance(expr, dsl.Num):
        return expr.value
    if isinstance(expr, dsl.Var):
        return state[expr.name]
    if isinstance(expr, dsl.Neg):
        return -_eval_expr(expr.operand, state)
    left = _eval_expr(expr.left, state)
    right = _eval_expr(expr.right, state)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if expr.op == "/":
        return left / right
    return left ** int(right)


class CoupledReference:
    """Executes the sugared Program on externally supplied per-slot draws."""

    def __init__(self, program: dsl.Program):
        self.program = program

    def init_state(self, init_draws: dict[int, Fraction]) -> dict[str, Fraction]:
        state: dict[str, Fraction] = {}
        slot = 0
        for name, value in self.program.inits:
            if isinstance(value, dsl.DistributionSpec):
                state[name] = init_draws[slot]
                slot += 1
            else:
                state[name] = value.value
        return state

    def step(self, state: dict[str, Fraction], draws: dict[int, Fraction]):
        cursor = 0
        for stmt in self.program.body:
            cursor = self._exec(stmt, state, draws, cursor)

    def _exec(self, stmt, state, draws, cursor: int) -> int:
        if isinstance(stmt, dsl.DetAssign):
            state[stmt.target] = _eval_expr(stmt.expr, state)
            return cursor
        if isinstance(stmt, dsl.ProbChoice):
            coin = draws[cursor]
            branch = stmt.left if coin == 1 else stmt.right
            state[stmt.target] = _eval_expr(branch, state)
            return cursor + 1
        if isinstance(stmt, dsl.DistDraw):
            state[stmt.target] = draws[cursor]
            return cursor + 1
        then_slots = _branch_slot_count(stmt.then_stmt)
        taken = state[stmt.guard] == stmt.value
        branch = stmt.then_stmt if taken else stmt.else_stmt
        offset = cursor if taken else cursor + then_slots
        self._exec(branch, state, draws, offset)
        return cursor + then_slots + _branch_slot_count(stmt.else_stmt)


def _exact_poly_eval(poly: Poly, env: dict[str, Fraction]) -> Fraction:
    total = Fraction(0)
    for mono, coeff in poly.terms.items():
        value = coeff
        for name, exp in mono:
            value *= env[name] ** exp
        total += value
    return total


def coupled_trajectories(program: dsl.Program, core: dsl.CoreProgram,
                         seed: int, iterations: int):
    """(reference, desugared) per-iteration states under shared draws."""
    reference = CoupledReference(program)
    counter = 0
    init_draws: dict[int, Fraction] = {}
    core_state: dict[str, Fraction] = {}
    for name, init in core.inits:
        if isinstance(init, dsl.DistributionSpec):
            u = float(engine.draw_u01(np.array([seed], dtype=np.uint64), counter)[0])
            value = Fraction(float(engine.transform_draw(init, np.array([u]))[0]))
            init_draws[counter] = value
            core_state[name] = value
            counter += 1
        else:
            core_state[name] = init
    ref_state = reference.init_state(init_draws)

    ref_trace, core_trace = [], []
    for _ in range(iterations):
        draws: dict[int, Fraction] = {}
        for slot, fresh in enumerate(core.draws):
            u = engine.draw_u01(np.array([seed], dtype=np.uint64), counter)
            value = Fraction(float(engine.transform_draw(fresh.dist, u)[0]))
            draws[slot] = value
            counter += 1
        reference.step(ref_state, draws)
        env = dict(core_state)
        for slot, fresh in enumerate(core.draws):
            env[fresh.name] = draws[slot]
        for target, update in core.updates:
            env[target] = _exact_poly_eval(update, env)
            core_state[target] = env[target]
        ref_trace.append({v: ref_state[v] for v in core.state_vars
                          if v in ref_state})
        core_trace.append(dict(core_state))
    return ref_trace, core_trace


@dataclass
class CouplingOutcome:
    seeds: int
    iterations: int
    mismatches: list[str]


@pytest.fixture(scope="session")
def coupling_outcome(corpus_programs, corpus_cores) -> CouplingOutcome:
    """Exact trajectory comparison: 7 programs x 100 seeds x 50 iterations."""
    mismatches: list[str] = []
    seeds, iterations = 100, 50
    for name, program in corpus_programs.items():
        core = corpus_cores[name]
        for seed in range(seeds):
            ref, got = coupled_trajectories(program, core, seed * 7919 + 17,
                                            iterations)
            for t, (a, b) in enumerate(zip(ref, got)):
                for var, value in a.items():
                    if b[var] != value:
                        mismatches.append(
                            f"{name} seed={seed} iter={t + 1} var={var}")
    return CouplingOutcome(seeds, iterations, mismatches)


# ---------------------------------------------------------------------------
# Sampling from a fitted estimate (inverse CDF on a fine grid)


def estimate_sampler(est, grid: int = 4096):
    from momentest.estimate import cdf_eval, total_mass

    lower, upper = est.support
    xs = np.linspace(lower, upper, grid + 1)
    cdf = np.asarray(cdf_eval(est, xs)) / total_mass(est)
    cdf, idx = np.unique(cdf, return_index=True)
    xs = xs[idx]

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return np.interp(rng.random(size), cdf, xs)

    return draw
