"""Sampling engine: determinism, seeding, empirical moments."""

import math

import numpy as np
import pytest

from momentest import dsl, engine
from momentest.errors import NumericOverflow, UnknownVariable

from conftest import corpus_text


@pytest.fixture(scope="module")
def vasicek_core():
    return dsl.desugar(dsl.parse_program(corpus_text("vasicek")))


@pytest.fixture(scope="module")
def counter_core():
    return dsl.desugar(dsl.parse_program("x := 1 while true { x := x + 1 }"))


# ---------------------------------------------------------------------------
# run_once


def test_run_once_deterministic_program(counter_core):
    assert engine.run_once(counter_core, 5, 42)["x"] == 6.0


def test_run_once_zero_iterations(vasicek_core):
    state = engine.run_once(vasicek_core, 0, 1)
    assert state == {"w": 0.0, "r": 2.0}


def test_run_once_repeatable(vasicek_core):
    a = engine.run_once(vasicek_core, 100, 987654321)
    b = engine.run_once(vasicek_core, 100, 987654321)
    assert a == b


def test_run_once_seed_sensitivity(vasicek_core):
    a = engine.run_once(vasicek_core, 100, 1)
    b = engine.run_once(vasicek_core, 100, 2)
    assert a != b


def test_overflow_raises():
    core = dsl.desugar(dsl.parse_program("x := 10 while true { x := x*x }"))
    with pytest.raises(NumericOverflow) as excinfo:
        engine.run_once(core, 20, 0)
    assert excinfo.value.iteration is not None


# ---------------------------------------------------------------------------
# sample


def test_sample_shape_and_columns(vasicek_core):
    data = engine.sample(vasicek_core, 100, 1000, 5)
    assert data.values.shape == (1000, 2)
    assert data.var_names == ("w", "r")
    assert data.n == 100 and data.e == 1000 and data.master_seed == 5


def test_sample_master_seed_sensitivity(vasicek_core):
    a = engine.sample(vasicek_core, 10, 3, 0)
    b = engine.sample(vasicek_core, 10, 3, 1)
    assert not np.array_equal(a.values, b.values)


def test_sample_rows_match_run_once(vasicek_core):
    data = engine.sample(vasicek_core, 20, 4, 123)
    for i in range(4):
        state = engine.run_once(vasicek_core, 20, engine.derive_row_seed(123, i))
        row = {name: data.values[i, j]
               for j, name in enumerate(data.var_names)}
        assert row == state


def test_sample_reproducible_bitwise(vasicek_core):
    a = engine.sample(vasicek_core, 100, 200, 7)
    b = engine.sample(vasicek_core, 100, 200, 7)
    assert np.array_equal(a.values, b.values)


def test_sample_prefix_consistency(vasicek_core):
    # row i depends only on (master_seed, i): a bigger sample extends a
    # smaller one without changing existing rows.
    small = engine.sample(vasicek_core, 50, 10, 11)
    large = engine.sample(vasicek_core, 50, 40, 11)
    assert np.array_equal(large.values[:10], small.values)


def test_sample_overflow_reports_row():
    core = dsl.desugar(dsl.parse_program("x := 10 while true { x := x*x }"))
    with pytest.raises(NumericOverflow) as excinfo:
        engine.sample(core, 50, 8, 3)
    assert excinfo.value.row is not None


def test_csv_round_trip(tmp_path, vasicek_core):
    data = engine.sample(vasicek_core, 30, 25, 99)
    path = tmp_path / "sample.csv"
    data.to_csv(path)
    first = path.read_text().splitlines()[0]
    assert first == "# n=30 e=25 seed=99"
    loaded = engine.SampleData.from_csv(path)
    assert loaded.var_names == data.var_names
    assert np.array_equal(loaded.values, data.values)
    assert (loaded.n, loaded.e, loaded.master_seed) == (30, 25, 99)


# ---------------------------------------------------------------------------
# empirical moments


def test_empirical_moments_hand_sum(vasicek_core):
    data = engine.SampleData(("x",), np.array([[1.0], [2.0], [3.0]]), 0, 3, 0)
    ms = engine.empirical_moments(data, "x", 2)
    assert ms.values == (2.0, 14.0 / 3.0)
    assert ms.provenance == "empirical"


def test_empirical_moments_constant_column():
    data = engine.SampleData(("c",), np.full((10, 1), 3.0), 0, 10, 0)
    ms = engine.empirical_moments(data, "c", 4)
    assert ms.values == (3.0, 9.0, 27.0, 81.0)


def test_empirical_moments_unknown_variable(vasicek_core):
    data = engine.sample(vasicek_core, 1, 2, 0)
    with pytest.raises(UnknownVariable):
        engine.empirical_moments(data, "zz", 1)


def test_empirical_mean_scale_vasicek(vasicek_core):
    # |mean - 0.20| is on the 2e-3 scale at e=1000; allow 5x over 20 seeds.
    deviations = []
    for seed in range(20):
        data = engine.sample(vasicek_core, 100, 1000, seed)
        deviations.append(abs(float(data.column("r").mean()) - 0.20))
    assert np.median(deviations) <= 5 * 2.16e-3


def test_binomial_mean_convergence():
    # x(100) ~ Binomial(100, 1/2): mean 50, sigma exactly 5.  The sample
    # mean should sit within 4*sigma/sqrt(e) of 50 in >= 99of 100 runs.
    core = dsl.desugar(dsl.parse_program(corpus_text("binomial")))
    e = 1000
    bound = 4.0 * 5.0 / math.sqrt(e)
    hits = 0
    for seed in range(100):
        data = engine.sample(core, 100, e, seed)
        if abs(float(data.column("x").mean()) - 50.0) < bound:
            hits += 1
    assert hits >= 99


# ---------------------------------------------------------------------------
# generator internals


def test_draw_u01_open_interval():
    keys = np.arange(1000, dtype=np.uint64)
    u = engine.draw_u01(keys, 0)
    assert np.all(u > 0.0) and np.all(u < 1.0)


def test_normal_quantile_accuracy():
    # spot values against the classical table and symmetry
    assert abs(engine.normal_quantile(0.5)) < 1e-12
    assert abs(engine.normal_quantile(0.975) - 1.959964) < 1e-5
    assert abs(engine.normal_quantile(0.01) + 2.326348) < 1e-5
    u = np.linspace(1e-6, 1 - 1e-6, 10001)
    q = engine.normal_quantile(u)
    assert np.allclose(q, -engine.normal_quantile(1 - u), atol=2e-8)
    assert np.all(np.diff(q) > 0)
