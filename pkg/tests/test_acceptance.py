"""Acceptance suite: the gate criteria, one test (or pair) per criterion.

The two full-size table cells are Monte Carlo at the published sample
sizes and take a few hours of single-core time; everything else is
seconds to minutes.  Stochastic criteria allow one reseeded retry, as
specified, before failing.
"""

import random
import time
from fractions import Fraction

import pytest

from superfix.engine import Outcome
from superfix.exactsolve import classic_moran, exact_fixation_full
from superfix.experiments import estimate_fixation
from superfix.fastlumped import estimate_fixation_fast, run_superstar_fast
from superfix.graphs import SuperstarSpec, build_complete, build_superstar
from superfix.lumped import (
    all_mutant_state,
    initial_lumped_state,
    lumped_step_distribution,
    run_lumped_superstar,
)
from superfix.restricted import (
    CENTRE,
    crossover_root,
    limit_h,
    solve_restricted,
    solve_restricted_all,
    theorem_bound,
    transition_terms,
)
from superfix.stats import agresti_coull

import test_lumped
import test_restricted


# --- criterion 1: full solver vs the well-mixed closed form -------------

def test_acceptance_1_complete_graph_oracle():
    start = time.perf_counter()
    for n in range(2, 9):
        for r in (Fraction(1, 2), 1, 2, 3):
            value = exact_fixation_full(build_complete(n), r, mode="exact")
            expected = classic_moran(n, r)
            assert value == expected, (n, r)
    assert time.perf_counter() - start < 10.0


# --- criterion 2: golden transition system and its centre component -----

def test_acceptance_2_golden_equations_and_centre_value():
    start = time.perf_counter()
    # every generated equation equals the hand-transcribed reference
    for params in [(10, 10, 2), (3, 7, Fraction(5, 2)), (200, 200, 5)]:
        test_restricted.test_generated_terms_match_reference(*params)
    # the centre-only component solves to r/(r+L) exactly
    rng = random.Random(20260826)
    for _ in range(10):
        L = rng.randint(1, 10 ** 6)
        r = Fraction(rng.randint(1, 400), rng.randint(1, 40))
        M = rng.randint(1, 1000)
        sol = solve_restricted_all(L, M, r)
        assert sol[frozenset({CENTRE})] == r / (r + L)
    assert time.perf_counter() - start < 5.0


# --- criterion 3: convergence of the finite chain to the limit ----------

@pytest.mark.parametrize("r", [2, 5])
def test_acceptance_3_limit_convergence(r):
    start = time.perf_counter()
    target = limit_h(r)
    gaps = []
    for L in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
        gaps.append(abs(solve_restricted(L, L, r) - target))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < Fraction(1, 1000)
    assert time.perf_counter() - start < 60.0


# --- criterion 4: amplification crossover ------------------------------

def test_acceptance_4_crossover():
    start = time.perf_counter()
    root = crossover_root()
    assert 1.41 < root < 1.42

    def poly(r):
        return r ** 6 - r ** 5 - r - 1

    assert poly(root - 1e-6) < 0 < poly(root + 1e-6)
    assert time.perf_counter() - start < 1.0


# --- criterion 5: three engines against the full solver -----------------

def test_acceptance_5_cross_engine_equivalence():
    start = time.perf_counter()
    spec = SuperstarSpec(k=5, leaves=2, reservoir=2)
    graph = build_superstar(spec)
    exact = exact_fixation_full(graph, 2.0, mode="float")
    runs = 10 ** 5
    for engine, seed in (("naive", 51), ("event", 52), ("lumped", 53)):
        target = spec if engine == "lumped" else graph
        est = estimate_fixation(target, 2.0, runs, seed, engine=engine)
        assert est.ci.contains(exact), (engine, est.ci, exact)
    assert time.perf_counter() - start < 300.0


# --- criterion 6: published table cells at published sample sizes -------

def _cell_with_retry(k, r, runs, master_seed, printed):
    """One reseeded retry on CI non-overlap, per the stochastic protocol."""
    spec = SuperstarSpec(k=k, leaves=200, reservoir=200)
    est = estimate_fixation_fast(spec, r, runs=runs, master_seed=master_seed)
    if not (est.ci.lo <= printed[1] and est.ci.hi >= printed[0]):
        est = estimate_fixation_fast(spec, r, runs=runs,
                                     master_seed=master_seed + 1)
    return est


@pytest.fixture(scope="module")
def table_cell_k5():
    return _cell_with_retry(5, 2.0, 2500, 20260826, (0.923, 0.950))


def test_acceptance_6_table_cell_k5_r2(table_cell_k5):
    est = table_cell_k5
    assert est.trials == 2500
    assert est.ci.lo <= 0.950 and est.ci.hi >= 0.923, est.ci


def test_acceptance_6_table_cell_k3_r10():
    est = _cell_with_retry(3, 10.0, 10000, 20260827, (0.991, 0.995))
    assert est.trials == 10000
    assert est.ci.lo <= 0.995 and est.ci.hi >= 0.991, est.ci


# --- criterion 7: published confidence intervals -----------------------

@pytest.mark.parametrize("successes,printed", [
    (620, (0.225, 0.273)),
    # known red: with exactly 2180 successes the upper endpoint is
    # 0.889630, which is 6.3e-4 from the reference 0.889 and rounds to
    # 0.890.  The reference interval corresponds to 2179 successes (whose
    # proportion also displays as 0.872); see the companion test below.
    (2180, (0.852, 0.889)),
    (2345, (0.923, 0.950)),
])
def test_acceptance_7_interval_reproduction(successes, printed):
    start = time.perf_counter()
    ci = agresti_coull(successes, 2500, confidence=0.995)
    for got, want in ((ci.lo, printed[0]), (ci.hi, printed[1])):
        assert abs(round(got, 3) - want) < 5e-4, (got, want)
    assert time.perf_counter() - start < 1.0


def test_acceptance_7_companion_consistent_success_count():
    """2179/2500 (displayed proportion 0.872) reproduces the reference
    interval [0.852, 0.889] exactly at 3 decimals, locating the
    discrepancy above in the reconstructed success count, not in the
    interval computation."""
    ci = agresti_coull(2179, 2500, confidence=0.995)
    assert round(ci.lo, 3) == 0.852
    assert round(ci.hi, 3) == 0.889
    assert round(2179 / 2500, 3) == 0.872


# --- criterion 8: the upper bound against measurement and 1 - 2^-5 ------

def test_acceptance_8_upper_bound_consistency(table_cell_k5):
    bound = theorem_bound(200, 200, 2)
    assert table_cell_k5.ci.lo <= float(bound)
    for L in (10 ** 4, 10 ** 5):
        assert theorem_bound(L, L, 2) < Fraction(31, 32)


# --- criterion 9: property suites ---------------------------------------

def test_acceptance_9_conservation_randomized():
    start = time.perf_counter()
    rng = random.Random(9)
    specs = [SuperstarSpec(k=5, leaves=2, reservoir=2),
             SuperstarSpec(k=3, leaves=3, reservoir=2),
             SuperstarSpec(k=4, leaves=2, reservoir=3)]
    checked = 0
    while checked < 10 ** 4:
        spec = rng.choice(specs)
        centre = rng.randint(0, 1)
        leaves = tuple((rng.randint(0, spec.reservoir),
                        tuple(rng.randint(0, 1)
                              for _ in range(spec.chain_len)))
                       for _ in range(spec.leaves))
        state = test_lumped.LumpedSuperstarState(centre, leaves)
        count = state.mutant_count
        for target, prob in lumped_step_distribution(spec, state,
                                                     Fraction(2)).items():
            assert abs(target.mutant_count - count) == 1
            assert 0 < prob <= 1
            checked += 1
    assert time.perf_counter() - start < 300.0


def test_acceptance_9_absorption_correctness():
    spec = SuperstarSpec(k=5, leaves=2, reservoir=2)
    full = all_mutant_state(spec)
    empty = test_lumped.LumpedSuperstarState(
        0, ((0, (0,) * spec.chain_len),) * spec.leaves)
    for runner in (run_lumped_superstar, run_superstar_fast):
        assert runner(spec, full, 2.0, 1).result is Outcome.FIXATION
        assert runner(spec, full, 2.0, 1).steps_total == 0
        assert runner(spec, empty, 2.0, 1).result is Outcome.EXTINCTION
    # every completed run ends in one of the two absorbing outcomes
    init = initial_lumped_state(spec, 1, leaf=0)
    for seed in range(200):
        out = run_superstar_fast(spec, init, 2.0, seed)
        assert out.result in (Outcome.FIXATION, Outcome.EXTINCTION)


def test_acceptance_9_lumped_law_exhaustive():
    """Single-step law of the lumped chain equals the projected full
    chain on every occupancy state of the (k=5, 2 leaves, 2 reservoir)
    superstar, in exact arithmetic."""
    start = time.perf_counter()
    spec = SuperstarSpec(k=5, leaves=2, reservoir=2)
    n = spec.n
    r = Fraction(2)
    for mask in range(1, (1 << n) - 1):
        lumped = test_lumped.project_mask(spec, mask)
        expected = test_lumped.full_effective_distribution(spec, mask, r)
        got = lumped_step_distribution(spec, lumped, r)
        assert got == expected, mask
    assert time.perf_counter() - start < 300.0


def test_acceptance_9_determinism():
    spec = SuperstarSpec(k=4, leaves=3, reservoir=3)
    init = initial_lumped_state(spec, 1, leaf=1)
    for runner in (run_lumped_superstar, run_superstar_fast):
        first = runner(spec, init, 2.0, 77)
        assert runner(spec, init, 2.0, 77) == first
    a = estimate_fixation(spec, 2.0, 300, 5, engine="leafskip")
    b = estimate_fixation(spec, 2.0, 300, 5, engine="leafskip")
    assert (a.fixations, a.trials) == (b.fixations, b.trials)
