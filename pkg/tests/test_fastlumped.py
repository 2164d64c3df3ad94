import pytest

from superfix.engine import Outcome
from superfix.exactsolve import exact_fixation_full
from superfix.fastlumped import estimate_fixation_fast, run_superstar_fast
from superfix.graphs import SuperstarSpec, build_superstar
from superfix.lumped import (
    LumpedSuperstarState,
    all_mutant_state,
    estimate_fixation_lumped,
    initial_lumped_state,
)


def test_trivial_boundary_states():
    spec = SuperstarSpec(k=5, leaves=2, reservoir=2)
    out = run_superstar_fast(spec, all_mutant_state(spec), 2.0, seed=4)
    assert out.result is Outcome.FIXATION and out.steps_total == 0
    none = LumpedSuperstarState(0, ((0, (0, 0, 0)),) * 2)
    out = run_superstar_fast(spec, none, 2.0, seed=4)
    assert out.result is Outcome.EXTINCTION and out.steps_total == 0


def test_determinism():
    spec = SuperstarSpec(k=4, leaves=3, reservoir=3)
    init = initial_lumped_state(spec, 1, leaf=1)
    assert run_superstar_fast(spec, init, 2.0, seed=88) \
        == run_superstar_fast(spec, init, 2.0, seed=88)


def test_matches_exact_small_k5():
    spec = SuperstarSpec(k=5, leaves=2, reservoir=2)
    exact = exact_fixation_full(build_superstar(spec), 2.0, mode="float")
    est = estimate_fixation_fast(spec, 2.0, runs=30000, master_seed=55)
    assert est.ci.contains(exact), (est.ci, exact)


def test_matches_exact_small_k3():
    spec = SuperstarSpec(k=3, leaves=3, reservoir=2)
    exact = exact_fixation_full(build_superstar(spec), 2.0, mode="float")
    est = estimate_fixation_fast(spec, 2.0, runs=30000, master_seed=56)
    assert est.ci.contains(exact), (est.ci, exact)


@pytest.mark.parametrize("k,ell,m,r", [
    (3, 5, 5, 2.0),
    (3, 4, 4, 0.5),
    (4, 4, 3, 5.0),
    (5, 3, 3, 2.0),
    (7, 3, 3, 3.0),
])
def test_agrees_with_reference_engine(k, ell, m, r):
    spec = SuperstarSpec(k=k, leaves=ell, reservoir=m)
    fast = estimate_fixation_fast(spec, r, runs=15000, master_seed=61)
    ref = estimate_fixation_lumped(spec, r, runs=15000, master_seed=62)
    assert fast.ci.overlaps(ref.ci), (k, ell, m, r, fast.ci, ref.ci)


def test_high_fitness_limits():
    spec = SuperstarSpec(k=5, leaves=4, reservoir=4)
    hi = estimate_fixation_fast(spec, 50.0, runs=3000, master_seed=70)
    lo = estimate_fixation_fast(spec, 0.05, runs=3000, master_seed=71)
    assert hi.p_hat > 0.9
    assert lo.p_hat < 0.05


def test_reservoir_placement_and_validation():
    spec = SuperstarSpec(k=3, leaves=3, reservoir=3)
    est = estimate_fixation_fast(spec, 2.0, runs=1000, master_seed=9,
                                 placement="reservoir")
    assert 0 <= est.p_hat <= 1
    with pytest.raises(ValueError):
        estimate_fixation_fast(spec, 2.0, runs=0, master_seed=1)
    with pytest.raises(ValueError):
        run_superstar_fast(SuperstarSpec(k=2, leaves=2, reservoir=2),
                           all_mutant_state(spec), 2.0, 1)
