"""Exact analysis of the centre-capture phase on a 5-layer superstar.

Condition on the initial mutant landing on a reservoir vertex.  Until the
centre first reproduces as a mutant, mutants can only live on five vertices:
the start vertex itself, the three chain vertices of its leaf, and the
centre.  Tracking which of those five are mutants gives a Markov chain on
the 31 nonempty subsets, with the rest of the graph entering only through
transition weights.  Solving its absorption system exactly yields the
probability q that the centre ever reproduces while mutant, which upper
bounds (together with the initial-placement term) the fixation probability
of the whole graph.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .graphs import SuperstarSpec
from .linalg import rational, solve_rational
from .stats import ConfidenceInterval, agresti_coull

# The five tracked vertices, in chain order from the start reservoir vertex
# to the centre.
START, C1, C2, C3, CENTRE = "start", "c1", "c2", "c3", "centre"
TRACKED = (START, C1, C2, C3, CENTRE)

# Absorption sentinels: WIN = centre reproduces while mutant, LOSE = mutants
# die out first.
WIN = "WIN"
LOSE = "LOSE"

State = frozenset


def all_states() -> list[State]:
    """The 31 nonempty subsets of the tracked vertices, in a fixed order
    (by size, then by chain position of the members)."""
    order = {v: i for i, v in enumerate(TRACKED)}
    subsets = []
    for mask in range(1, 32):
        s = frozenset(v for i, v in enumerate(TRACKED) if mask >> i & 1)
        subsets.append(s)
    subsets.sort(key=lambda s: (len(s), sorted(order[v] for v in s)))
    return subsets


def transition_terms(state: State, L, M, r) -> list[tuple]:
    """Outgoing transitions of one occupancy state, as (target, weight)
    pairs.  Targets are states, WIN or LOSE; weights share the common
    normalization (the one-step probability is weight / sum of weights).

    L is the leaf count, M the reservoir size per leaf.  Weights count
    fitness-weighted (reproducer, victim) pairs that change the state:
      * mutant centre reproducing at all wins outright (weight r);
      * the non-mutant centre hits the start vertex with chance 1/(LM);
      * the start vertex seeds chain slot 1 (weight r), while the other
        M-1 reservoir vertices (or all M when the start vertex is not a
        mutant) overwrite a mutant there;
      * chain slots push their type forward on mismatch (weight r for a
        mutant reproducer, 1 otherwise);
      * slot 3 converts the centre (weight r); a mutant centre is
        overwritten by whichever of the L chain ends are non-mutant.
    """
    if not state:
        raise ValueError("state must be a nonempty subset of TRACKED")
    terms: list[tuple] = []

    def go(target: State, weight) -> None:
        terms.append((target if target else LOSE, weight))

    if CENTRE in state:
        terms.append((WIN, r))
    elif START in state:
        # non-mutant centre fires (weight 1) and picks the start vertex
        # uniformly among its L*M reservoir targets
        go(state - {START}, rational(1) / (rational(L) * rational(M)))

    if START in state and C1 not in state:
        go(state | {C1}, r)
    elif START in state and C1 in state:
        go(state - {C1}, M - 1)
    elif C1 in state:
        go(state - {C1}, M)

    for src, dst in ((C1, C2), (C2, C3)):
        if src in state and dst not in state:
            go(state | {dst}, r)
        elif src not in state and dst in state:
            go(state - {dst}, 1)

    if C3 in state and CENTRE not in state:
        go(state | {CENTRE}, r)
    elif C3 in state and CENTRE in state:
        go(state - {CENTRE}, L - 1)
    elif CENTRE in state:
        go(state - {CENTRE}, L)

    return terms


@dataclass
class LinearSystem:
    """Square rational system A x = b with one row per occupancy state."""

    states: list
    matrix: list
    rhs: list

    @property
    def dimension(self) -> int:
        return len(self.states)


def build_restricted_system(L, M, r) -> LinearSystem:
    """Absorption system for the 31-state centre-capture chain.

    Row for state S:  D_S * F_S - sum_T w(S->T) * F_T = w(S->WIN), where
    D_S is the total outgoing weight.  Rows are scaled by L*M so that all
    coefficients are integral when the inputs are.
    """
    if not (rational(L) >= 1 and rational(M) >= 1):
        raise ValueError(f"need L >= 1 and M >= 1, got L={L}, M={M}")
    if not rational(r) > 0:
        raise ValueError(f"need r > 0, got {r}")
    states = all_states()
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    scale = rational(L) * rational(M)
    a = [[rational(0)] * n for _ in range(n)]
    b = [rational(0)] * n
    for i, s in enumerate(states):
        for target, w in transition_terms(s, L, M, r):
            w = rational(w) * scale
            a[i][i] += w
            if target == WIN:
                b[i] += w
            elif target != LOSE:
                a[i][index[target]] -= w
    return LinearSystem(states=states, matrix=a, rhs=b)


def solve_restricted_all(L, M, r) -> dict:
    """Exact success probability from every occupancy state."""
    system = build_restricted_system(L, M, r)
    values = solve_rational(system.matrix, system.rhs)
    for v in values:
        if not (0 <= v <= 1):
            raise ArithmeticError(f"absorption probability {v} outside [0,1]")
    return dict(zip(system.states, values))


def solve_restricted(L, M, r):
    """Exact probability q that the centre ever reproduces while mutant,
    starting from a single mutant on a reservoir vertex."""
    return solve_restricted_all(L, M, r)[frozenset({START})]


def j_of_r(r):
    """Limit bound denominator: j(r) = (2r^5 + r + 1)/(r + 1)."""
    return (2 * r**5 + r + 1) / (r + 1)


def limit_h(r):
    """Large-graph limit of q: h(r) = 2r^5 / (1 + r + 2r^5) = 1 - 1/j(r)."""
    return 2 * r**5 / (1 + r + 2 * r**5)


def initial_reservoir_miss(leaves: int, reservoir: int) -> Fraction:
    """Probability a uniformly placed initial mutant misses the reservoir:
    (1 + 3*leaves) / (1 + leaves*(reservoir + 3)) for a 5-layer superstar."""
    if leaves < 1 or reservoir < 1:
        raise ValueError("leaf count and reservoir size must be >= 1")
    return Fraction(1 + 3 * leaves, 1 + leaves * (reservoir + 3))


def theorem_bound(leaves: int, reservoir: int, r):
    """Rigorous upper bound on the fixation probability of the 5-layer
    superstar with the given size: miss probability plus q.  The raw sum is
    returned unclamped (it can exceed 1 for tiny graphs, where it is
    vacuous)."""
    return initial_reservoir_miss(leaves, reservoir) + solve_restricted(
        leaves, reservoir, r)


def crossover_root(tol: float = 1e-9) -> float:
    """Root of r^6 - r^5 - r - 1 in (1, 2): the fitness above which the
    limit bound 1 - 1/j(r) drops below 1 - r^-5."""
    def g(r: float) -> float:
        return r**6 - r**5 - r - 1

    lo, hi = 1.0, 2.0
    assert g(lo) < 0 < g(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_conditional_F(spec: SuperstarSpec, r: float, runs: int,
                           master_seed: int,
                           confidence: float = 0.995) -> "RestrictedEstimate":
    """Monte Carlo estimate of q by direct simulation of the 31-state
    centre-capture chain, starting from a mutant on the start vertex.

    Independent of the exact solver: transition probabilities are built
    from the same rule generator but sampled, not solved.
    """
    if spec.k != 5:
        raise ValueError(f"centre-capture analysis needs k=5, got k={spec.k}")
    if runs < 1:
        raise ValueError("need at least one run")
    L, M = spec.leaves, spec.reservoir
    states = all_states()
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    win_idx, lose_idx = n, n + 1
    # per-state cumulative transition table in floats
    cumw: list[list[float]] = []
    targets: list[list[int]] = []
    for s in states:
        terms = transition_terms(s, L, M, r)
        total = float(sum(float(w) for _, w in terms))
        acc, cw, tg = 0.0, [], []
        for target, w in terms:
            acc += float(w) / total
            cw.append(acc)
            if target == WIN:
                tg.append(win_idx)
            elif target == LOSE:
                tg.append(lose_idx)
            else:
                tg.append(index[target])
        cw[-1] = 1.0
        cumw.append(cw)
        targets.append(tg)

    rng = random.Random(master_seed)
    start = index[frozenset({START})]
    wins = 0
    for _ in range(runs):
        state = start
        while state < n:
            u = rng.random()
            cw = cumw[state]
            j = 0
            while cw[j] < u:
                j += 1
            state = targets[state][j]
        wins += state == win_idx
    ci = agresti_coull(wins, runs, confidence=confidence)
    return RestrictedEstimate(successes=wins, trials=runs, ci=ci,
                              master_seed=master_seed)


@dataclass(frozen=True)
class RestrictedEstimate:
    successes: int
    trials: int
    ci: ConfidenceInterval
    master_seed: int

    @property
    def q_hat(self) -> float:
        return self.successes / self.trials
