"""Count-based simulation of superstars.

Reservoir vertices within a leaf share the centre as their only in-neighbor
and the chain start as their only out-neighbor, so they are exchangeable:
the process only depends on how many of them are mutants.  The lumped state
is (centre type, per-leaf reservoir mutant count, per-leaf chain occupancy
bits), shrinking the state space from 2^n to something tractable while the
absorption law stays exactly that of the full process.

This module holds the reference discrete engine (one effective event per
iteration, full weight rescan) and the exact one-step transition law used
to test it.  The fast production engine lives in fastlumped.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .engine import AbsorptionOutcome, FixationEstimate, Outcome
from .graphs import SuperstarSpec
from .stats import agresti_coull


@dataclass(frozen=True)
class LumpedSuperstarState:
    """centre: 1 if the centre is a mutant; leaves: per-leaf pairs of
    (mutant reservoir count, chain occupancy bits ordered from the slot fed
    by the reservoir to the slot feeding the centre)."""

    centre: int
    leaves: tuple

    def validate(self, spec: SuperstarSpec) -> None:
        if self.centre not in (0, 1):
            raise ValueError("centre must be 0 or 1")
        if len(self.leaves) != spec.leaves:
            raise ValueError(f"expected {spec.leaves} leaves")
        for a, bits in self.leaves:
            if not 0 <= a <= spec.reservoir:
                raise ValueError(f"reservoir count {a} outside range")
            if len(bits) != spec.chain_len or any(b not in (0, 1)
                                                  for b in bits):
                raise ValueError("bad chain bits")

    @property
    def mutant_count(self) -> int:
        return self.centre + sum(a + sum(bits) for a, bits in self.leaves)

    def canonical(self) -> "LumpedSuperstarState":
        """Leaves are exchangeable; sort them for comparisons."""
        return LumpedSuperstarState(self.centre,
                                    tuple(sorted(self.leaves)))


def all_mutant_state(spec: SuperstarSpec) -> LumpedSuperstarState:
    leaf = (spec.reservoir, (1,) * spec.chain_len)
    return LumpedSuperstarState(1, (leaf,) * spec.leaves)


def initial_lumped_state(spec: SuperstarSpec, vertex_class: int,
                         leaf: int = 0) -> LumpedSuperstarState:
    """Single-mutant start.  vertex_class: 0 = centre, 1 = reservoir vertex
    of `leaf`, 2+j = chain slot j (0-based) of `leaf`."""
    empty = (0, (0,) * spec.chain_len)
    leaves = [empty] * spec.leaves
    centre = 0
    if vertex_class == 0:
        centre = 1
    elif vertex_class == 1:
        leaves[leaf] = (1, (0,) * spec.chain_len)
    else:
        j = vertex_class - 2
        bits = [0] * spec.chain_len
        bits[j] = 1
        leaves[leaf] = (0, tuple(bits))
    return LumpedSuperstarState(centre, tuple(leaves))


def lumped_step_distribution(spec: SuperstarSpec, state: LumpedSuperstarState,
                             r: Fraction) -> dict:
    """Exact one-effective-step law from `state`, as a map from canonical
    successor states to probabilities (Fractions when r is one).

    Event classes and weights:
      * centre converts an opposite-type reservoir vertex of leaf i:
        fitness(centre) * (#opposite in leaf i) / (total reservoir size);
      * leaf i's reservoir rewrites its chain start on mismatch: r * a_i
        when the start slot is empty, (m - a_i) when it is a mutant;
      * chain slot j rewrites slot j+1 on mismatch, weight fitness(slot j);
      * the chain end rewrites the centre on mismatch, weight fitness(end).
    """
    state.validate(spec)
    ell, m, klen = spec.leaves, spec.reservoir, spec.chain_len
    c = state.centre
    weights: list[tuple[LumpedSuperstarState, Fraction]] = []

    def fitness(bit: int):
        return r if bit else Fraction(1) if isinstance(r, Fraction) else 1

    def replaced(i: int, a=None, bits=None, centre=None):
        leaves = list(state.leaves)
        old_a, old_bits = leaves[i]
        leaves[i] = (old_a if a is None else a,
                     old_bits if bits is None else tuple(bits))
        return LumpedSuperstarState(c if centre is None else centre,
                                    tuple(leaves))

    for i, (a, bits) in enumerate(state.leaves):
        opp = (m - a) if c == 1 else a
        if opp:
            weights.append((replaced(i, a=a + (1 if c == 1 else -1)),
                            fitness(c) * Fraction(opp, ell * m)))
        start = bits[0]
        if start == 0 and a > 0:
            weights.append((replaced(i, bits=(1,) + bits[1:]), r * a))
        elif start == 1 and a < m:
            weights.append((replaced(i, bits=(0,) + bits[1:]), m - a))
        for j in range(klen - 1):
            if bits[j] != bits[j + 1]:
                nb = list(bits)
                nb[j + 1] = bits[j]
                weights.append((replaced(i, bits=nb), fitness(bits[j])))
        if bits[-1] != c:
            weights.append((replaced(i, centre=bits[-1]),
                            fitness(bits[-1])))

    total = sum(w for _, w in weights)
    if total == 0:
        return {}
    dist: dict = {}
    for succ, w in weights:
        key = succ.canonical()
        dist[key] = dist.get(key, Fraction(0) if isinstance(r, Fraction)
                             else 0) + w / total
    return dist


@njit(cache=True)
def _run_lumped_discrete(ell, m, klen, r, c, a, bits, seed):
    """One trajectory of the lumped chain; returns (fixation flag, events).

    Weights are rescanned every step in a fixed order; the selection pass
    repeats the same order so float associativity cannot bias the pick.
    """
    np.random.seed(seed)
    lm = ell * m
    events = 0
    while True:
        atot = 0
        for i in range(ell):
            atot += a[i]
        opp_total = lm - atot if c == 1 else atot
        wc = (r if c == 1 else 1.0) * opp_total / lm
        total = wc
        for i in range(ell):
            if bits[i, 0] == 0:
                total += r * a[i]
            else:
                total += m - a[i]
            for j in range(klen - 1):
                if bits[i, j] != bits[i, j + 1]:
                    total += r if bits[i, j] == 1 else 1.0
            if bits[i, klen - 1] != c:
                total += r if bits[i, klen - 1] == 1 else 1.0
        if total <= 0.0:
            return (1 if c == 1 else 0), events
        x = np.random.random() * total
        events += 1
        # selection pass, same order as accumulation
        if x < wc:
            # centre fires: pick victim leaf proportional to opposite count
            y = np.random.random() * opp_total
            acc = 0
            for i in range(ell):
                acc += (m - a[i]) if c == 1 else a[i]
                if y < acc:
                    a[i] += 1 if c == 1 else -1
                    break
            continue
        x -= wc
        done = False
        for i in range(ell):
            if bits[i, 0] == 0:
                w = r * a[i]
            else:
                w = float(m - a[i])
            if x < w:
                bits[i, 0] = 1 - bits[i, 0]
                done = True
                break
            x -= w
            for j in range(klen - 1):
                if bits[i, j] != bits[i, j + 1]:
                    w = r if bits[i, j] == 1 else 1.0
                    if x < w:
                        bits[i, j + 1] = bits[i, j]
                        done = True
                        break
                    x -= w
            if done:
                break
            if bits[i, klen - 1] != c:
                w = r if bits[i, klen - 1] == 1 else 1.0
                if x < w:
                    c = bits[i, klen - 1]
                    done = True
                    break
                x -= w
        if not done:
            # floating-point tail: retry the draw
            events -= 1


def _state_arrays(spec: SuperstarSpec, state: LumpedSuperstarState):
    a = np.array([leaf[0] for leaf in state.leaves], dtype=np.int64)
    bits = np.array([leaf[1] for leaf in state.leaves], dtype=np.int8)
    bits = bits.reshape(spec.leaves, spec.chain_len)
    return a, bits


def run_lumped_superstar(spec: SuperstarSpec, initial: LumpedSuperstarState,
                         r: float, seed: int) -> AbsorptionOutcome:
    """Run the reference lumped engine to absorption (k >= 3)."""
    if spec.k < 3:
        raise ValueError("lumped engine needs k >= 3; use the star path")
    initial.validate(spec)
    a, bits = _state_arrays(spec, initial)
    res, events = _run_lumped_discrete(spec.leaves, spec.reservoir,
                                       spec.chain_len, float(r),
                                       initial.centre, a, bits,
                                       np.uint32(seed))
    return AbsorptionOutcome(Outcome.FIXATION if res else Outcome.EXTINCTION,
                             int(events), seed)


def sample_initial_class(spec: SuperstarSpec, u: int) -> tuple[int, int]:
    """Map a uniform draw u in [0, n) to (vertex_class, leaf) as used by
    initial_lumped_state, matching the full-graph index layout."""
    if u == 0:
        return 0, 0
    u -= 1
    block = spec.reservoir + spec.chain_len
    leaf, pos = divmod(u, block)
    if pos < spec.reservoir:
        return 1, leaf
    return 2 + (pos - spec.reservoir), leaf


def estimate_fixation_lumped(spec: SuperstarSpec, r: float, runs: int,
                             master_seed: int, confidence: float = 0.995,
                             placement: str = "uniform") -> FixationEstimate:
    """Monte Carlo fixation estimate with the reference lumped engine.

    placement "uniform" puts the initial mutant on a uniformly random
    vertex; "reservoir" restricts it to reservoir vertices (diagnostics).
    """
    if runs < 1:
        raise ValueError("need at least one run")
    if placement not in ("uniform", "reservoir"):
        raise ValueError(f"unknown placement {placement!r}")
    fixations = 0
    n = spec.n
    for i in range(runs):
        ss = np.random.SeedSequence(master_seed, spawn_key=(i,))
        state = ss.generate_state(2, dtype=np.uint32)
        if placement == "uniform":
            cls, leaf = sample_initial_class(spec, int(state[1]) % n)
        else:
            cls, leaf = 1, (int(state[1]) % spec.leaves)
        init = initial_lumped_state(spec, cls, leaf)
        out = run_lumped_superstar(spec, init, r, int(state[0]))
        fixations += out.result is Outcome.FIXATION
    ci = agresti_coull(fixations, runs, confidence=confidence)
    return FixationEstimate(fixations=fixations, trials=runs, ci=ci,
                            engine="lumped", master_seed=master_seed)
