"""Fast continuous-time engine for large superstars.

The lumped discrete chain spends almost all of its effective events on one
oscillation: a leaf's reservoir group rewriting its chain-start slot back
and forth.  This engine removes that cost exactly.

Construction: give every effective event an exponential clock whose rate is
its lumped weight.  The embedded jump chain of that continuous-time process
is the discrete lumped chain, so absorption probabilities are identical.
Within a leaf, the chain-start slot is an autonomous two-state chain (up
rate r*a, down rate m-a) whose value is only *read* by other events, never
written by them.  So we keep it latent and integrate it analytically:

* the only events whose rates depend on the start slot are its writes into
  the next slot (or into the centre when the chain has length one); those
  are simulated by Poisson thinning against a bound that does not depend on
  the start slot, and each thinning candidate materializes the slot by
  sampling the closed-form two-state law from the last known value;
* leaves that are fully mutant (or fully empty) generate no events except
  reads of their chain end by the centre, so they are parked in aggregate
  counters with O(1) handling.

Bookkeeping per event is O(log leaves): two Fenwick trees select the leaf
hit by the centre, and constant-rate event classes use swap-removal sets.
All maintained totals are integer counts scaled by r, so there is no
floating-point drift in the rates.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .engine import AbsorptionOutcome, FixationEstimate, Outcome
from .graphs import SuperstarSpec
from .lumped import (
    LumpedSuperstarState,
    initial_lumped_state,
    sample_initial_class,
)
from .stats import agresti_coull

LIVE, DORM_FULL, DORM_DEAD = 0, 1, 2


@njit(cache=True)
def _fen_add(tree, i, delta):
    i += 1
    while i < tree.shape[0]:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fen_search(tree, x):
    """Largest-prefix search: smallest i with prefix(i) > x."""
    pos = 0
    n = tree.shape[0] - 1
    bit = 1
    while bit * 2 <= n:
        bit *= 2
    while bit > 0:
        nxt = pos + bit
        if nxt <= n and tree[nxt] <= x:
            pos = nxt
            x -= tree[nxt]
        bit >>= 1
    return pos  # 0-based leaf index


@njit(cache=True)
def _set_add(members, pos, size, key):
    if pos[key] >= 0:
        return size
    members[size] = key
    pos[key] = size
    return size + 1


@njit(cache=True)
def _set_remove(members, pos, size, key):
    p = pos[key]
    if p < 0:
        return size
    last = members[size - 1]
    members[p] = last
    pos[last] = p
    pos[key] = -1
    return size - 1


@njit(cache=True)
def _run_ct(ell, m, klen, r, c, a, sb, b1, seed):
    """Continuous-time leaf-skipping run.  sb holds the explicit chain
    slots 2..k-2 (klen-1 columns; unused when klen == 1).  Returns
    (fixation flag, count of realized state-changing events)."""
    np.random.seed(seed)
    lm = ell * m
    nslow = klen - 1          # explicit chain bits per leaf
    ninst = max(nslow - 1, 0)  # internal push pairs per leaf

    # Fenwick trees over a_i and m - a_i (integers stored as float64)
    fa = np.zeros(ell + 1)
    fma = np.zeros(ell + 1)
    A = 0
    for i in range(ell):
        _fen_add(fa, i, float(a[i]))
        _fen_add(fma, i, float(m - a[i]))
        A += a[i]

    # swap-removal sets over live leaves / push instances
    cand_mem = np.empty(ell, dtype=np.int64)   # k=3: single candidate set
    cand_pos = np.full(ell, -1, dtype=np.int64)
    cand0_mem = np.empty(ell, dtype=np.int64)  # k>=4: start-write bound r
    cand0_pos = np.full(ell, -1, dtype=np.int64)
    cand1_mem = np.empty(ell, dtype=np.int64)  # k>=4: start-write bound 1
    cand1_pos = np.full(ell, -1, dtype=np.int64)
    end0_mem = np.empty(ell, dtype=np.int64)   # k>=4: end slot empty
    end0_pos = np.full(ell, -1, dtype=np.int64)
    end1_mem = np.empty(ell, dtype=np.int64)   # k>=4: end slot mutant
    end1_pos = np.full(ell, -1, dtype=np.int64)
    icap = max(ell * ninst, 1)
    inst1_mem = np.empty(icap, dtype=np.int64)  # mutant slow pushes (rate r)
    inst1_pos = np.full(icap, -1, dtype=np.int64)
    inst0_mem = np.empty(icap, dtype=np.int64)  # vacant slow pushes (rate 1)
    inst0_pos = np.full(icap, -1, dtype=np.int64)
    n_cand = n_cand0 = n_cand1 = n_end0 = n_end1 = n_i1 = n_i0 = 0

    status = np.zeros(ell, dtype=np.int8)
    tlast = np.zeros(ell)
    n_df = 0
    n_dd = 0
    t = 0.0
    events = 0

    # all leaves start queued for classification
    refresh_queue = np.empty(ell, dtype=np.int64)
    nq = ell
    for i in range(ell):
        refresh_queue[i] = i

    while True:
        # ---- (re)classify touched leaves ----
        for qi in range(nq):
            i = refresh_queue[qi]
            # drop from every live set, then re-add as appropriate
            n_cand = _set_remove(cand_mem, cand_pos, n_cand, i)
            n_cand0 = _set_remove(cand0_mem, cand0_pos, n_cand0, i)
            n_cand1 = _set_remove(cand1_mem, cand1_pos, n_cand1, i)
            n_end0 = _set_remove(end0_mem, end0_pos, n_end0, i)
            n_end1 = _set_remove(end1_mem, end1_pos, n_end1, i)
            for jj in range(ninst):
                key = i * ninst + jj
                n_i1 = _set_remove(inst1_mem, inst1_pos, n_i1, key)
                n_i0 = _set_remove(inst0_mem, inst0_pos, n_i0, key)
            if status[i] == DORM_FULL:
                n_df -= 1
            elif status[i] == DORM_DEAD:
                n_dd -= 1
            status[i] = LIVE
            # dormancy: leaf content uniform and the start slot known
            full = a[i] == m and b1[i] == 1
            dead = a[i] == 0 and b1[i] == 0
            for jj in range(nslow):
                if sb[i, jj] != 1:
                    full = False
                if sb[i, jj] != 0:
                    dead = False
            if full:
                status[i] = DORM_FULL
                n_df += 1
                continue
            if dead:
                status[i] = DORM_DEAD
                n_dd += 1
                continue
            # live memberships
            if klen == 1:
                n_cand = _set_add(cand_mem, cand_pos, n_cand, i)
            else:
                if sb[i, 0] == 0:
                    n_cand0 = _set_add(cand0_mem, cand0_pos, n_cand0, i)
                else:
                    n_cand1 = _set_add(cand1_mem, cand1_pos, n_cand1, i)
                if sb[i, nslow - 1] == 1:
                    n_end1 = _set_add(end1_mem, end1_pos, n_end1, i)
                else:
                    n_end0 = _set_add(end0_mem, end0_pos, n_end0, i)
                for jj in range(ninst):
                    if sb[i, jj] != sb[i, jj + 1]:
                        key = i * ninst + jj
                        if sb[i, jj] == 1:
                            n_i1 = _set_add(inst1_mem, inst1_pos, n_i1, key)
                        else:
                            n_i0 = _set_add(inst0_mem, inst0_pos, n_i0, key)
        nq = 0

        # ---- absorption ----
        if c == 1 and n_df == ell:
            return 1, events
        if c == 0 and n_dd == ell:
            return 0, events

        # ---- total rate ----
        if klen == 1:
            # a write fires only when the start slot differs from the
            # centre, so the tight thinning bound is fit(1 - c)
            r_cand = (r if c == 0 else 1.0) * n_cand
        else:
            r_cand = r * n_cand0 + n_cand1
        r_int = r * n_i1 + n_i0
        if klen == 1:
            r_end = 0.0
        else:
            r_end = r * n_end1 if c == 0 else float(n_end0)
        if c == 1:
            r_centre = r * (lm - A) / lm
            r_dorm = float(n_dd)
        else:
            r_centre = float(A) / lm
            r_dorm = r * n_df
        total = r_cand + r_int + r_end + r_centre + r_dorm
        t += np.random.exponential() / total
        x = np.random.random() * total

        if x < r_centre:
            # centre rewrites one reservoir vertex
            if c == 1:
                i = _fen_search(fma, np.random.random() * (lm - A))
            else:
                i = _fen_search(fa, np.random.random() * A)
            if status[i] == LIVE:
                # a_i changes, so pin the start slot down first
                u = r * a[i]
                d = float(m - a[i])
                pi = u / (u + d)
                p1 = pi + (b1[i] - pi) * math.exp(-(u + d) * (t - tlast[i]))
                b1[i] = 1 if np.random.random() < p1 else 0
            # dormant leaves revive with their start slot already known
            tlast[i] = t
            if c == 1:
                a[i] += 1
                A += 1
                _fen_add(fa, i, 1.0)
                _fen_add(fma, i, -1.0)
            else:
                a[i] -= 1
                A -= 1
                _fen_add(fa, i, -1.0)
                _fen_add(fma, i, 1.0)
            events += 1
            refresh_queue[nq] = i
            nq = 1
            continue
        x -= r_centre

        if x < r_cand:
            # thinning candidate: materialize the start slot, then decide
            if klen == 1:
                i = cand_mem[int(np.random.random() * n_cand)]
            elif x < r * n_cand0:
                i = cand0_mem[int(np.random.random() * n_cand0)]
            else:
                i = cand1_mem[int(np.random.random() * n_cand1)]
            u = r * a[i]
            d = float(m - a[i])
            pi = u / (u + d)
            p1 = pi + (b1[i] - pi) * math.exp(-(u + d) * (t - tlast[i]))
            b1[i] = 1 if np.random.random() < p1 else 0
            tlast[i] = t
            accepted = False
            if klen == 1:
                # the start slot is the chain end: mismatch with the
                # centre fires at exactly the bound fit(1 - c)
                if b1[i] != c:
                    c = 1 - c
                    events += 1
                    accepted = True
            else:
                # start slot writes slot 2 on mismatch; acceptance is 0/1
                if b1[i] != sb[i, 0]:
                    sb[i, 0] = b1[i]
                    events += 1
                    accepted = True
            # rejected proposals only touched the latent slot; set
            # memberships depend on the explicit slots alone, so only a
            # newly possible dormancy forces reclassification
            if accepted or (a[i] == m and b1[i] == 1) \
                    or (a[i] == 0 and b1[i] == 0):
                refresh_queue[nq] = i
                nq = 1
            continue
        x -= r_cand

        if x < r_int:
            if x < r * n_i1:
                key = inst1_mem[int(np.random.random() * n_i1)]
            else:
                key = inst0_mem[int(np.random.random() * n_i0)]
            i = key // ninst
            jj = key % ninst
            sb[i, jj + 1] = sb[i, jj]
            events += 1
            refresh_queue[nq] = i
            nq = 1
            continue
        x -= r_int

        if x < r_end:
            # an explicit chain end rewrites the centre
            if c == 0:
                i = end1_mem[int(np.random.random() * n_end1)]
                c = 1
            else:
                i = end0_mem[int(np.random.random() * n_end0)]
                c = 0
            events += 1
            continue

        # dormant aggregate: some parked chain end rewrites the centre
        c = 1 - c
        events += 1

def run_superstar_fast(spec: SuperstarSpec, initial: LumpedSuperstarState,
                       r: float, seed: int) -> AbsorptionOutcome:
    """Run the leaf-skipping engine to absorption (k >= 3).

    steps_total counts realized state-changing events; the start-slot
    oscillations that this engine integrates out are not included, so the
    number is not comparable to the discrete engine's event count.
    """
    if spec.k < 3:
        raise ValueError("leaf-skipping engine needs k >= 3")
    initial.validate(spec)
    ell, klen = spec.leaves, spec.chain_len
    a = np.array([leaf[0] for leaf in initial.leaves], dtype=np.int64)
    b1 = np.array([leaf[1][0] for leaf in initial.leaves], dtype=np.int8)
    sb = np.zeros((ell, max(klen - 1, 1)), dtype=np.int8)
    for i, (_, bits) in enumerate(initial.leaves):
        for jj in range(klen - 1):
            sb[i, jj] = bits[jj + 1]
    res, events = _run_ct(ell, spec.reservoir, klen, float(r),
                          initial.centre, a, sb, b1, np.uint32(seed))
    return AbsorptionOutcome(Outcome.FIXATION if res else Outcome.EXTINCTION,
                             int(events), seed)


def estimate_fixation_fast(spec: SuperstarSpec, r: float, runs: int,
                           master_seed: int, confidence: float = 0.995,
                           placement: str = "uniform") -> FixationEstimate:
    """Monte Carlo fixation estimate with the leaf-skipping engine.

    Seeding and initial placement follow the same derivation as the
    reference lumped engine, so the two are interchangeable in tests.
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
        out = run_superstar_fast(spec, init, r, int(state[0]))
        fixations += out.result is Outcome.FIXATION
    ci = agresti_coull(fixations, runs, confidence=confidence)
    return FixationEstimate(fixations=fixations, trials=runs, ci=ci,
                            engine="leafskip", master_seed=master_seed)
