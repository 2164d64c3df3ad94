"""Exact fixation probabilities for small graphs.

Enumerates all 2^n occupancy states of the process and solves the absorbing
chain directly: exact rational arithmetic up to a configurable vertex cap
(costly near the cap), float64 with a residual check above that.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .graphs import DirectedGraph
from .linalg import rational, solve_float, solve_rational

EXACT_CAP = 12
FLOAT_CAP = 16
# auto mode only picks rational arithmetic while the elimination is cheap;
# exact mode remains available (and slow) up to EXACT_CAP on request
AUTO_EXACT_CAP = 9


def classic_moran(n: int, r) -> Fraction | float:
    """Fixation probability of a single mutant in the well-mixed
    population of size n: (1 - 1/r) / (1 - 1/r^n), and 1/n at r = 1."""
    if n < 2:
        raise ValueError(f"population size must be >= 2, got {n}")
    if isinstance(r, (int, Fraction)):
        r = Fraction(r)
        if r <= 0:
            raise ValueError(f"fitness must be positive, got {r}")
        if r == 1:
            return Fraction(1, n)
        return (1 - 1 / r) / (1 - 1 / r**n)
    if r <= 0:
        raise ValueError(f"fitness must be positive, got {r}")
    if r == 1.0:
        return 1.0 / n
    return (1.0 - 1.0 / r) / (1.0 - 1.0 / r**n)


def _transition_terms(g: DirectedGraph, mask: int, r):
    """One-step transitions out of occupancy state `mask`, as a list of
    (next_mask, weight) with weights proportional to probability (the
    normalizer is the total fitness times nothing extra: each reproducer is
    chosen with probability fitness/W and the victim uniformly among its
    out-neighbors; we fold the 1/outdeg into the weight)."""
    terms = []
    for u in range(g.n):
        fit = r if mask >> u & 1 else 1
        nbrs = g.out_adj[u]
        share = fit / len(nbrs) if isinstance(fit, float) else \
            rational(fit) / len(nbrs)
        for v in nbrs:
            if (mask >> u & 1) != (mask >> v & 1):
                nxt = mask ^ (1 << v)
            else:
                nxt = mask
            terms.append((nxt, share))
    return terms


def _fixation_vector_exact(g: DirectedGraph, r) -> list:
    n = g.n
    full = (1 << n) - 1
    # group states by mutant count: one-step moves only reach adjacent
    # groups, so elimination fill-in stays inside a narrow band
    transient = sorted(range(1, full), key=lambda m: m.bit_count())
    index = {m: i for i, m in enumerate(transient)}
    dim = len(transient)
    a = [[rational(0)] * dim for _ in range(dim)]
    b = [rational(0)] * dim
    r_exact = rational(Fraction(r)) if not isinstance(r, float) else None
    if r_exact is None:
        raise TypeError("exact mode needs a rational fitness")
    for mask in transient:
        i = index[mask]
        row = a[i]
        # self-loop steps drop out: x satisfies (leaving weight) * x_i =
        # sum over state-changing steps of weight * x_target
        for nxt, w in _transition_terms(g, mask, r_exact):
            if nxt == mask:
                continue
            row[i] += w
            if nxt == full:
                b[i] += w
            elif nxt != 0:
                row[index[nxt]] -= w
    x = solve_rational(a, b)
    for v in x:
        if not (0 <= v <= 1):
            raise ArithmeticError(f"fixation probability {v} outside [0,1]")
    return [x[index[1 << u]] for u in range(n)]


def _fixation_vector_float(g: DirectedGraph, r: float) -> np.ndarray:
    n = g.n
    full = (1 << n) - 1
    transient = list(range(1, full))
    index = {m: i for i, m in enumerate(transient)}
    dim = len(transient)
    a = np.zeros((dim, dim))
    b = np.zeros(dim)
    for mask in transient:
        i = index[mask]
        for nxt, w in _transition_terms(g, mask, float(r)):
            if nxt == mask:
                continue
            a[i, i] += w
            if nxt == full:
                b[i] += w
            elif nxt != 0:
                a[i, index[nxt]] -= w
    x = solve_float(a, b)
    if x.min() < -1e-9 or x.max() > 1 + 1e-9:
        raise ArithmeticError("fixation probabilities escaped [0,1]")
    return np.array([x[index[1 << u]] for u in range(n)])


def exact_fixation_full(g: DirectedGraph, r, initial: int | None = None,
                        mode: str = "auto"):
    """Fixation probability on graph g at fitness r by solving the full
    2^n absorbing chain.

    initial=None averages over a uniformly random single-mutant start;
    an integer selects that start vertex.  mode is "exact" (rational
    arithmetic, n <= 12), "float" (n <= 16, residual-checked), or "auto"
    (exact when n permits and r is rational).
    """
    if any(len(nbrs) == 0 for nbrs in g.out_adj):
        raise ValueError("graph has a vertex with no out-neighbors")
    if initial is not None and not 0 <= initial < g.n:
        raise ValueError(f"initial vertex {initial} outside [0, {g.n})")
    want_exact = (mode == "exact") or (
        mode == "auto" and g.n <= AUTO_EXACT_CAP and not isinstance(r, float))
    if mode not in ("auto", "exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    if want_exact:
        if g.n > EXACT_CAP:
            raise ValueError(
                f"exact mode capped at {EXACT_CAP} vertices, graph has {g.n}")
        vec = _fixation_vector_exact(g, r)
        if initial is not None:
            return vec[initial]
        return sum(vec, rational(0)) / g.n
    if g.n > FLOAT_CAP:
        raise ValueError(
            f"float mode capped at {FLOAT_CAP} vertices, graph has {g.n}")
    vec = _fixation_vector_float(g, float(r))
    if initial is not None:
        return float(vec[initial])
    return float(vec.mean())
