"""Directed graphs for the generalized Moran process.

Generators for the superstar family S^k_{l,m}, complete graphs and stars,
plus structural validation.  Vertex indices are dense integers in [0, n).

Superstar index layout (fixed, relied on by the lumped engine):
  vertex 0                  centre
  then leaf-major blocks of size m + (k-2):
    positions 0..m-1        reservoir vertices of the leaf
    positions m..m+k-3      chain vertices c_1..c_{k-2} of the leaf
For k = 2 each leaf block is just its m reservoir vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Role(Enum):
    CENTRE = "centre"
    RESERVOIR = "reservoir"
    CHAIN = "chain"
    PLAIN = "plain"


@dataclass(frozen=True)
class RoleTag:
    role: Role
    leaf: int = -1       # leaf index for reservoir/chain vertices
    position: int = -1   # chain position j (1-based) for chain vertices


@dataclass
class DirectedGraph:
    """Adjacency structure with out-neighbor lists.

    Immutable by convention after construction; safe to share across
    concurrent simulation runs.
    """

    n: int
    out_adj: list[list[int]]
    role_tags: list[RoleTag] | None = None
    _in_adj: list[list[int]] | None = field(default=None, repr=False)

    def out_degree(self, u: int) -> int:
        return len(self.out_adj[u])

    @property
    def arc_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.out_adj)

    def in_adj(self) -> list[list[int]]:
        """In-neighbor lists, built lazily and cached."""
        if self._in_adj is None:
            inn: list[list[int]] = [[] for _ in range(self.n)]
            for u, nbrs in enumerate(self.out_adj):
                for v in nbrs:
                    inn[v].append(u)
            self._in_adj = inn
        return self._in_adj

    def dump(self) -> str:
        """Debug arc-list format: header "n <count>", then one "u v" per line."""
        lines = [f"n {self.n}"]
        for u, nbrs in enumerate(self.out_adj):
            for v in nbrs:
                lines.append(f"{u} {v}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SuperstarSpec:
    """Parameters (k, l, m) of the superstar S^k_{l,m}.

    k is the amplification parameter (number of layers), l the number of
    leaves and m the reservoir size per leaf.
    """

    k: int
    leaves: int
    reservoir: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"superstar needs k >= 2, got {self.k}")
        if self.leaves < 1:
            raise ValueError(f"superstar needs l >= 1, got {self.leaves}")
        if self.reservoir < 1:
            raise ValueError(f"superstar needs m >= 1, got {self.reservoir}")

    @property
    def chain_len(self) -> int:
        """Chain length per leaf: k - 2 (zero for k = 2)."""
        return self.k - 2

    @property
    def n(self) -> int:
        return 1 + self.leaves * (self.reservoir + self.chain_len)

    @property
    def arc_total(self) -> int:
        if self.k == 2:
            return 2 * self.leaves * self.reservoir
        return 2 * self.leaves * self.reservoir + self.leaves * (self.k - 2)

    def vertex_of(self, leaf: int, pos: int) -> int:
        """Vertex id of position pos within a leaf block (0-based)."""
        return 1 + leaf * (self.reservoir + self.chain_len) + pos


def build_superstar(spec: SuperstarSpec) -> DirectedGraph:
    """Construct S^k_{l,m}.

    Arcs: centre -> every reservoir vertex; reservoir vertex -> c_1; chain
    arcs c_j -> c_{j+1}; c_{k-2} -> centre.  For k = 3 the chain is a single
    vertex.  For k = 2 the reservoir vertices connect directly back to the
    centre (the graph is the star K_{1,lm} with both arc directions).
    """
    ell, m, klen = spec.leaves, spec.reservoir, spec.chain_len
    n = spec.n
    out: list[list[int]] = [[] for _ in range(n)]
    tags: list[RoleTag] = [RoleTag(Role.CENTRE)] + [None] * (n - 1)  # type: ignore[list-item]
    centre = 0
    for i in range(ell):
        res = [spec.vertex_of(i, j) for j in range(m)]
        chain = [spec.vertex_of(i, m + j) for j in range(klen)]
        for v in res:
            tags[v] = RoleTag(Role.RESERVOIR, leaf=i)
            out[centre].append(v)
        for j, v in enumerate(chain):
            tags[v] = RoleTag(Role.CHAIN, leaf=i, position=j + 1)
        if klen == 0:
            for v in res:
                out[v].append(centre)
        else:
            for v in res:
                out[v].append(chain[0])
            for j in range(klen - 1):
                out[chain[j]].append(chain[j + 1])
            out[chain[-1]].append(centre)
    return DirectedGraph(n=n, out_adj=out, role_tags=tags)


def build_complete(n: int) -> DirectedGraph:
    """Complete graph K_n with arcs in both directions."""
    if n < 2:
        raise ValueError(f"complete graph needs n >= 2, got {n}")
    out = [[v for v in range(n) if v != u] for u in range(n)]
    tags = [RoleTag(Role.PLAIN)] * n
    return DirectedGraph(n=n, out_adj=out, role_tags=tags)


def build_star(n: int) -> DirectedGraph:
    """Star K_{1,n-1}: vertex 0 is the centre, arcs centre<->leaf both ways."""
    if n < 2:
        raise ValueError(f"star needs n >= 2, got {n}")
    out = [list(range(1, n))] + [[0] for _ in range(n - 1)]
    tags = [RoleTag(Role.CENTRE)] + [RoleTag(Role.PLAIN)] * (n - 1)
    return DirectedGraph(n=n, out_adj=out, role_tags=tags)


@dataclass
class ValidationReport:
    n: int
    min_out_degree: int
    strongly_connected: bool
    self_loops: list[int]
    duplicate_arcs: list[tuple[int, int]]

    @property
    def process_valid(self) -> bool:
        """True iff the Moran process is well defined and absorbs a.s."""
        return (
            self.min_out_degree >= 1
            and self.strongly_connected
            and not self.self_loops
            and not self.duplicate_arcs
        )


def _reachable(n: int, adj: list[list[int]], start: int) -> bool:
    """True iff every vertex is reachable from start."""
    seen = bytearray(n)
    seen[start] = 1
    stack = [start]
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = 1
                count += 1
                stack.append(v)
    return count == n


def validate_graph(g: DirectedGraph) -> ValidationReport:
    """Structural checks: out-degrees, strong connectivity (forward plus
    reverse reachability from vertex 0), self-loops, duplicate arcs."""
    min_deg = min((len(nbrs) for nbrs in g.out_adj), default=0)
    loops = [u for u, nbrs in enumerate(g.out_adj) if u in nbrs]
    dups: list[tuple[int, int]] = []
    for u, nbrs in enumerate(g.out_adj):
        if len(set(nbrs)) != len(nbrs):
            seen: set[int] = set()
            for v in nbrs:
                if v in seen:
                    dups.append((u, v))
                seen.add(v)
    strong = (
        g.n > 0
        and min_deg >= 1
        and _reachable(g.n, g.out_adj, 0)
        and _reachable(g.n, g.in_adj(), 0)
    )
    return ValidationReport(
        n=g.n,
        min_out_degree=min_deg,
        strongly_connected=strong,
        self_loops=loops,
        duplicate_arcs=dups,
    )
