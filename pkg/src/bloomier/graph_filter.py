"""Bloomier filter built over an acyclic random graph.

Keys become edges (h1(x), h2(x)) of a graph on ceil(c*n) vertices; once an
attempt produces a simple acyclic graph, the table g is solved by
back-substitution so that for every stored key

    (g[h1(x)] + g[h2(x)] + h3(x)) mod m == f(x).

Queries evaluate the same sum and answer bottom whenever the residue falls
outside [0, 2^k).  A mutable variant additionally retains the graph so a
single value change only re-solves the connected component containing it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import BuildError, InputError, UnknownKeyError
from .field import exact_fraction
from .hashing import H3_INDEX, HashSpec, _as_bytes


@dataclass(frozen=True)
class GraphParams:
    """Build parameters for the graph scheme.

    c is the vertex-expansion ratio (> 2, interpreted as an exact decimal);
    m the table ring modulus; k the value bit-width with 2^k <= m.
    component_cap applies to mutable builds only; None means the default
    ceil(8 * ln(max(n, 2))) is used.
    """

    m: int
    k: int
    c: Fraction = Fraction(5, 2)
    max_tries: int = 64
    component_cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", exact_fraction(self.c))
        if self.c <= 2:
            raise InputError(f"c must be > 2, got {self.c}")
        if self.m < 2 or self.m >= 1 << 63:
            raise InputError(f"m must be in [2, 2^63), got {self.m}")
        if self.k < 1 or (1 << self.k) > self.m:
            raise InputError(f"need 1 <= k with 2^k <= m, got k={self.k} m={self.m}")
        if self.max_tries < 1:
            raise InputError(f"max_tries must be >= 1, got {self.max_tries}")
        if self.component_cap is not None and self.component_cap < 1:
            raise InputError(f"component_cap must be >= 1, got {self.component_cap}")

    def table_len(self, n: int) -> int:
        return math.ceil(self.c * n)


@dataclass
class BuildGraph:
    """Candidate build graph: one edge per key, in key order."""

    vertex_count: int
    edges: list[tuple[int, int]]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.max_size = 1 if n else 0

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the components of a and b; False if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        if self.size[ra] > self.max_size:
            self.max_size = self.size[ra]
        return True


def _accept_graph(graph: BuildGraph, component_cap: int | None) -> _UnionFind | None:
    """Union-find acceptance test: simple, acyclic, components under the cap."""
    uf = _UnionFind(graph.vertex_count)
    vc = graph.vertex_count
    seen = set()
    seen_add = seen.add
    union = uf.union
    for u, v in graph.edges:
        if u == v:
            return None
        code = u * vc + v if u < v else v * vc + u  # unordered pair as one int
        if code in seen:
            return None
        seen_add(code)
        if not union(u, v):
            return None
    if component_cap is not None and uf.max_size > component_cap:
        return None
    return uf


def is_simple_acyclic(graph: BuildGraph) -> bool:
    """True iff the graph has no self-loops, duplicate edges, or cycles."""
    return _accept_graph(graph, None) is not None


def back_substitute(graph: BuildGraph, values: list[int], h3_values: list[int],
                    m: int) -> list[int]:
    """Solve g[u] + g[v] + h3 == f (mod m) for all edges of an acyclic graph.

    Each component is rooted at its lowest-numbered vertex, which gets 0, and
    the rest follow by BFS; isolated vertices stay 0.
    """
    targets = [(f - h3) % m for f, h3 in zip(values, h3_values)]
    adj: list[list[tuple[int, int]]] = [[] for _ in range(graph.vertex_count)]
    for i, (u, v) in enumerate(graph.edges):
        adj[u].append((v, i))
        adj[v].append((u, i))
    table = [0] * graph.vertex_count
    assigned = [False] * graph.vertex_count
    for root in range(graph.vertex_count):
        if assigned[root] or not adj[root]:
            continue
        assigned[root] = True
        queue = deque([root])
        while queue:
            w = queue.popleft()
            gw = table[w]
            for nbr, ei in adj[w]:
                if assigned[nbr]:
                    if (gw + table[nbr]) % m != targets[ei]:
                        raise AssertionError(
                            "conflicting assignment: the graph contains a cycle")
                    continue
                table[nbr] = (targets[ei] - gw) % m
                assigned[nbr] = True
                queue.append(nbr)
    return table


def _normalize_pairs(pairs, k: int) -> tuple[list[bytes], list[int]]:
    keys, values = [], []
    seen = set()
    limit = 1 << k
    for key, value in pairs:
        kb = _as_bytes(key)
        if kb in seen:
            raise InputError(f"duplicate key: {kb!r}")
        seen.add(kb)
        if not 0 <= value < limit:
            raise InputError(f"value {value} outside [0, 2^{k})")
        keys.append(kb)
        values.append(value)
    return keys, values


def _edge(h1: HashSpec, h2: HashSpec, kb: bytes) -> tuple[int, int]:
    """Key's edge as a uniform pair of distinct vertices.

    h2 draws from one slot fewer and skips past h1's vertex, so self-loops
    cannot occur; the acyclicity probability exp(1/c) sqrt((c-2)/c) holds for
    exactly this loopless model.
    """
    u = h1(kb)
    v = h2(kb)
    if v >= u:
        v += 1
    return u, v


class GraphFilter:
    """Immutable query structure for the graph scheme."""

    scheme_id = 1

    def __init__(self, table: list[int], params: GraphParams, n: int,
                 master_seed: int, attempt: int, attempts: int | None = None):
        self.table = table
        self.params = params
        self.n = n
        self.master_seed = master_seed
        self.attempt = attempt
        self.attempts = attempts if attempts is not None else attempt + 1
        self.m = params.m
        self.k = params.k
        if len(table) >= 2:
            self._h1 = HashSpec(master_seed, 2 * attempt, len(table))
            self._h2 = HashSpec(master_seed, 2 * attempt + 1, len(table) - 1)
        else:
            self._h1 = self._h2 = None
        self._h3 = HashSpec(master_seed, H3_INDEX, params.m)

    @property
    def table_len(self) -> int:
        return len(self.table)

    def query(self, key) -> int | None:
        """Stored keys return f(key); others return None unless the residue
        happens to land in [0, 2^k)."""
        kb = _as_bytes(key)
        if self._h1 is not None:
            u, v = _edge(self._h1, self._h2, kb)
            y = (self.table[u] + self.table[v] + self._h3(kb)) % self.m
        else:
            y = self._h3(kb)
        return y if y < (1 << self.k) else None


class MutableGraphFilter(GraphFilter):
    """Graph filter that retains its edges so stored values can be changed.

    update_value re-solves only the connected component containing the key's
    edge; all other components keep their bytes untouched.
    """

    def __init__(self, table, params, n, master_seed, attempt, edges,
                 component_cap: int, uf: _UnionFind, attempts=None):
        super().__init__(table, params, n, master_seed, attempt, attempts)
        self.edges = edges
        self.component_cap = component_cap
        self._edge_index = {}
        for i, (u, v) in enumerate(edges):
            self._edge_index[(u, v) if u < v else (v, u)] = i
        self.component_of = [uf.find(v) for v in range(len(table))]
        self._component_edges: dict[int, list[int]] = {}
        for i, (u, v) in enumerate(edges):
            self._component_edges.setdefault(self.component_of[u], []).append(i)

    def component_size(self, vertex: int) -> int:
        root = self.component_of[vertex]
        return sum(1 for v in range(len(self.table))
                   if self.component_of[v] == root)

    def update_value(self, key, new_value: int) -> None:
        """Change the stored value for ``key``; the key set itself is static."""
        if not 0 <= new_value < (1 << self.k):
            raise InputError(f"value {new_value} outside [0, 2^{self.k})")
        kb = _as_bytes(key)
        u, v = _edge(self._h1, self._h2, kb)
        pair = (u, v) if u < v else (v, u)
        ei = self._edge_index.get(pair)
        if ei is None:
            raise UnknownKeyError(f"key {kb!r} is not in the stored support")
        root = self.component_of[u]
        edge_ids = self._component_edges[root]
        # Per-edge targets are recoverable from the current table; only the
        # updated key needs a fresh hash evaluation.
        targets = {}
        for e in edge_ids:
            a, b = self.edges[e]
            targets[e] = (self.table[a] + self.table[b]) % self.m
        targets[ei] = (new_value - self._h3(kb)) % self.m
        # Re-run back-substitution within the component, rooted at its
        # lowest-numbered vertex.
        adj: dict[int, list[tuple[int, int]]] = {}
        for e in edge_ids:
            a, b = self.edges[e]
            adj.setdefault(a, []).append((b, e))
            adj.setdefault(b, []).append((a, e))
        comp_root = min(adj)
        self.table[comp_root] = 0
        assigned = {comp_root}
        queue = deque([comp_root])
        while queue:
            w = queue.popleft()
            gw = self.table[w]
            for nbr, e in adj[w]:
                if nbr in assigned:
                    continue
                self.table[nbr] = (targets[e] - gw) % self.m
                assigned.add(nbr)
                queue.append(nbr)


def _generate_graph(keys: list[bytes], vertex_count: int, master_seed: int,
                    attempt: int) -> BuildGraph:
    h1 = HashSpec(master_seed, 2 * attempt, vertex_count)
    h2 = HashSpec(master_seed, 2 * attempt + 1, vertex_count - 1)
    return BuildGraph(vertex_count, [_edge(h1, h2, k) for k in keys])


def _build(pairs, params: GraphParams, master_seed: int,
           component_cap: int | None):
    keys, values = _normalize_pairs(pairs, params.k)
    n = len(keys)
    vertex_count = params.table_len(n)
    if n == 0:
        return n, [], 0, 1, BuildGraph(vertex_count, []), _UnionFind(vertex_count)
    for attempt in range(params.max_tries):
        graph = _generate_graph(keys, vertex_count, master_seed, attempt)
        uf = _accept_graph(graph, component_cap)
        if uf is not None:
            break
    else:
        raise BuildError(
            f"no acceptable graph in {params.max_tries} attempts "
            f"(n={n}, c={params.c}, component_cap={component_cap})",
            attempts=params.max_tries)
    h3 = HashSpec(master_seed, H3_INDEX, params.m)
    table = back_substitute(graph, values, [h3(k) for k in keys], params.m)
    return n, table, attempt, attempt + 1, graph, uf


def build(pairs, params: GraphParams, master_seed: int) -> GraphFilter:
    """Build an immutable graph filter for the given (key, value) pairs."""
    n, table, attempt, attempts, _, _ = _build(pairs, params, master_seed, None)
    return GraphFilter(table, params, n, master_seed, attempt, attempts)


def build_mutable(pairs, params: GraphParams, master_seed: int) -> MutableGraphFilter:
    """Build a graph filter that additionally supports update_value."""
    pairs = list(pairs)
    n = len(pairs)
    cap = params.component_cap
    if cap is None:
        cap = math.ceil(8 * math.log(max(n, 2)))
    _, table, attempt, attempts, graph, uf = _build(pairs, params, master_seed, cap)
    return MutableGraphFilter(table, params, n, master_seed, attempt,
                              graph.edges, cap, uf, attempts)


def query(filt: GraphFilter, key) -> int | None:
    """Module-level alias for GraphFilter.query."""
    return filt.query(key)
