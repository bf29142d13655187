"""Weighted graphs, instance generators, the lower-bound transform and
low out-degree orientations.

Node ids are always the dense integers ``0..n-1``.
"""
from __future__ import annotations

import heapq
import io
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, TextIO

__all__ = [
    "GraphError",
    "WeightedGraph",
    "Orientation",
    "NodeRole",
    "LowerBoundGraph",
    "exact_orientation",
    "degeneracy",
    "generate_bounded_arboricity",
    "generate_star",
    "generate_tree",
    "generate_random_graph",
    "path_graph",
    "cycle_graph",
    "complete_graph",
    "petersen_graph",
    "build_lower_bound_graph",
    "write_graph",
    "read_graph",
    "write_roles",
    "read_roles",
]


class GraphError(ValueError):
    """Raised for malformed graphs and rejected constructions."""


def weight_cap(n: int, c: int) -> int:
    # n = 1 would force every weight to 1; the cap uses max(n, 2).
    return max(n, 2) ** c


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    weights: tuple[int, ...]
    declared_alpha: int | None = None
    c: int = 3

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphError("graph needs at least one node")
        if len(self.adjacency) != self.n or len(self.weights) != self.n:
            raise GraphError("adjacency and weights must have one entry per node")
        cap = weight_cap(self.n, self.c)
        for v, w in enumerate(self.weights):
            if not isinstance(w, int) or w < 1 or w > cap:
                raise GraphError(f"weight of node {v} must be an integer in [1, {cap}]")
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphError(f"neighbor list of {v} must be sorted without repeats")
            for u in nbrs:
                if u == v:
                    raise GraphError(f"self-loop at {v}")
                if not 0 <= u < self.n:
                    raise GraphError(f"node {v} has out-of-range neighbor {u}")
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if v not in self._nbr_sets[u]:
                    raise GraphError(f"adjacency not symmetric on {{{u}, {v}}}")
        if self.declared_alpha is not None and self.declared_alpha < 0:
            raise GraphError("declared_alpha must be non-negative")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        weights: Iterable[int] | None = None,
        declared_alpha: int | None = None,
        c: int = 3,
    ) -> "WeightedGraph":
        """Build a graph from an edge list. Duplicate edges are merged."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range")
            nbrs[u].add(v)
            nbrs[v].add(u)
        w = tuple(weights) if weights is not None else (1,) * n
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs), w, declared_alpha, c)

    @cached_property
    def _nbr_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, v) for u in range(self.n) for v in self.adjacency[u] if u < v)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def max_degree(self) -> int:
        return max(len(a) for a in self.adjacency)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def closed_neighborhood(self, v: int) -> tuple[int, ...]:
        return tuple(sorted((v, *self.adjacency[v])))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def is_unit_weighted(self) -> bool:
        return all(w == 1 for w in self.weights)

    def with_weights(self, weights: Iterable[int]) -> "WeightedGraph":
        return WeightedGraph(self.n, self.adjacency, tuple(weights), self.declared_alpha, self.c)

    def with_alpha(self, alpha: int | None) -> "WeightedGraph":
        return WeightedGraph(self.n, self.adjacency, self.weights, alpha, self.c)

    def relabel(self, perm: list[int] | tuple[int, ...]) -> "WeightedGraph":
        """Graph with node ``v`` renamed to ``perm[v]``."""
        weights = [0] * self.n
        for v in range(self.n):
            weights[perm[v]] = self.weights[v]
        edges = [(perm[u], perm[v]) for u, v in self.edges]
        return WeightedGraph.from_edges(self.n, edges, weights, self.declared_alpha, self.c)

    def check_declared_alpha(self) -> bool:
        if self.declared_alpha is None:
            return True
        return exact_orientation(self, self.declared_alpha) is not None


@dataclass(frozen=True)
class Orientation:
    """One direction per undirected edge; ``arcs[e] = (tail, head)``."""

    arcs: tuple[tuple[int, int], ...]
    out_degree: tuple[int, ...]

    @property
    def max_out_degree(self) -> int:
        return max(self.out_degree, default=0)

    def out_neighbors(self, v: int) -> list[int]:
        return sorted(h for t, h in self.arcs if t == v)

    def is_valid_for(self, g: WeightedGraph) -> bool:
        if sorted(tuple(sorted(a)) for a in self.arcs) != sorted(g.edges):
            return False
        counts = [0] * g.n
        for t, _ in self.arcs:
            counts[t] += 1
        return tuple(counts) == self.out_degree


def exact_orientation(g: WeightedGraph, k: int) -> Orientation | None:
    """Orient every edge so that each node has out-degree at most ``k``.

    Returns ``None`` when no such orientation exists. Starts from the
    lower-to-higher id orientation and repairs overloaded nodes with
    augmenting paths along out-arcs (BFS in id order). A failed search
    from an overloaded node reaches a closed set ``R`` with more than
    ``k * |R|`` internal edges, which certifies infeasibility.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    out: list[set[int]] = [set() for _ in range(g.n)]
    for u, v in g.edges:
        out[u].add(v)
    while True:
        overloaded = next((v for v in range(g.n) if len(out[v]) > k), None)
        if overloaded is None:
            break
        parent = {overloaded: -1}
        queue = deque([overloaded])
        target = None
        while queue:
            u = queue.popleft()
            if len(out[u]) < k:
                target = u
                break
            for w in sorted(out[u]):
                if w not in parent:
                    parent[w] = u
                    queue.append(w)
        if target is None:
            return None
        v = target
        while parent[v] != -1:
            u = parent[v]
            out[u].discard(v)
            out[v].add(u)
            v = u
    arcs = []
    for u, v in g.edges:
        arcs.append((u, v) if v in out[u] else (v, u))
    return Orientation(tuple(arcs), tuple(len(s) for s in out))


def degeneracy(g: WeightedGraph) -> int:
    """Largest residual degree seen while repeatedly peeling a min-degree node."""
    deg = [len(a) for a in g.adjacency]
    heap = [(d, v) for v, d in enumerate(deg)]
    heapq.heapify(heap)
    removed = [False] * g.n
    best = 0
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != deg[v]:
            continue
        removed[v] = True
        best = max(best, d)
        for u in g.adjacency[v]:
            if not removed[u]:
                deg[u] -= 1
                heapq.heappush(heap, (deg[u], u))
    return best


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _prufer_tree(n: int, rng: random.Random) -> list[tuple[int, int]]:
    if n < 2:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


def _weight_exponent(n: int, weight_max: int) -> int:
    c = 3
    while weight_cap(n, c) < weight_max:
        c += 1
    return c


def generate_bounded_arboricity(n: int, alpha: int, weight_max: int, seed: int) -> WeightedGraph:
    """Union of ``alpha`` random forests with uniform weights in ``[1, weight_max]``.

    Each forest is a uniform labelled tree (Prufer decoding) with every edge
    dropped independently with probability 1/4.
    """
    if n < 1 or alpha < 1 or weight_max < 1:
        raise GraphError("need n >= 1, alpha >= 1, weight_max >= 1")
    rng = random.Random(seed)
    edges: set[tuple[int, int]] = set()
    for _ in range(alpha):
        for e in _prufer_tree(n, rng):
            if rng.random() >= 0.25:
                edges.add(e)
    weights = [rng.randint(1, weight_max) for _ in range(n)]
    return WeightedGraph.from_edges(
        n, sorted(edges), weights, declared_alpha=alpha, c=_weight_exponent(n, weight_max)
    )


def generate_tree(n: int, seed: int, weight_max: int = 1) -> WeightedGraph:
    """Uniform random labelled tree on ``n`` nodes."""
    if n < 1:
        raise GraphError("need n >= 1")
    rng = random.Random(seed)
    edges = _prufer_tree(n, rng)
    weights = [rng.randint(1, weight_max) for _ in range(n)]
    return WeightedGraph.from_edges(
        n, edges, weights, declared_alpha=1, c=_weight_exponent(n, weight_max)
    )


def generate_random_graph(n: int, p: float, weight_max: int, seed: int) -> WeightedGraph:
    """Each pair becomes an edge with probability ``p``; no arboricity bound
    is built in, so the degeneracy is declared (it bounds the arboricity)."""
    if n < 1 or weight_max < 1 or not 0 <= p <= 1:
        raise GraphError("need n >= 1, weight_max >= 1, 0 <= p <= 1")
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    weights = [rng.randint(1, weight_max) for _ in range(n)]
    g = WeightedGraph.from_edges(n, edges, weights, c=_weight_exponent(n, weight_max))
    return g.with_alpha(max(1, degeneracy(g)))


def generate_star(delta: int) -> WeightedGraph:
    if delta < 0:
        raise GraphError("delta must be >= 0")
    return WeightedGraph.from_edges(
        delta + 1, [(0, i) for i in range(1, delta + 1)], declared_alpha=1
    )


def path_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)], declared_alpha=1)


def cycle_graph(n: int) -> WeightedGraph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    return WeightedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], declared_alpha=2)


def complete_graph(n: int) -> WeightedGraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return WeightedGraph.from_edges(n, edges, declared_alpha=(n + 1) // 2 if n > 1 else 0)


def petersen_graph() -> WeightedGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return WeightedGraph.from_edges(10, outer + spokes + inner, declared_alpha=2)


# ---------------------------------------------------------------------------
# lower-bound transform
# ---------------------------------------------------------------------------


class NodeRole(NamedTuple):
    kind: str  # "copy", "middle" or "t"
    copy: int  # copy index, -1 for t nodes
    original: tuple[int, ...]  # (v,) for copy/t nodes, (u, v) for middle nodes


@dataclass(frozen=True)
class LowerBoundGraph:
    graph: WeightedGraph
    base_n: int
    base_m: int
    base_delta: int
    node_roles: tuple[NodeRole, ...] = field(repr=False)

    @property
    def copies(self) -> int:
        return self.base_delta**2

    def copy_id(self, i: int, v: int) -> int:
        return i * (self.base_n + self.base_m) + v

    def t_id(self, v: int) -> int:
        return self.copies * (self.base_n + self.base_m) + v

    def expected_counts(self) -> tuple[int, int]:
        d2 = self.copies
        return d2 * (self.base_n + self.base_m) + self.base_n, d2 * (2 * self.base_m + self.base_n)


def build_lower_bound_graph(g: WeightedGraph) -> LowerBoundGraph:
    """Copies of ``g`` with subdivided edges plus one hub per original node.

    Layout: copy ``i`` occupies ids ``i*(n+m) .. i*(n+m)+n+m-1`` (the ``n``
    node copies first, then one middle node per edge in ``g.edges`` order);
    the ``n`` hub nodes come last.
    """
    if g.m == 0:
        raise GraphError("base graph needs at least one edge")
    if not g.is_unit_weighted():
        raise GraphError("base graph must be unit-weighted")
    n, m, delta = g.n, g.m, g.max_degree
    copies = delta * delta
    block = n + m
    roles: list[NodeRole] = []
    edges: list[tuple[int, int]] = []
    for i in range(copies):
        base = i * block
        roles.extend(NodeRole("copy", i, (v,)) for v in range(n))
        for j, (u, v) in enumerate(g.edges):
            roles.append(NodeRole("middle", i, (u, v)))
            mid = base + n + j
            edges.append((base + u, mid))
            edges.append((base + v, mid))
    hub0 = copies * block
    for v in range(n):
        roles.append(NodeRole("t", -1, (v,)))
        edges.extend((i * block + v, hub0 + v) for i in range(copies))
    total = copies * block + n
    h = WeightedGraph.from_edges(total, edges, declared_alpha=2)
    return LowerBoundGraph(h, n, m, delta, tuple(roles))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def write_graph(g: WeightedGraph, fp: TextIO) -> None:
    """``n m c`` header, one weight per line, then ``u v`` edges with u < v."""
    if g.declared_alpha is not None:
        fp.write(f"# alpha {g.declared_alpha}\n")
    fp.write(f"{g.n} {g.m} {g.c}\n")
    for w in g.weights:
        fp.write(f"{w}\n")
    for u, v in g.edges:
        fp.write(f"{u} {v}\n")


def dumps_graph(g: WeightedGraph) -> str:
    buf = io.StringIO()
    write_graph(g, buf)
    return buf.getvalue()


def read_graph(fp: TextIO) -> WeightedGraph:
    alpha = None
    rows: list[list[str]] = []
    for raw in fp:
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "alpha":
                alpha = int(parts[1])
            continue
        if line:
            rows.append(line.split("#", 1)[0].split())
    if not rows or len(rows[0]) != 3:
        raise GraphError("missing 'n m c' header")
    n, m, c = (int(x) for x in rows[0])
    if len(rows) != 1 + n + m:
        raise GraphError(f"expected {n} weight lines and {m} edge lines")
    weights = [int(r[0]) for r in rows[1 : n + 1]]
    edges = []
    for r in rows[n + 1 :]:
        u, v = int(r[0]), int(r[1])
        if not u < v:
            raise GraphError(f"edge line '{u} {v}' must have u < v")
        edges.append((u, v))
    g = WeightedGraph.from_edges(n, edges, weights, alpha, c)
    if g.m != m:
        raise GraphError("duplicate edge lines")
    return g


def loads_graph(text: str) -> WeightedGraph:
    return read_graph(io.StringIO(text))


def write_roles(lb: LowerBoundGraph, fp: TextIO) -> None:
    fp.write(f"# base {lb.base_n} {lb.base_m} {lb.base_delta}\n")
    for v, role in enumerate(lb.node_roles):
        if role.kind == "t":
            payload = f"{role.original[0]}"
        else:
            payload = " ".join(str(x) for x in (role.copy, *role.original))
        fp.write(f"{v} {role.kind} {payload}\n")


def read_roles(fp: TextIO, graph: WeightedGraph) -> LowerBoundGraph:
    header = None
    roles = []
    for raw in fp:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "base":
                header = tuple(int(x) for x in parts[1:4])
            continue
        parts = line.split()
        v, kind, payload = int(parts[0]), parts[1], [int(x) for x in parts[2:]]
        if v != len(roles):
            raise GraphError("role lines must be in id order")
        if kind == "t":
            roles.append(NodeRole("t", -1, (payload[0],)))
        else:
            roles.append(NodeRole(kind, payload[0], tuple(payload[1:])))
    if header is None:
        raise GraphError("role file lacks '# base n m delta' header")
    if len(roles) != graph.n:
        raise GraphError("role file does not cover every node")
    return LowerBoundGraph(graph, *header, tuple(roles))
