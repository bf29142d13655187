"""Ground truth for small instances: exact minimum weighted dominating set,
validity and certificate checks, and the conversion of a dominating set of
the lower-bound graph into a fractional vertex cover of its base graph."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import LowerBoundGraph, WeightedGraph
from .packing import PackingAssignment

__all__ = [
    "OracleError",
    "TooLarge",
    "InfeasiblePacking",
    "NotDominating",
    "OracleResult",
    "FractionalVC",
    "exact_mds",
    "brute_force_mds",
    "is_dominating",
    "packing_feasible",
    "duality_check",
    "ds_to_fractional_vc",
    "min_fractional_vc",
]

EXACT_CAP = 26
MFVC_CAP = 10


class OracleError(ValueError):
    pass


class TooLarge(OracleError):
    pass


class InfeasiblePacking(OracleError):
    pass


class NotDominating(OracleError):
    pass


@dataclass(frozen=True)
class OracleResult:
    opt_weight: int
    witness: frozenset[int]
    explored: dict = field(default_factory=dict, compare=False)


def _closed_masks(g: WeightedGraph) -> list[int]:
    masks = []
    for v in range(g.n):
        m = 1 << v
        for u in g.adjacency[v]:
            m |= 1 << u
        masks.append(m)
    return masks


def is_dominating(g: WeightedGraph, members: Iterable[int]) -> bool:
    covered = [False] * g.n
    for v in members:
        covered[v] = True
        for u in g.adjacency[v]:
            covered[u] = True
    return all(covered)


def _greedy_cover(g: WeightedGraph, closed: list[int]) -> tuple[int, int]:
    full = (1 << g.n) - 1
    dom = chosen = 0
    weight = 0
    while dom != full:
        # cheapest weight per newly dominated node; ties by id
        best = min(
            (v for v in range(g.n) if closed[v] & ~dom),
            key=lambda v: (Fraction(g.weights[v], (closed[v] & ~dom).bit_count()), v),
        )
        chosen |= 1 << best
        dom |= closed[best]
        weight += g.weights[best]
    return weight, chosen


def exact_mds(g: WeightedGraph) -> OracleResult:
    """Minimum weight dominating set by branch and bound.

    Branching picks the undominated node with the fewest remaining
    candidate dominators and tries each candidate in turn (descending
    degree, then ascending weight, then id), excluding it from later
    siblings. The bound adds a feasible dual packing over the undominated
    nodes, each node charged the cheapest per-node price among its
    candidates.
    """
    if g.n > EXACT_CAP:
        raise TooLarge(f"exact_mds is capped at n <= {EXACT_CAP}, got {g.n}")
    n = g.n
    w = g.weights
    closed = _closed_masks(g)
    full = (1 << n) - 1
    rank = {v: r for r, v in enumerate(sorted(range(n), key=lambda v: (-g.degree(v), w[v], v)))}
    cands = [sorted(g.closed_neighborhood(v), key=rank.__getitem__) for v in range(n)]

    best_w, best_set = _greedy_cover(g, closed)
    stats = {"nodes": 0, "pruned": 0}

    def lower_bound(undom: int, allowed: int) -> float | None:
        total = 0.0
        x = undom
        while x:
            low = x & -x
            v = low.bit_length() - 1
            x ^= low
            price = math.inf
            for u in cands[v]:
                if allowed >> u & 1:
                    p = w[u] / (closed[u] & undom).bit_count()
                    if p < price:
                        price = p
            if price == math.inf:
                return None
            total += price
        return total

    def search(dom: int, allowed: int, weight: int, chosen: int) -> None:
        nonlocal best_w, best_set
        stats["nodes"] += 1
        if dom == full:
            if weight < best_w:
                best_w, best_set = weight, chosen
            return
        undom = full & ~dom
        lb = lower_bound(undom, allowed)
        # weights are integers; the float bound is shaved before rounding up
        if lb is None or weight + math.ceil(lb - 1e-7) >= best_w:
            stats["pruned"] += 1
            return
        pick, pick_count = -1, n + 2
        x = undom
        while x:
            low = x & -x
            v = low.bit_length() - 1
            x ^= low
            c = sum(1 for u in cands[v] if allowed >> u & 1)
            if c < pick_count:
                pick, pick_count = v, c
        for u in cands[pick]:
            if not allowed >> u & 1:
                continue
            search(dom | closed[u], allowed, weight + w[u], chosen | 1 << u)
            allowed &= ~(1 << u)

    search(0, full, 0, 0)
    witness = frozenset(v for v in range(n) if best_set >> v & 1)
    return OracleResult(best_w, witness, stats)


def brute_force_mds(g: WeightedGraph) -> OracleResult:
    """Exhaustive search over all subsets; reference for tests only."""
    if g.n > 20:
        raise TooLarge("brute force is limited to n <= 20")
    closed = _closed_masks(g)
    full = (1 << g.n) - 1
    best = None
    for mask in range(1 << g.n):
        dom = 0
        weight = 0
        for v in range(g.n):
            if mask >> v & 1:
                dom |= closed[v]
                weight += g.weights[v]
        if dom == full and (best is None or weight < best[0]):
            best = (weight, mask)
    assert best is not None
    return OracleResult(best[0], frozenset(v for v in range(g.n) if best[1] >> v & 1))


def _as_values(x: PackingAssignment | Sequence) -> Sequence[Fraction]:
    return x.values if isinstance(x, PackingAssignment) else [Fraction(v) for v in x]


def packing_feasible(
    g: WeightedGraph, x: PackingAssignment | Sequence
) -> tuple[bool, int | None]:
    """Check ``sum of x over N+(u) <= w_u`` for every u; report the first violator."""
    vals = _as_values(x)
    for u in range(g.n):
        if vals[u] < 0:
            return False, u
        load = vals[u] + sum((vals[v] for v in g.adjacency[u]), Fraction(0))
        if load > g.weights[u]:
            return False, u
    return True, None


def duality_check(g: WeightedGraph, x: PackingAssignment | Sequence, oracle: OracleResult) -> bool:
    ok, bad = packing_feasible(g, x)
    if not ok:
        raise InfeasiblePacking(f"packing violated at node {bad}")
    return sum(_as_values(x), Fraction(0)) <= oracle.opt_weight


@dataclass(frozen=True)
class FractionalVC:
    y: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return sum(self.y, Fraction(0))

    def violated_edge(self, edges: Iterable[tuple[int, int]]) -> tuple[int, int] | None:
        for u, v in edges:
            if self.y[u] + self.y[v] < 1:
                return (u, v)
        return None

    def is_feasible(self, edges: Iterable[tuple[int, int]]) -> bool:
        in_range = all(0 <= y <= 1 for y in self.y)
        return in_range and self.violated_edge(edges) is None


def base_edges(h: LowerBoundGraph) -> list[tuple[int, int]]:
    return [tuple(r.original) for r in h.node_roles if r.kind == "middle" and r.copy == 0]


def ds_to_fractional_vc(h: LowerBoundGraph, members: Iterable[int]) -> FractionalVC:
    """Turn a dominating set of ``h`` into a fractional vertex cover of the base graph.

    Middle nodes in the set are replaced by their lower-id endpoint; ``y_v``
    is the fraction of copies whose copy of ``v`` ends up in the set.
    """
    members = set(members)
    if not is_dominating(h.graph, members):
        raise NotDominating("the given set does not dominate the lower-bound graph")
    in_copy: set[tuple[int, int]] = set()
    for v in members:
        role = h.node_roles[v]
        if role.kind == "copy":
            in_copy.add((role.copy, role.original[0]))
        elif role.kind == "middle":
            in_copy.add((role.copy, min(role.original)))
    counts = [0] * h.base_n
    for _, v in in_copy:
        counts[v] += 1
    return FractionalVC(tuple(Fraction(c, h.copies) for c in counts))


def min_fractional_vc(n: int, edges: Sequence[tuple[int, int]]) -> Fraction:
    """Optimal fractional vertex cover value by enumerating half-integral points.

    Every vertex of the vertex-cover polytope is half-integral, so the
    optimum is attained on ``{0, 1/2, 1}^n``.
    """
    if n > MFVC_CAP:
        raise TooLarge(f"fractional vertex cover enumeration is capped at n <= {MFVC_CAP}")
    best = None
    for combo in itertools.product((0, 1, 2), repeat=n):
        if all(combo[u] + combo[v] >= 2 for u, v in edges):
            s = sum(combo)
            if best is None or s < best:
                best = s
    return Fraction(best, 2)
