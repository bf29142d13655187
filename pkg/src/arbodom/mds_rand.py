"""Randomized completion of a partial dominating set by sampling near-tight
nodes with geometrically growing probability, and the two algorithms built
on it (bounded arboricity, and general graphs)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ._exact import ceil_log, format_fraction, parse_fraction, rational_root_upper
from .graph import WeightedGraph
from .mds_det import (
    DominatingSetResult,
    InvalidParams,
    PackingMonitor,
    PartialResult,
    dominated_by,
    partial_dominating_set,
    ROUND_CAP_FACTOR,
)
from .oracle import is_dominating, packing_feasible
from .packing import PackingAssignment
from .simulator import NodeProgram, SimulationError, SimulationResult, run_synchronous

__all__ = [
    "InvalidPacking",
    "CoverTally",
    "ExtensionResult",
    "extension_schedule",
    "sampling_probability",
    "randomized_params",
    "general_gamma",
    "extend_randomized",
    "mds_randomized",
    "mds_general",
]

JOIN = 1


class InvalidPacking(ValueError):
    pass


@dataclass(frozen=True)
class CoverTally:
    """Per node: how many sampled nodes dominated it in the iteration where it
    first became dominated (0 if ``S`` already dominated it), and when."""

    c: tuple[int, ...]
    first: tuple[tuple[int, int] | None, ...]

    @property
    def max_c(self) -> int:
        return max(self.c, default=0)


@dataclass
class ExtensionResult:
    members: frozenset[int]
    tally: CoverTally
    rounds: int
    phases: int
    iterations: int
    phase_weights: list[int]
    residual: PackingAssignment
    sim: SimulationResult = field(repr=False)


def extension_schedule(gamma: Fraction, lam: Fraction, delta: int) -> tuple[int, int]:
    """``(phases, iterations per phase)``: ``ceil(log_gamma 1/lam)`` and
    ``ceil(log_gamma (delta+1)) + 1``.

    The phase count is at least 1: with ``lam = 1`` the logarithm is 0 but
    undominated nodes still need one sampling pass.
    """
    return max(1, ceil_log(gamma, 1 / lam)), ceil_log(gamma, Fraction(delta + 1)) + 1


def sampling_probability(gamma: Fraction, delta: int, k: int) -> Fraction:
    """``min(gamma**(k-1) / (delta+1), 1)`` for iteration ``k >= 1``."""
    return min(gamma ** (k - 1) / (delta + 1), Fraction(1))


class _ExtState:
    __slots__ = (
        "tau", "i", "j", "num", "denom", "in_s", "in_ext", "dominated", "und_x",
        "candidate", "sampled_now", "c", "first", "sampled_at", "iters",
    )

    def __init__(self) -> None:
        self.und_x: dict[int, int] = {}
        self.candidate = False
        self.sampled_now = False
        self.in_ext = False
        self.c = 0
        self.first: tuple[int, int] | None = None
        self.sampled_at: tuple[int, int] | None = None

    @property
    def x(self) -> Fraction:
        return Fraction(self.num, self.denom)


class ExtensionProgram(NodeProgram):
    """Node program for the sampling phases.

    Rounds: 0 announces membership in ``S``; 1 sends ``(tau, i, j)`` of
    every undominated node; afterwards each iteration is a sampling round
    followed by a round that reports newly dominated nodes. A node halts
    once its whole closed neighborhood is dominated.

    Packing values are held as integer numerators over one common
    denominator, large enough that every rescaling by ``gamma`` within the
    run stays integral. This is only a representation of exact rationals.
    """

    def __init__(self, packing: PackingAssignment, in_s: list[bool], gamma: Fraction, phases: int):
        self.packing = packing
        self.in_s = in_s
        self.gamma = gamma
        self.phases = phases
        grow = 1 + packing.eps
        self.top_i = max(packing.i, default=0)
        self.top_j = max(packing.j, default=0) + phases
        self.denom = (
            max(packing.base, default=1)
            * grow.denominator ** self.top_i
            * gamma.denominator ** self.top_j
        )
        self._grow = grow
        self._cache: dict[tuple[int, int, int], int] = {}
        self._iters: dict[int, int] = {}
        self._probs: dict[tuple[int, int], tuple[int, int]] = {}

    def _iterations(self, delta: int) -> int:
        it = self._iters.get(delta)
        if it is None:
            it = self._iters[delta] = ceil_log(self.gamma, Fraction(delta + 1)) + 1
        return it

    def _prob(self, delta: int, k: int) -> tuple[int, int]:
        pr = self._probs.get((delta, k))
        if pr is None:
            p = sampling_probability(self.gamma, delta, k)
            pr = self._probs[(delta, k)] = (p.numerator, p.denominator)
        return pr

    def _num(self, tau: int, i: int, j: int, delta: int) -> int:
        key = (tau, i, j)
        num = self._cache.get(key)
        if num is None:
            val = Fraction(tau, delta + 1) * self._grow ** i * self.gamma ** j * self.denom
            if val.denominator != 1:
                raise InvalidPacking("packing value not representable over the common denominator")
            num = self._cache[key] = val.numerator
        return num

    def init(self, ctx):
        st = _ExtState()
        v = ctx.id
        st.tau, st.i, st.j = self.packing.tau[v], self.packing.i[v], self.packing.j[v]
        st.denom = self.denom
        st.num = self._num(st.tau, st.i, st.j, ctx.delta)
        st.in_s = self.in_s[v]
        st.dominated = st.in_s
        st.iters = self._iterations(ctx.delta)
        out = [(u, (JOIN,)) for u in ctx.neighbors] if st.in_s else ()
        return st, out, False

    def on_round(self, ctx, st, inbox, rnd):
        if rnd == 1:
            if inbox:
                st.dominated = True
            out = () if st.dominated else [(u, (st.tau, st.i, st.j)) for u in ctx.neighbors]
            return st, out, False
        it, half = divmod(rnd - 2, 2)
        phase, k = divmod(it, st.iters)
        if rnd == 2:
            for u, (tau, i, j) in inbox:
                st.und_x[u] = self._num(tau, i, j, ctx.delta)
            inbox = []
        if half == 0:
            return self._sample(ctx, st, inbox, phase + 1, k + 1)
        return self._settle(ctx, st, inbox, phase + 1, k + 1)

    def _sample(self, ctx, st, inbox, phase, k):
        und = st.und_x
        for u, _ in inbox:
            und.pop(u, None)
        if st.dominated and not und:
            return st, (), True
        member = st.in_s or st.in_ext
        load = sum(und.values()) + (0 if st.dominated else st.num)
        gp, gq = self.gamma.numerator, self.gamma.denominator
        # load * gamma >= w  <=>  load * gp >= w * denom * gq
        limit = ctx.weight * self.denom * gq
        if k == 1:
            if phase > 1:
                if not member and load * gp > limit:
                    raise SimulationError(
                        f"phase {phase}: residual load of node {ctx.id} exceeds w/gamma"
                    )
                if not st.dominated:
                    st.j += 1
                    st.num = st.num * gp // gq
                for u in und:
                    und[u] = und[u] * gp // gq
                load = load * gp // gq
            st.candidate = not member and load * gp >= limit
        elif st.candidate and (member or load * gp < limit):
            st.candidate = False
        st.sampled_now = False
        if st.candidate:
            num, den = self._prob(ctx.delta, k)
            if ctx.coin(num, den, phase, k):
                st.sampled_now = True
                st.in_ext = True
                st.candidate = False
                st.sampled_at = (phase, k)
                return st, [(u, (JOIN,)) for u in ctx.neighbors], False
        return st, (), False

    def _settle(self, ctx, st, inbox, phase, k):
        joins = 0
        for u, _ in inbox:
            joins += 1
            st.und_x.pop(u, None)
        hits = joins + (1 if st.sampled_now else 0)
        out = ()
        if hits and not st.dominated:
            st.dominated = True
            st.c = hits
            st.first = (phase, k)
            out = [(u, (0,)) for u in ctx.neighbors]
        last = phase == self.phases and k == st.iters
        return st, out, last


def _check_extension_input(g, members, packing, lam, gamma):
    if not gamma > 1:
        raise InvalidParams("gamma must exceed 1")
    if not lam > 0:
        raise InvalidParams("lambda must be positive")
    if any(b != g.max_degree + 1 for b in packing.base):
        raise InvalidPacking("packing values must use the common base delta + 1")
    ok, bad = packing_feasible(g, packing)
    if not ok:
        raise InvalidPacking(f"packing infeasible at node {bad}")
    covered = dominated_by(g, members)
    for v in range(g.n):
        if v in covered:
            continue
        tau = min(g.weights[u] for u in g.closed_neighborhood(v))
        if packing.value(v) < lam * tau:
            raise InvalidPacking(f"undominated node {v} has x_v < lambda * tau_v")


def extend_randomized(
    g: WeightedGraph,
    members,
    packing: PackingAssignment,
    lam: Fraction | str,
    gamma: Fraction | str,
    seed: int,
    *,
    monitor: bool = True,
    keep_trace: bool = False,
    check_input: bool = True,
) -> ExtensionResult:
    """Sample ``S'`` so that ``S`` together with ``S'`` dominates ``g``."""
    lam, gamma = parse_fraction(lam), parse_fraction(gamma)
    members = frozenset(members)
    if check_input:
        _check_extension_input(g, members, packing, lam, gamma)
    phases, iters = extension_schedule(gamma, lam, g.max_degree)
    program = ExtensionProgram(packing, [v in members for v in range(g.n)], gamma, phases)
    hook = PackingMonitor(g, residual=True) if monitor else None
    cap = 2 + 2 * phases * iters
    sim = run_synchronous(
        g, program, seed=seed, round_cap=ROUND_CAP_FACTOR * cap,
        keep_trace=keep_trace, on_round_end=hook,
    )
    states = sim.per_node_output
    added = frozenset(v for v, st in enumerate(states) if st.in_ext)
    if not is_dominating(g, members | added):
        raise SimulationError("extension finished without dominating every node")
    phase_weights = [0] * phases
    for v, st in enumerate(states):
        if st.sampled_at is not None:
            phase_weights[st.sampled_at[0] - 1] += g.weights[v]
    residual = PackingAssignment(
        tuple(st.tau for st in states),
        tuple(st.i for st in states),
        tuple(st.j for st in states),
        packing.base,
        packing.eps,
        gamma,
        tuple(st.dominated for st in states),
    )
    tally = CoverTally(tuple(st.c for st in states), tuple(st.first for st in states))
    return ExtensionResult(added, tally, sim.rounds_executed, phases, iters, phase_weights, residual, sim)


def _max_t(alpha: int) -> int:
    # natural log: log2 would rule out t = 2 already at alpha = 3
    if alpha < 2:
        return 1
    return max(1, math.floor(alpha / math.log(alpha)))


def randomized_params(alpha: int, t: int) -> tuple[Fraction, Fraction, Fraction]:
    """``(eps, lam, gamma)`` = ``1/(4t)``, ``eps/(alpha+1)`` and the smallest
    ``z / 2**20 >= max(2, alpha**(1/(2t)))``."""
    eps = Fraction(1, 4 * t)
    lam = eps / (alpha + 1)
    gamma = max(Fraction(2), rational_root_upper(alpha, 2 * t))
    return eps, lam, gamma


def randomized_bound(alpha: int, eps: Fraction, lam: Fraction, gamma: Fraction) -> Fraction:
    """Expected approximation factor of the composed algorithm."""
    det_part = alpha / (1 / (1 + eps) - lam * (alpha + 1))
    phases = max(1, ceil_log(gamma, 1 / lam))
    return det_part + gamma * (gamma + 1) * phases


def mds_randomized(
    g: WeightedGraph,
    t: int,
    seed: int,
    *,
    partial: PartialResult | None = None,
    monitor: bool = True,
    keep_trace: bool = False,
) -> DominatingSetResult:
    """Partial dominating set followed by randomized completion.

    ``partial`` may carry a precomputed deterministic stage (it does not
    depend on the seed), which Monte-Carlo loops use to avoid recomputation.
    """
    if g.declared_alpha is None:
        raise InvalidParams("graph has no declared arboricity bound")
    alpha = max(g.declared_alpha, 1)
    if not 1 <= t <= _max_t(alpha):
        raise InvalidParams(f"t must lie in [1, {_max_t(alpha)}] for alpha = {alpha}")
    eps, lam, gamma = randomized_params(alpha, t)
    if partial is None:
        partial = partial_dominating_set(g, eps, lam, monitor=monitor, keep_trace=keep_trace)
    ext = extend_randomized(
        g, partial.members, partial.packing, lam, gamma, seed,
        monitor=monitor, keep_trace=keep_trace, check_input=False,
    )
    members = partial.members | ext.members
    w_s = sum(g.weights[v] for v in partial.members)
    res = DominatingSetResult(
        algo="rand",
        members=members,
        total_weight=sum(g.weights[v] for v in members),
        certificate=partial.packing,
        rounds=partial.rounds + ext.rounds,
        claimed_factor=randomized_bound(alpha, eps, lam, gamma),
        partial=partial.members,
        iterations=partial.iterations,
        max_message_bits=max(partial.sim.max_message_bits, ext.sim.max_message_bits),
        total_messages=partial.sim.total_messages + ext.sim.total_messages,
    )
    res.extras.update(
        alpha=alpha,
        t=t,
        eps=format_fraction(eps),
        lam=format_fraction(lam),
        gamma=format_fraction(gamma),
        partial_weight=w_s,
        phases=ext.phases,
        phase_iterations=ext.iterations,
        max_c=ext.tally.max_c,
        phase_weights=ext.phase_weights,
    )
    res.extras["tally"] = ext.tally
    res.extras["partial_sims"] = (partial.sim, ext.sim)
    return res


def general_gamma(delta: int, k: int) -> Fraction:
    """Smallest ``z / 2**20 >= delta**(1/k)``; 2 when ``delta <= 1``."""
    if delta <= 1:
        return Fraction(2)
    return rational_root_upper(delta, k)


def mds_general(
    g: WeightedGraph, k: int, seed: int, *, monitor: bool = True, keep_trace: bool = False
) -> DominatingSetResult:
    """Dominating set on an arbitrary graph via the sampling phases alone,
    starting from ``x_v = tau_v / (delta+1)`` with ``S`` empty."""
    if k < 1:
        raise InvalidParams("k must be >= 1")
    delta = g.max_degree
    lam = Fraction(1, delta + 1)
    gamma = general_gamma(delta, k)
    tau = [min(g.weights[u] for u in g.closed_neighborhood(v)) for v in range(g.n)]
    packing = PackingAssignment(
        tuple(tau), (0,) * g.n, (0,) * g.n, (delta + 1,) * g.n, Fraction(0), Fraction(1),
        (False,) * g.n,
    )
    ext = extend_randomized(
        g, frozenset(), packing, lam, gamma, seed,
        monitor=monitor, keep_trace=keep_trace, check_input=False,
    )
    members = ext.members
    res = DominatingSetResult(
        algo="general",
        members=members,
        total_weight=sum(g.weights[v] for v in members),
        certificate=packing,
        rounds=ext.rounds,
        claimed_factor=gamma * (gamma + 1) * ext.phases,
        iterations=ext.phases * ext.iterations,
        max_message_bits=ext.sim.max_message_bits,
        total_messages=ext.sim.total_messages,
    )
    res.extras.update(
        k=k, gamma=format_fraction(gamma), phases=ext.phases,
        phase_iterations=ext.iterations, max_c=ext.tally.max_c,
        phase_weights=ext.phase_weights,
    )
    res.extras["tally"] = ext.tally
    res.extras["sim"] = ext.sim
    return res
