"""Deterministic primal-dual dominating set algorithms run as node programs.

Message vocabulary (every payload is a short integer tuple):

* ``(w,)`` / ``(w, deg)``  first-round weight (and degree) exchange
* ``(tau, i)``            packing value ``tau * (1+eps)**i / base`` of the sender
* ``(tau, base)``         initial packing value when ``base`` is not global
* ``(flags,)``            bit 0: sender joined the set, bit 1: receiver is selected
* ``(0,)``                sender is dominated (early-exit variants only)
* ``(1,)`` / ``(d,)``     peeled notice / final out-degree (orientation stage)

Receivers always know from the round number which kind to expect.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from ._exact import ceil_log, format_fraction, parse_fraction
from .graph import Orientation, WeightedGraph
from .packing import PackingAssignment, PowerTable
from .simulator import (
    Knowns,
    NodeContext,
    NodeProgram,
    SimulationError,
    SimulationResult,
    run_synchronous,
)

__all__ = [
    "InvalidParams",
    "NonUnitWeights",
    "NotAForest",
    "FeasibilityViolation",
    "AlgoParams",
    "DominatingSetResult",
    "PartialResult",
    "PackingMonitor",
    "partial_iterations",
    "unweighted_iterations",
    "compute_tau",
    "partial_dominating_set",
    "partial_properties",
    "mds_deterministic",
    "mds_unweighted",
    "mds_unknown_delta",
    "mds_unknown_alpha",
    "tree_mds",
    "is_forest",
]

JOIN = 1
SELECT = 2
ROUND_CAP_FACTOR = 64


class InvalidParams(ValueError):
    pass


class NonUnitWeights(ValueError):
    pass


class NotAForest(ValueError):
    pass


class FeasibilityViolation(SimulationError):
    """Raised by :class:`PackingMonitor` when some ``X_u`` exceeds ``w_u``."""


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


def partial_iterations(eps: Fraction, lam: Fraction, delta: int) -> int:
    """``r`` with ``(1+eps)**(r-1) <= lam*(delta+1) < (1+eps)**r``, or 0 if
    ``lam < 1/(delta+1)``."""
    target = lam * (delta + 1)
    if target < 1:
        return 0
    r, acc = 1, 1 + eps
    while not target < acc:
        acc *= 1 + eps
        r += 1
    return r


def unweighted_iterations(eps: Fraction, alpha: int, delta: int) -> int:
    """Iteration count of the unit-weight procedure: ``r + 1`` for the largest
    ``r`` with ``(1+eps)**r / (delta+1) <= 1/((2 alpha+1)(1+eps))``
    (clamped at zero when no such ``r >= 0`` exists)."""
    limit = Fraction(delta + 1, 2 * alpha + 1) / (1 + eps)
    if limit < 1:
        return 0
    r, acc = 0, Fraction(1)
    while acc * (1 + eps) <= limit:
        acc *= 1 + eps
        r += 1
    return r + 1


def _check_eps(eps: Fraction) -> None:
    if not 0 < eps < 1:
        raise InvalidParams(f"eps must lie in (0, 1), got {eps}")


def _alpha_of(g: WeightedGraph) -> int:
    if g.declared_alpha is None:
        raise InvalidParams("graph has no declared arboricity bound")
    # an edgeless graph is also a graph of arboricity at most 1
    return max(g.declared_alpha, 1)


@dataclass(frozen=True)
class AlgoParams:
    eps: Fraction
    lam: Fraction
    delta: int

    @property
    def r(self) -> int:
        return partial_iterations(self.eps, self.lam, self.delta)

    def validate(self, alpha: int | None) -> None:
        _check_eps(self.eps)
        if self.lam <= 0:
            raise InvalidParams("lambda must be positive")
        if alpha is not None and not self.lam < 1 / ((alpha + 1) * (1 + self.eps)):
            raise InvalidParams("lambda must be below 1/((alpha+1)(1+eps))")


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass
class DominatingSetResult:
    algo: str
    members: frozenset[int]
    total_weight: int
    certificate: PackingAssignment | None
    rounds: int
    claimed_factor: Fraction
    partial: frozenset[int] = frozenset()
    iterations: int = 0
    max_message_bits: int = 0
    total_messages: int = 0
    extras: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        extras = {k: v for k, v in self.extras.items() if isinstance(v, (int, str, list, bool))}
        return {
            "algo": self.algo,
            "members": sorted(self.members),
            "total_weight": self.total_weight,
            "rounds": self.rounds,
            "iterations": self.iterations,
            "claimed_factor": format_fraction(self.claimed_factor),
            "partial": sorted(self.partial),
            "max_message_bits": self.max_message_bits,
            "total_messages": self.total_messages,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "extras": extras,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DominatingSetResult":
        cert = data.get("certificate")
        return cls(
            algo=data.get("algo", "?"),
            members=frozenset(int(v) for v in data["members"]),
            total_weight=int(data["total_weight"]),
            certificate=PackingAssignment.from_json(cert) if cert else None,
            rounds=int(data.get("rounds", 0)),
            claimed_factor=parse_fraction(data.get("claimed_factor", "0")),
            partial=frozenset(int(v) for v in data.get("partial", ())),
            iterations=int(data.get("iterations", 0)),
            max_message_bits=int(data.get("max_message_bits", 0)),
            total_messages=int(data.get("total_messages", 0)),
            extras=dict(data.get("extras", {})),
        )


@dataclass
class PartialResult:
    members: frozenset[int]
    packing: PackingAssignment
    rounds: int
    iterations: int
    dominated: frozenset[int]
    sim: SimulationResult


class PackingMonitor:
    """Round hook asserting ``X_u <= w_u`` for every node, exactly.

    States expose ``x`` (a Fraction, ``None`` before it is defined). With
    ``residual=True`` only nodes whose ``dominated`` flag is false count
    towards the load.
    """

    def __init__(self, g: WeightedGraph, residual: bool = False):
        self.g = g
        self.residual = residual
        self.rounds_checked = 0

    def __call__(self, rnd: int, states: list) -> None:
        xs = []
        for st in states:
            x = getattr(st, "x", None)
            if x is None:
                return
            xs.append(Fraction(0) if self.residual and st.dominated else x)
        g = self.g
        for u in range(g.n):
            load = xs[u] + sum((xs[v] for v in g.adjacency[u]), Fraction(0))
            if load > g.weights[u]:
                raise FeasibilityViolation(f"round {rnd}: X_{u} = {load} exceeds w = {g.weights[u]}")
        self.rounds_checked += 1


# ---------------------------------------------------------------------------
# known-Delta primal-dual program
# ---------------------------------------------------------------------------


class _PDState:
    __slots__ = (
        "tau", "i", "x", "x_of", "nbr_w", "r", "iteration",
        "in_s", "in_ext", "dominated", "finishing",
    )

    def __init__(self) -> None:
        self.tau = 0
        self.i = 0
        self.x: Fraction | None = None
        self.x_of: dict[int, Fraction] = {}
        self.nbr_w: dict[int, int] = {}
        self.r = 0
        self.iteration = 0
        self.in_s = False
        self.in_ext = False
        self.dominated = False
        self.finishing = False


def _tau_target(ctx: NodeContext, nbr_w: dict[int, int], tau: int) -> int:
    if ctx.weight == tau:
        return min([ctx.id, *(u for u, w in nbr_w.items() if w == tau)])
    return min(u for u, w in nbr_w.items() if w == tau)


class PrimalDualProgram(NodeProgram):
    """Partial dominating set with growing packing values, plus an optional
    completion step for nodes still undominated after the last iteration.

    ``finish`` is ``"halt"`` (partial set only), ``"tau"`` (each undominated
    node selects the lowest-id node of weight ``tau`` in its closed
    neighborhood) or ``"self"`` (undominated nodes join themselves).
    """

    def __init__(self, eps: Fraction, iterations: Callable[[NodeContext], int], finish: str = "halt"):
        self.eps = eps
        self.grow = PowerTable(1 + eps)
        self.iterations = iterations
        self.finish = finish

    def init(self, ctx):
        st = _PDState()
        return st, [(u, (ctx.weight,)) for u in ctx.neighbors], False

    def _x(self, tau: int, i: int, delta: int) -> Fraction:
        return Fraction(tau, delta + 1) * self.grow[i]

    def on_round(self, ctx, st, inbox, rnd):
        delta = ctx.delta
        if st.finishing:
            for _, (flags,) in inbox:
                if flags & SELECT:
                    st.in_ext = True
            return st, (), True
        if rnd == 1:
            for u, (w,) in inbox:
                st.nbr_w[u] = w
            st.tau = min([ctx.weight, *st.nbr_w.values()])
            st.x = self._x(st.tau, 0, delta)
            st.r = self.iterations(ctx)
            if st.r == 0:
                return self._complete(ctx, st)
            return st, [(u, (st.tau, 0)) for u in ctx.neighbors], False
        if rnd % 2 == 0:
            for u, (tau, i) in inbox:
                st.x_of[u] = self._x(tau, i, delta)
            load = st.x + sum(st.x_of.values(), Fraction(0))
            if not st.in_s and load * (1 + self.eps) >= ctx.weight:
                st.in_s = True
                st.dominated = True
                return st, [(u, (JOIN,)) for u in ctx.neighbors], False
            return st, (), False
        if inbox:
            st.dominated = True
        if not st.dominated:
            st.i += 1
            st.x = self._x(st.tau, st.i, delta)
        st.iteration += 1
        if st.iteration == st.r:
            return self._complete(ctx, st)
        out = () if st.dominated else [(u, (st.tau, st.i)) for u in ctx.neighbors]
        return st, out, False

    def _complete(self, ctx, st):
        if self.finish == "halt":
            return st, (), True
        if self.finish == "self":
            if not st.dominated:
                st.in_ext = True
            return st, (), True
        out = ()
        if not st.dominated:
            u = _tau_target(ctx, st.nbr_w, st.tau)
            if u == ctx.id:
                st.in_ext = True
            else:
                out = [(u, (SELECT,))]
        st.finishing = True
        return st, out, False


def _packing_from_states(states, eps: Fraction, base_of, gamma: Fraction = Fraction(1)) -> PackingAssignment:
    return PackingAssignment(
        tuple(st.tau for st in states),
        tuple(st.i for st in states),
        tuple(getattr(st, "j", 0) for st in states),
        tuple(base_of(v, st) for v, st in enumerate(states)),
        eps,
        gamma,
        tuple(st.dominated for st in states),
    )


def compute_tau(g: WeightedGraph, seed: int = 0) -> list[int]:
    """``tau_v``: the lightest weight in the closed neighborhood, in one round."""

    class TauProgram(NodeProgram):
        def init(self, ctx):
            return ctx.weight, [(u, (ctx.weight,)) for u in ctx.neighbors], False

        def on_round(self, ctx, state, inbox, rnd):
            return min([state, *(w for _, (w,) in inbox)]), (), True

    return run_synchronous(g, TauProgram(), seed=seed, round_cap=1).per_node_output


def _run_primal_dual(g, program, monitor: bool, keep_trace: bool, cap_rounds: int, knowns=Knowns()):
    hook = PackingMonitor(g) if monitor else None
    sim = run_synchronous(
        g,
        program,
        knowns,
        seed=0,
        round_cap=ROUND_CAP_FACTOR * cap_rounds,
        keep_trace=keep_trace,
        on_round_end=hook,
    )
    return sim, hook


def partial_dominating_set(
    g: WeightedGraph,
    eps: Fraction | str,
    lam: Fraction | str,
    *,
    monitor: bool = True,
    keep_trace: bool = False,
) -> PartialResult:
    """Partial dominating set ``S`` and a feasible packing certificate.

    Runs exactly ``r`` iterations (see :func:`partial_iterations`); nodes
    that end up undominated carry ``x_v > lam * tau_v``.
    """
    eps, lam = parse_fraction(eps), parse_fraction(lam)
    params = AlgoParams(eps, lam, g.max_degree)
    params.validate(g.declared_alpha)
    r = params.r
    program = PrimalDualProgram(eps, lambda ctx: partial_iterations(eps, lam, ctx.delta), "halt")
    sim, _ = _run_primal_dual(g, program, monitor, keep_trace, 2 * r + 2)
    states = sim.per_node_output
    delta = g.max_degree
    packing = _packing_from_states(states, eps, lambda v, st: delta + 1)
    return PartialResult(
        members=frozenset(v for v, st in enumerate(states) if st.in_s),
        packing=packing,
        rounds=sim.rounds_executed,
        iterations=max((st.iteration for st in states), default=0),
        dominated=frozenset(v for v, st in enumerate(states) if st.dominated),
        sim=sim,
    )


def dominated_by(g: WeightedGraph, members) -> set[int]:
    out = set()
    for v in members:
        out.add(v)
        out.update(g.adjacency[v])
    return out


def partial_properties(
    g: WeightedGraph, members, packing: PackingAssignment, lam: Fraction, alpha: int, eps: Fraction
) -> tuple[bool, bool]:
    """Check the two guarantees of a partial dominating set, exactly.

    (a) ``w_S * (1/(1+eps) - lam*(alpha+1)) <= alpha * sum of x over N+(S)``
    (b) ``x_v >= lam * tau_v`` for every node outside ``N+(S)``
    """
    covered = dominated_by(g, members)
    w_s = sum(g.weights[v] for v in members)
    slack = 1 / (1 + eps) - lam * (alpha + 1)
    prop_a = w_s * slack <= alpha * packing.total(covered)
    tau = [min(g.weights[u] for u in g.closed_neighborhood(v)) for v in range(g.n)]
    prop_b = all(packing.value(v) >= lam * tau[v] for v in range(g.n) if v not in covered)
    return prop_a, prop_b


def _result(algo, g, states, sim, certificate, factor, extras=None) -> DominatingSetResult:
    members = frozenset(v for v, st in enumerate(states) if st.in_s or st.in_ext)
    return DominatingSetResult(
        algo=algo,
        members=members,
        total_weight=sum(g.weights[v] for v in members),
        certificate=certificate,
        rounds=sim.rounds_executed,
        claimed_factor=factor,
        partial=frozenset(v for v, st in enumerate(states) if st.in_s),
        iterations=max((st.iteration for st in states), default=0),
        max_message_bits=sim.max_message_bits,
        total_messages=sim.total_messages,
        extras=extras if extras is not None else {},
    )


def mds_deterministic(
    g: WeightedGraph, eps: Fraction | str, *, monitor: bool = True, keep_trace: bool = False
) -> DominatingSetResult:
    """``(2 alpha + 1)(1 + eps)``-approximate weighted dominating set."""
    eps = parse_fraction(eps)
    _check_eps(eps)
    alpha = _alpha_of(g)
    lam = 1 / ((2 * alpha + 1) * (1 + eps))
    r = partial_iterations(eps, lam, g.max_degree)
    program = PrimalDualProgram(eps, lambda ctx: partial_iterations(eps, lam, ctx.delta), "tau")
    sim, hook = _run_primal_dual(g, program, monitor, keep_trace, 2 * r + 2)
    states = sim.per_node_output
    delta = g.max_degree
    cert = _packing_from_states(states, eps, lambda v, st: delta + 1)
    res = _result("det", g, states, sim, cert, (2 * alpha + 1) * (1 + eps))
    res.extras.update(lam=format_fraction(lam), r=r, alpha=alpha)
    res.extras["sim"] = sim
    return res


def mds_unweighted(
    g: WeightedGraph, eps: Fraction | str, *, monitor: bool = True, keep_trace: bool = False
) -> DominatingSetResult:
    """Unit-weight variant: undominated nodes join themselves at the end."""
    eps = parse_fraction(eps)
    _check_eps(eps)
    if not g.is_unit_weighted():
        raise NonUnitWeights("mds_unweighted needs unit weights")
    alpha = _alpha_of(g)
    iters = unweighted_iterations(eps, alpha, g.max_degree)
    program = PrimalDualProgram(eps, lambda ctx: unweighted_iterations(eps, alpha, ctx.delta), "self")
    sim, hook = _run_primal_dual(g, program, monitor, keep_trace, 2 * iters + 2)
    states = sim.per_node_output
    delta = g.max_degree
    cert = _packing_from_states(states, eps, lambda v, st: delta + 1)
    res = _result("unweighted", g, states, sim, cert, (2 * alpha + 1) * (1 + eps))
    res.extras.update(r=iters, alpha=alpha)
    res.extras["sim"] = sim
    return res


# ---------------------------------------------------------------------------
# early-exit variants (unknown Delta, unknown alpha)
# ---------------------------------------------------------------------------


class _EEState:
    __slots__ = (
        "tau", "base", "i", "x", "lam", "x_of", "nbr_base", "nbr_w", "nbr_dom",
        "dominated", "announced", "in_s", "in_ext", "iteration", "start",
        # orientation stage
        "peeled", "peel_round", "unpeeled", "out", "outdeg", "alpha_hat",
    )

    def __init__(self) -> None:
        self.tau = 1
        self.base = 1
        self.i = 0
        self.x: Fraction | None = None
        self.lam = Fraction(0)
        self.x_of: dict[int, Fraction] = {}
        self.nbr_base: dict[int, int] = {}
        self.nbr_w: dict[int, int] = {}
        self.nbr_dom: set[int] = set()
        self.dominated = False
        self.announced = False
        self.in_s = False
        self.in_ext = False
        self.iteration = 0
        self.start = 0
        self.peeled = False
        self.peel_round = -1
        self.unpeeled: set[int] = set()
        self.out: set[int] = set()
        self.outdeg = 0
        self.alpha_hat = 0


class EarlyExitProgram(NodeProgram):
    """Iterations of the partial dominating set procedure where every
    iteration opens with a completion step: an undominated node whose value
    already exceeds ``lam_v * tau_v`` selects the lowest-id node of weight
    ``tau_v`` around it. Needs no global round count; a node halts once its
    whole closed neighborhood is dominated.

    Each iteration takes three rounds: select/tightness, membership
    propagation, packing update.
    """

    def __init__(self, eps: Fraction):
        self.eps = eps
        self.grow = PowerTable(1 + eps)

    def _x(self, tau: int, i: int, base: int) -> Fraction:
        return Fraction(tau, base) * self.grow[i]

    def iterate(self, ctx, st, inbox, rnd):
        phase = (rnd - st.start) % 3
        if phase == 0:
            return self._select_and_test(ctx, st, inbox)
        if phase == 1:
            out = ()
            for u, (flags,) in inbox:
                if flags & JOIN:
                    st.dominated = True
                    st.nbr_dom.add(u)
                if flags & SELECT:
                    st.dominated = True
                    if not (st.in_s or st.in_ext):
                        st.in_ext = True
                        out = [(v, (JOIN,)) for v in ctx.neighbors]
            return st, out, False
        for u, (flags,) in inbox:
            st.dominated = True
            st.nbr_dom.add(u)
        st.iteration += 1
        if not st.dominated:
            st.i += 1
            st.x = self._x(st.tau, st.i, st.base)
            return st, [(u, (st.tau, st.i)) for u in ctx.neighbors], False
        if not st.announced:
            st.announced = True
            return st, [(u, (0,)) for u in ctx.neighbors], False
        return st, (), False

    def _select_and_test(self, ctx, st, inbox):
        for u, payload in inbox:
            if payload == (0,):
                st.nbr_dom.add(u)
            else:
                tau, i = payload
                st.x_of[u] = self._x(tau, i, st.nbr_base[u])
        if st.dominated and len(st.nbr_dom) == ctx.degree:
            return st, (), True
        flags: dict[int, int] = {}
        if not st.dominated and st.x > st.lam * st.tau:
            st.dominated = True
            u = _tau_target(ctx, st.nbr_w, st.tau)
            if u == ctx.id:
                st.in_ext = True
                for v in ctx.neighbors:
                    flags[v] = JOIN
            else:
                flags[u] = SELECT
        load = st.x + sum(st.x_of.values(), Fraction(0))
        if not st.in_s and load * (1 + self.eps) >= ctx.weight:
            st.in_s = True
            st.dominated = True
            for v in ctx.neighbors:
                flags[v] = flags.get(v, 0) | JOIN
        return st, [(v, (f,)) for v, f in sorted(flags.items())], False


class UnknownDeltaProgram(EarlyExitProgram):
    def __init__(self, eps: Fraction):
        super().__init__(eps)

    def init(self, ctx):
        st = _EEState()
        return st, [(u, (ctx.weight, ctx.degree)) for u in ctx.neighbors], False

    def on_round(self, ctx, st, inbox, rnd):
        if rnd == 1:
            size = ctx.degree + 1
            for u, (w, deg) in inbox:
                st.nbr_w[u] = w
                size = max(size, deg + 1)
            st.tau = min([ctx.weight, *st.nbr_w.values()])
            st.base = size
            st.x = self._x(st.tau, 0, size)
            st.lam = 1 / ((2 * ctx.alpha + 1) * (1 + self.eps))
            st.start = 2
            return st, [(u, (st.tau, st.base)) for u in ctx.neighbors], False
        if rnd == 2:
            for u, (tau, base) in inbox:
                st.nbr_base[u] = base
                st.x_of[u] = self._x(tau, 0, base)
            inbox = []
        return self.iterate(ctx, st, inbox, rnd)


def mds_unknown_delta(
    g: WeightedGraph, eps: Fraction | str, *, monitor: bool = True, keep_trace: bool = False
) -> DominatingSetResult:
    """Weighted variant for nodes that do not know the maximum degree."""
    eps = parse_fraction(eps)
    _check_eps(eps)
    alpha = _alpha_of(g)
    lam = 1 / ((2 * alpha + 1) * (1 + eps))
    bound = partial_iterations(eps, lam, g.max_degree) + 3
    g_known = g.with_alpha(alpha)
    sim, hook = _run_primal_dual(
        g_known, UnknownDeltaProgram(eps), monitor, keep_trace, 2 + 3 * bound,
        knowns=Knowns(n=False, delta=False, alpha=True),
    )
    states = sim.per_node_output
    cert = _packing_from_states(states, eps, lambda v, st: st.base)
    res = _result("unknown-delta", g, states, sim, cert, (2 * alpha + 1) * (1 + eps))
    res.extras.update(lam=format_fraction(lam), alpha=alpha)
    res.extras["sim"] = sim
    return res


class UnknownAlphaProgram(EarlyExitProgram):
    """Peeling orientation with a doubling guess on the arboricity, then the
    early-exit iterations with a per-node ``lam_v`` from the local estimate
    ``alpha_hat_v`` (largest out-degree in the closed neighborhood).

    Guesses ``A = 1, 2, 4, ...`` each get ``K = ceil(log_{1+eps/2} n)``
    peeling rounds; a node peels once its residual degree is at most
    ``(2+eps) A``, orienting its edges toward the nodes still present.
    Edges between nodes that peel in the same round point to the higher id.
    """

    def __init__(self, eps: Fraction):
        super().__init__(eps)

    def schedule(self, n: int) -> tuple[int, int]:
        k = max(1, ceil_log(1 + self.eps / 2, Fraction(n)))
        guesses = max(1, (n - 1).bit_length() + 1)
        return k, guesses

    def init(self, ctx):
        st = _EEState()
        st.unpeeled = set(ctx.neighbors)
        return st, (), False

    def on_round(self, ctx, st, inbox, rnd):
        k, guesses = self.schedule(ctx.n)
        last_peel = k * guesses
        if rnd <= last_peel + 1:
            for u, _ in inbox:
                if not st.peeled:
                    st.unpeeled.discard(u)
                elif st.peel_round == rnd - 1 and u < ctx.id:
                    st.out.discard(u)
            if rnd == last_peel + 1:
                if not st.peeled:
                    raise SimulationError(f"node {ctx.id} unpeeled after the last guess")
                st.outdeg = len(st.out)
                return st, [(u, (st.outdeg,)) for u in ctx.neighbors], False
            guess = 1 << ((rnd - 1) // k)
            if not st.peeled and len(st.unpeeled) <= (2 + self.eps) * guess:
                st.peeled = True
                st.peel_round = rnd
                st.out = set(st.unpeeled)
                return st, [(u, (1,)) for u in sorted(st.unpeeled)], False
            return st, (), False
        if rnd == last_peel + 2:
            st.alpha_hat = max([st.outdeg, *(d for _, (d,) in inbox)])
            st.lam = 1 / ((2 * st.alpha_hat + 1) * (1 + self.eps))
            st.tau = 1
            st.base = ctx.n + 1
            st.x = Fraction(1, st.base)
            for u in ctx.neighbors:
                st.nbr_w[u] = 1
                st.nbr_base[u] = st.base
                st.x_of[u] = st.x
            st.start = rnd
            inbox = []
        return self.iterate(ctx, st, inbox, rnd)


def mds_unknown_alpha(
    g: WeightedGraph, eps: Fraction | str, *, monitor: bool = True, keep_trace: bool = False
) -> DominatingSetResult:
    """Unit-weight variant where nodes know only ``n``.

    ``claimed_factor`` is ``(2 alpha' + 1)(2 + eps)`` with ``alpha'`` the
    largest out-degree produced by the orientation stage.
    """
    eps = parse_fraction(eps)
    _check_eps(eps)
    if not g.is_unit_weighted():
        raise NonUnitWeights("mds_unknown_alpha needs unit weights")
    program = UnknownAlphaProgram(eps)
    k, guesses = program.schedule(g.n)
    iters = ceil_log(1 + eps, Fraction(2 * (2 * g.n + 1) * (g.n + 1))) + 3
    sim, hook = _run_primal_dual(
        g, program, monitor, keep_trace, k * guesses + 2 + 3 * iters,
        knowns=Knowns(n=True, delta=False, alpha=False),
    )
    states = sim.per_node_output
    arcs = tuple((u, v) if v in states[u].out else (v, u) for u, v in g.edges)
    orientation = Orientation(arcs, tuple(len(st.out) for st in states))
    alpha_prime = orientation.max_out_degree
    cert = _packing_from_states(states, eps, lambda v, st: st.base)
    factor = (2 * alpha_prime + 1) * (2 + eps)
    res = _result("unknown-alpha", g, states, sim, cert, factor)
    res.extras.update(
        alpha_prime=alpha_prime,
        alpha_hat=[st.alpha_hat for st in states],
        orientation_rounds=k * guesses + 1,
    )
    res.extras["orientation"] = orientation
    res.extras["sim"] = sim
    return res


# ---------------------------------------------------------------------------
# forests
# ---------------------------------------------------------------------------


def is_forest(g: WeightedGraph) -> bool:
    parent = list(range(g.n))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in g.edges:
        a, b = find(u), find(v)
        if a == b:
            return False
        parent[a] = b
    return True


class _TreeState:
    __slots__ = ("in_ext", "in_s", "iteration", "dominated", "x")

    def __init__(self) -> None:
        self.in_ext = False
        self.in_s = False
        self.iteration = 0
        self.dominated = True
        self.x = None


class TreeProgram(NodeProgram):
    """All non-leaf nodes, plus the lone node of a single-node component and
    the lower-id end of a two-node component."""

    def init(self, ctx):
        st = _TreeState()
        if ctx.degree == 0:
            st.in_ext = True
            return st, (), True
        return st, [(u, (ctx.degree,)) for u in ctx.neighbors], False

    def on_round(self, ctx, st, inbox, rnd):
        if ctx.degree >= 2:
            st.in_ext = True
        else:
            (u, (deg,)), = inbox
            st.in_ext = deg == 1 and ctx.id < u
        return st, (), True


def tree_mds(g: WeightedGraph) -> DominatingSetResult:
    if not is_forest(g):
        raise NotAForest("tree_mds needs an acyclic graph")
    if not g.is_unit_weighted():
        raise NonUnitWeights("tree_mds needs unit weights")
    sim = run_synchronous(g, TreeProgram(), Knowns(n=False, delta=False, alpha=False), round_cap=1)
    res = _result("tree", g, sim.per_node_output, sim, None, Fraction(3))
    res.extras["sim"] = sim
    return res
