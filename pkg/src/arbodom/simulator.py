"""Synchronous round-based message passing with per-message width accounting.

A :class:`NodeProgram` is instantiated once per run and drives every node.
Node state is owned by the engine and handed back to the program each round;
programs must keep all per-node data inside that state.

Round 0 is the local ``init`` step. Messages sent in round ``r`` are
delivered at the start of round ``r + 1``. ``rounds_executed`` is the last
round in which some node was still active.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence, TextIO

from .graph import WeightedGraph

__all__ = [
    "SimulationError",
    "RoundCapExceeded",
    "IllegalSend",
    "MissingTrace",
    "KnowledgeError",
    "Knowns",
    "NodeContext",
    "NodeProgram",
    "TraceEvent",
    "SimulationResult",
    "AuditReport",
    "encode_payload",
    "payload_bits",
    "run_synchronous",
    "message_width_audit",
]


class SimulationError(RuntimeError):
    pass


class RoundCapExceeded(SimulationError):
    pass


class IllegalSend(SimulationError):
    pass


class MissingTrace(SimulationError):
    pass


class KnowledgeError(SimulationError):
    """A program read a global quantity it was not given."""


def _zigzag(x: int) -> int:
    return 2 * x if x >= 0 else -2 * x - 1


def encode_payload(payload: Sequence[int]) -> bytes:
    """Canonical encoding: each field as a zigzag LEB128 varint."""
    out = bytearray()
    for x in payload:
        z = _zigzag(int(x))
        while True:
            byte = z & 0x7F
            z >>= 7
            if z:
                out.append(byte | 0x80)
            else:
                out.append(byte)
                break
    return bytes(out)


_WIDTH_CACHE: dict[tuple[int, ...], int] = {}


def payload_bits(payload: tuple[int, ...]) -> int:
    bits = _WIDTH_CACHE.get(payload)
    if bits is None:
        bits = 8 * len(encode_payload(payload))
        if len(_WIDTH_CACHE) < 1 << 16:
            _WIDTH_CACHE[payload] = bits
    return bits


@dataclass(frozen=True)
class Knowns:
    """Which global quantities the nodes are told."""

    n: bool = True
    delta: bool = True
    alpha: bool = True


class NodeContext:
    """What a single node can see: its own id, weight, neighbors and the
    globals allowed by :class:`Knowns`, plus a counter-keyed random stream."""

    __slots__ = ("id", "weight", "neighbors", "_nbr_set", "_globals", "_seed")

    def __init__(self, g: WeightedGraph, v: int, knowns: Knowns, seed: int):
        self.id = v
        self.weight = g.weights[v]
        self.neighbors = g.adjacency[v]
        self._nbr_set = frozenset(self.neighbors)
        self._globals = {
            "n": g.n if knowns.n else None,
            "delta": g.max_degree if knowns.delta else None,
            "alpha": g.declared_alpha if knowns.alpha else None,
        }
        self._seed = seed

    @property
    def degree(self) -> int:
        return len(self.neighbors)

    def _known(self, name: str) -> int:
        value = self._globals[name]
        if value is None:
            raise KnowledgeError(f"node {self.id} does not know {name}")
        return value

    @property
    def n(self) -> int:
        return self._known("n")

    @property
    def delta(self) -> int:
        return self._known("delta")

    @property
    def alpha(self) -> int:
        return self._known("alpha")

    def random_bits(self, *counter: int) -> int:
        """64 uniform bits keyed by ``(seed, node id, *counter)``."""
        key = struct.pack(f"<{2 + len(counter)}q", self._seed, self.id, *counter)
        return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")

    def coin(self, num: int, den: int, *counter: int) -> bool:
        """Bernoulli(num/den) draw, exact up to the 2**-64 grid."""
        if num >= den:
            return True
        return self.random_bits(*counter) * den < num << 64


Outbox = Iterable[tuple[int, tuple[int, ...]]]


class NodeProgram:
    """Per-node synchronous state machine.

    ``init`` returns ``(state, outbox, halted)``; ``on_round`` receives the
    inbox as a list of ``(sender, payload)`` pairs sorted by sender and
    returns the same triple. Payloads are tuples of integers.
    """

    def init(self, ctx: NodeContext) -> tuple[Any, Outbox, bool]:
        raise NotImplementedError

    def on_round(
        self, ctx: NodeContext, state: Any, inbox: list[tuple[int, tuple[int, ...]]], rnd: int
    ) -> tuple[Any, Outbox, bool]:
        raise NotImplementedError

    def output(self, ctx: NodeContext, state: Any) -> Any:
        return state


@dataclass(frozen=True)
class TraceEvent:
    round: int
    src: int
    dst: int
    width_bits: int
    payload: tuple[int, ...]


@dataclass
class SimulationResult:
    rounds_executed: int
    per_node_output: list[Any]
    max_message_bits: int
    total_messages: int
    trace: list[TraceEvent] | None = None
    halt_round: list[int] = field(default_factory=list)

    def dump_trace(self, fp: TextIO) -> None:
        if self.trace is None:
            raise MissingTrace("run was executed without a trace")
        for ev in self.trace:
            fp.write(
                f"{ev.round} {ev.src} {ev.dst} {ev.width_bits} "
                f"{encode_payload(ev.payload).hex()}\n"
            )


RoundHook = Callable[[int, list[Any]], None]


def run_synchronous(
    g: WeightedGraph,
    program: NodeProgram,
    knowns: Knowns = Knowns(),
    seed: int = 0,
    round_cap: int = 10_000,
    *,
    keep_trace: bool = False,
    on_round_end: RoundHook | None = None,
) -> SimulationResult:
    """Run ``program`` on every node of ``g`` until all nodes halt.

    ``on_round_end(round, states)`` is called after ``init`` (round 0) and
    after every round, with the full state list; it is how callers assert
    global invariants such as packing feasibility.
    """
    if round_cap < 1:
        raise ValueError("round_cap must be >= 1")
    n = g.n
    ctxs = [NodeContext(g, v, knowns, seed) for v in range(n)]
    states: list[Any] = [None] * n
    halted = [False] * n
    halt_round = [0] * n
    trace: list[TraceEvent] | None = [] if keep_trace else None
    max_bits = 0
    total = 0
    inboxes: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in range(n)]

    def post(rnd: int, v: int, outbox: Outbox, pending: list[list]) -> None:
        nonlocal max_bits, total
        nbrs = ctxs[v]._nbr_set
        for dst, payload in outbox:
            if dst not in nbrs:
                raise IllegalSend(f"round {rnd}: node {v} sent to non-neighbor {dst}")
            payload = tuple(payload)
            bits = payload_bits(payload)
            if bits > max_bits:
                max_bits = bits
            total += 1
            if trace is not None:
                trace.append(TraceEvent(rnd, v, dst, bits, payload))
            pending[dst].append((v, payload))

    pending: list[list] = [[] for _ in range(n)]
    for v in range(n):
        state, outbox, done = program.init(ctxs[v])
        states[v] = state
        post(0, v, outbox, pending)
        if done:
            halted[v] = True
    if on_round_end is not None:
        on_round_end(0, states)

    rnd = 0
    active = [v for v in range(n) if not halted[v]]
    while active:
        rnd += 1
        if rnd > round_cap:
            raise RoundCapExceeded(f"{len(active)} nodes still active after {round_cap} rounds")
        inboxes, pending = pending, [[] for _ in range(n)]
        for v in active:
            inbox = inboxes[v]
            inbox.sort(key=lambda item: item[0])
            state, outbox, done = program.on_round(ctxs[v], states[v], inbox, rnd)
            states[v] = state
            post(rnd, v, outbox, pending)
            if done:
                halted[v] = True
                halt_round[v] = rnd
        if on_round_end is not None:
            on_round_end(rnd, states)
        active = [v for v in active if not halted[v]]

    outputs = [program.output(ctxs[v], states[v]) for v in range(n)]
    return SimulationResult(rnd, outputs, max_bits, total, trace, halt_round)


@dataclass(frozen=True)
class AuditReport:
    max_message_bits: int
    threshold_bits: int
    verdict: str  # "pass" or "warn"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def log_bits(x: int) -> int:
    """ceil(log2(x + 1)) for x >= 0."""
    return x.bit_length()


def message_width_audit(result: SimulationResult, n: int, c: int) -> AuditReport:
    """Compare the widest traced message against ``c * ceil(log2(n + 1))`` bits."""
    if result.trace is None:
        raise MissingTrace("audit needs a run executed with keep_trace=True")
    widest = max((ev.width_bits for ev in result.trace), default=0)
    threshold = c * log_bits(n)
    return AuditReport(widest, threshold, "pass" if widest <= threshold else "warn")
