import io

import pytest
from hypothesis import given, strategies as st

from arbodom.graph import generate_star, path_graph
from arbodom.simulator import (
    IllegalSend,
    KnowledgeError,
    Knowns,
    MissingTrace,
    NodeProgram,
    RoundCapExceeded,
    encode_payload,
    message_width_audit,
    payload_bits,
    run_synchronous,
)


class Flood(NodeProgram):
    """Node 0 starts a token; everyone forwards it once and records the round."""

    def init(self, ctx):
        if ctx.id == 0:
            return 0, [(u, (1,)) for u in ctx.neighbors], True
        return None, (), False

    def on_round(self, ctx, state, inbox, rnd):
        if inbox:
            return rnd, [(u, (1,)) for u in ctx.neighbors], True
        return state, (), False


def test_flood_reaches_in_distance_rounds():
    res = run_synchronous(path_graph(5), Flood(), keep_trace=True)
    assert res.per_node_output == [0, 1, 2, 3, 4]
    assert res.rounds_executed == 4
    assert res.max_message_bits == 8


def test_messages_arrive_next_round_sorted_by_sender():
    seen = {}

    class Echo(NodeProgram):
        def init(self, ctx):
            return None, [(u, (ctx.id,)) for u in ctx.neighbors], False

        def on_round(self, ctx, state, inbox, rnd):
            seen[ctx.id] = [s for s, _ in inbox]
            return None, (), True

    run_synchronous(generate_star(3), Echo())
    assert seen[0] == [1, 2, 3]
    assert seen[2] == [0]


def test_illegal_send_is_rejected():
    class Bad(NodeProgram):
        def init(self, ctx):
            return None, [(ctx.id, (0,))], True

    with pytest.raises(IllegalSend):
        run_synchronous(path_graph(2), Bad())


def test_round_cap():
    class Forever(NodeProgram):
        def init(self, ctx):
            return None, (), False

        def on_round(self, ctx, state, inbox, rnd):
            return None, (), False

    with pytest.raises(RoundCapExceeded):
        run_synchronous(path_graph(2), Forever(), round_cap=5)


def test_unknown_globals_raise():
    class Peek(NodeProgram):
        def init(self, ctx):
            return ctx.delta, (), True

    with pytest.raises(KnowledgeError):
        run_synchronous(path_graph(2), Peek(), Knowns(delta=False))
    assert run_synchronous(path_graph(3), Peek()).per_node_output == [2, 2, 2]


def test_coin_is_reproducible_and_keyed():
    class Coins(NodeProgram):
        def init(self, ctx):
            return [ctx.random_bits(r) for r in range(4)], (), True

    a = run_synchronous(path_graph(3), Coins(), seed=11).per_node_output
    b = run_synchronous(path_graph(3), Coins(), seed=11).per_node_output
    c = run_synchronous(path_graph(3), Coins(), seed=12).per_node_output
    assert a == b and a != c
    assert a[0] != a[1]


def test_coin_extremes():
    class C(NodeProgram):
        def init(self, ctx):
            return (ctx.coin(1, 1, 0), ctx.coin(0, 5, 0)), (), True

    assert run_synchronous(path_graph(2), C()).per_node_output == [(True, False)] * 2


def test_coin_frequency():
    class C(NodeProgram):
        def init(self, ctx):
            return sum(ctx.coin(1, 4, k) for k in range(4000)), (), True

    hits = run_synchronous(path_graph(1), C(), seed=3).per_node_output[0]
    # binomial(4000, 1/4): mean 1000, sd about 27
    assert abs(hits - 1000) < 140


@given(st.lists(st.integers(-(10**12), 10**12), min_size=1, max_size=5))
def test_payload_width_is_byte_aligned(payload):
    bits = payload_bits(tuple(payload))
    assert bits % 8 == 0 and bits == 8 * len(encode_payload(payload))


def test_small_values_fit_one_byte():
    assert payload_bits((63,)) == 8
    assert payload_bits((64,)) == 16
    assert payload_bits((-1, 0, 1)) == 24


def test_audit_needs_trace():
    res = run_synchronous(path_graph(3), Flood())
    with pytest.raises(MissingTrace):
        message_width_audit(res, 3, 8)


def test_audit_verdicts():
    res = run_synchronous(path_graph(3), Flood(), keep_trace=True)
    assert message_width_audit(res, 3, 8).passed
    assert message_width_audit(res, 3, 1).verdict == "warn"


def test_trace_dump_format():
    res = run_synchronous(path_graph(2), Flood(), keep_trace=True)
    buf = io.StringIO()
    res.dump_trace(buf)
    assert buf.getvalue() == "0 0 1 8 02\n1 1 0 8 02\n"


def test_round_hook_sees_every_round():
    calls = []
    run_synchronous(path_graph(4), Flood(), on_round_end=lambda r, states: calls.append(r))
    assert calls == [0, 1, 2, 3]
