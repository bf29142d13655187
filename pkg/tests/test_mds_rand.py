import statistics
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from arbodom.graph import (
    WeightedGraph,
    generate_bounded_arboricity,
    generate_star,
    path_graph,
)
from arbodom.mds_det import InvalidParams
from arbodom.mds_rand import (
    InvalidPacking,
    extend_randomized,
    extension_schedule,
    general_gamma,
    mds_general,
    mds_randomized,
    randomized_params,
    sampling_probability,
)
from arbodom.oracle import exact_mds, is_dominating
from arbodom.packing import PackingAssignment


def initial_packing(g):
    d = g.max_degree
    tau = [min(g.weights[u] for u in g.closed_neighborhood(v)) for v in range(g.n)]
    return PackingAssignment(tuple(tau), (0,) * g.n, (0,) * g.n, (d + 1,) * g.n, Fraction(0))


def test_schedule_examples():
    assert extension_schedule(Fraction(2), Fraction(1, 5), 4) == (3, 4)
    assert extension_schedule(Fraction(3, 2), Fraction(1, 9), 8) == (6, 7)
    assert extension_schedule(Fraction(8), Fraction(1, 9), 8) == (2, 3)


def test_sampling_probability_doubles_until_one():
    probs = [sampling_probability(Fraction(2), 4, k) for k in range(1, 5)]
    assert probs == [Fraction(1, 5), Fraction(2, 5), Fraction(4, 5), Fraction(1)]


def test_parameter_schedule():
    assert randomized_params(3, 2) == (Fraction(1, 8), Fraction(1, 32), Fraction(2))
    assert randomized_params(16, 1) == (Fraction(1, 4), Fraction(1, 68), Fraction(4))
    gamma = randomized_params(5, 1)[2]
    z = gamma * 2**20
    assert z.denominator == 1
    assert z**2 >= 5 * 2**40 > (z - 1) ** 2


def test_general_gamma():
    assert general_gamma(8, 1) == 8
    assert general_gamma(16, 2) == 4
    assert general_gamma(1, 3) == 2
    assert general_gamma(0, 1) == 2


def test_everything_already_dominated():
    g = generate_star(4)
    ext = extend_randomized(g, {0}, initial_packing(g), "1/5", "2", seed=1)
    assert ext.members == frozenset()
    assert ext.tally.c == (0,) * 5


def test_single_undominated_node_gets_covered():
    g = path_graph(3)
    for seed in range(30):
        ext = extend_randomized(g, {0}, initial_packing(g), "1/3", "2", seed)
        assert is_dominating(g, {0} | ext.members)
        assert ext.tally.c[2] >= 1 and ext.tally.c[0] == ext.tally.c[1] == 0


def test_input_checks():
    g = generate_star(4)
    with pytest.raises(InvalidPacking):
        # lambda larger than x_v / tau_v for undominated nodes
        extend_randomized(g, (), initial_packing(g), "1/2", "2", 0)
    with pytest.raises(InvalidPacking):
        bad = PackingAssignment((5,) * 5, (0,) * 5, (0,) * 5, (5,) * 5, Fraction(0))
        extend_randomized(g, (), bad, "1/5", "2", 0)
    with pytest.raises(InvalidParams):
        extend_randomized(g, (), initial_packing(g), "1/5", "1", 0)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 16), alpha=st.integers(1, 3), wmax=st.sampled_from([1, 8]),
    gseed=st.integers(0, 10**6), seed=st.integers(0, 10**6),
    gamma=st.sampled_from([Fraction(3, 2), Fraction(2), Fraction(3)]),
)
def test_extension_dominates_and_follows_schedule(n, alpha, wmax, gseed, seed, gamma):
    g = generate_bounded_arboricity(n, alpha, wmax, gseed)
    lam = Fraction(1, g.max_degree + 1)
    ext = extend_randomized(g, (), initial_packing(g), lam, gamma, seed)
    assert is_dominating(g, ext.members)
    phases, iters = extension_schedule(gamma, lam, g.max_degree)
    assert (ext.phases, ext.iterations) == (phases, iters)
    assert ext.rounds <= 2 + 2 * phases * iters
    for v in range(g.n):
        first = ext.tally.first[v]
        assert first is not None and 1 <= first[0] <= phases and 1 <= first[1] <= iters
        assert 1 <= ext.tally.c[v] <= g.degree(v) + 1
    assert sum(ext.phase_weights) == sum(g.weights[v] for v in ext.members)


def test_extension_is_reproducible():
    g = generate_bounded_arboricity(14, 2, 8, 3)
    a = extend_randomized(g, (), initial_packing(g), Fraction(1, g.max_degree + 1), "3/2", 9)
    b = extend_randomized(g, (), initial_packing(g), Fraction(1, g.max_degree + 1), "3/2", 9)
    assert a.members == b.members and a.tally == b.tally


def test_star_center_cover_count():
    g = generate_star(4)
    p = initial_packing(g)
    cs = [
        extend_randomized(g, (), p, "1/5", "2", s, monitor=False, check_input=False).tally.c[0]
        for s in range(10_000)
    ]
    mean = statistics.fmean(cs)
    se = statistics.stdev(cs) / len(cs) ** 0.5
    assert mean <= 3 + 3 * se


def test_randomized_single_node():
    g = WeightedGraph.from_edges(1, [], [3], declared_alpha=1)
    assert mds_randomized(g, 1, seed=4).members == {0}
    assert mds_general(g, 2, seed=4).members == {0}


def test_randomized_t_range():
    g = generate_bounded_arboricity(10, 3, 1, 0)
    mds_randomized(g, 2, 0)
    with pytest.raises(InvalidParams):
        mds_randomized(g, 3, 0)
    with pytest.raises(InvalidParams):
        mds_randomized(g, 0, 0)
    with pytest.raises(InvalidParams):
        mds_general(g, 0, 0)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 14), wmax=st.sampled_from([1, 8]), gseed=st.integers(0, 10**6), seed=st.integers(0, 99))
def test_randomized_composition(n, wmax, gseed, seed):
    g = generate_bounded_arboricity(n, 3, wmax, gseed)
    t = 2
    res = mds_randomized(g, t, seed)
    assert is_dominating(g, res.members)
    assert res.partial <= res.members
    opt = exact_mds(g).opt_weight
    w_s = res.extras["partial_weight"]
    assert w_s <= (3 + Fraction(3, t)) * opt
    assert res.certificate.total() <= opt


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 14), k=st.integers(1, 3), gseed=st.integers(0, 10**6), seed=st.integers(0, 99))
def test_general_dominates(n, k, gseed, seed):
    g = generate_bounded_arboricity(n, 3, 8, gseed).with_alpha(None)
    res = mds_general(g, k, seed)
    assert is_dominating(g, res.members)
    gamma = general_gamma(g.max_degree, k)
    assert res.claimed_factor == gamma * (gamma + 1) * res.extras["phases"]


def test_general_star_k1():
    g = generate_star(8)
    res = mds_general(g, 1, 0)
    assert res.extras["gamma"] == "8"
    assert res.claimed_factor == 144
    assert res.total_weight <= 144
