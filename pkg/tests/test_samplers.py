import itertools
import math
import time

import numpy as np
import pytest
from scipy import stats

from rigequiv.graph_core import FeatureAssignment, LabeledGraph, pair_list, project_to_graph, union_graphs
from rigequiv.properties_stats import binomial_gof
from rigequiv.samplers import (
    NAIVE_GUARD,
    RngStream,
    decompose_by_size,
    project_stratified,
    sample_er,
    sample_iid_hypergraph,
    sample_rig_naive,
    sample_rig_stratified,
    sample_size_counts,
    sequential_count_pmf,
    size_distribution,
    stratified_to_assignment,
    uniform_k_subsets,
)
from rigequiv.tv_oracle import FinitePmf, rig_exact_pmf, tv_exact


def _clique_bits(n, subset):
    index = {pr: i for i, pr in enumerate(pair_list(n))}
    bits = 0
    for pr in itertools.combinations(sorted(subset), 2):
        bits |= 1 << index[pr]
    return bits


def _or_convolve(a: dict, b: dict) -> dict:
    out: dict = {}
    for x, px in a.items():
        for y, py in b.items():
            out[x | y] = out.get(x | y, 0.0) + px * py
    return out


def stratified_oracle(n, m, p):
    """Projected-graph pmf of the stratified scheme: multinomial sizes, then uniform k-subsets."""
    pi = size_distribution(n, p)
    per_size = {}
    for k in range(n + 1):
        subsets = list(itertools.combinations(range(n), k))
        d: dict = {}
        for s in subsets:
            b = _clique_bits(n, s)
            d[b] = d.get(b, 0.0) + 1.0 / len(subsets)
        per_size[k] = d
    total: dict = {}
    for counts in itertools.product(range(m + 1), repeat=n + 1):
        if sum(counts) != m:
            continue
        w = stats.multinomial.pmf(counts, m, pi)
        if w == 0:
            continue
        law = {0: 1.0}
        for k, c in enumerate(counts):
            for _ in range(c):
                law = _or_convolve(law, per_size[k])
        for g, v in law.items():
            total[g] = total.get(g, 0.0) + w * v
    return FinitePmf(total, ("graphs", n))


# -- Erdos-Renyi -----------------------------------------------------------

def test_er_extremes():
    gen = np.random.default_rng(1)
    assert sample_er(6, 0.0, gen).num_edges == 0
    assert sample_er(6, 1.0, gen) == LabeledGraph.complete(6)
    with pytest.raises(ValueError):
        sample_er(4, 1.2, gen)


def test_er_edge_count_binomial():
    gen = RngStream(11, 0).generator()
    counts = [sample_er(4, 0.5, gen).num_edges for _ in range(100_000)]
    assert binomial_gof(counts, 6, 0.5) > 0.01


# -- naive G(n,m,p) --------------------------------------------------------

def test_naive_extremes_and_guard():
    gen = np.random.default_rng(2)
    assert all(not s for s in sample_rig_naive(5, 7, 0.0, gen).memberships)
    assert all(s == frozenset(range(5)) for s in sample_rig_naive(5, 7, 1.0, gen).memberships)
    with pytest.raises(ValueError):
        sample_rig_naive(10, NAIVE_GUARD, 0.1, gen)


def test_naive_matches_oracle_at_1e6_samples():
    n, m, p = 4, 3, 0.2
    exact = rig_exact_pmf(n, m, p)
    gen = RngStream(12, 0).generator()
    freq: dict = {}
    batch = 100_000
    for _ in range(10):
        # one long run of iid features, cut into consecutive groups of m
        f = sample_rig_naive(n, m * batch, p, gen)
        keys = np.zeros(batch, dtype=np.int64)
        for j, s in enumerate(f.memberships):
            if len(s) > 1:
                keys[j // m] |= _clique_bits(n, s)
        for key, c in zip(*np.unique(keys, return_counts=True)):
            freq[int(key)] = freq.get(int(key), 0) + int(c)
    total = sum(freq.values())
    emp = FinitePmf({k: v / total for k, v in freq.items()}, ("graphs", n))
    assert tv_exact(emp, exact) < 0.01


# -- stratified G(n,m,p) -------------------------------------------------

def test_stratified_p_zero():
    sf = sample_rig_stratified(6, 40, 0.0, np.random.default_rng(0))
    assert sf.counts[0] == 40 and sum(sf.counts.values()) == 40
    assert not sf.sets


def test_stratified_invariants():
    sf = sample_rig_stratified(8, 500, 0.3, np.random.default_rng(5))
    assert sf.m == 500
    for k, rows in sf.sets.items():
        assert rows.shape == (sf.counts[k], k)
        assert (np.diff(rows, axis=1) > 0).all()
    f = stratified_to_assignment(sf)
    assert f.m == 500
    assert project_to_graph(f) == project_stratified(sf)


@pytest.mark.parametrize("m", [1, 3, 6])
@pytest.mark.parametrize("p", [0.1, 0.5])
def test_stratified_equals_naive_exactly(m, p):
    assert tv_exact(stratified_oracle(4, m, p), rig_exact_pmf(4, m, p)) < 1e-9


def test_sequential_binomials_reproduce_multinomial():
    n, m, p = 3, 4, 0.35
    pi = size_distribution(n, p)
    worst = 0.0
    total = 0.0
    for counts in itertools.product(range(m + 1), repeat=n + 1):
        if sum(counts) != m:
            continue
        got = sequential_count_pmf(n, p, dict(enumerate(counts)))
        worst = max(worst, abs(got - stats.multinomial.pmf(counts, m, pi)))
        total += got
    assert worst < 1e-12
    assert total == pytest.approx(1.0, abs=1e-12)


def test_sequential_counts_empirical_frequencies():
    n, m, p = 3, 4, 0.35
    gen = np.random.default_rng(21)
    draws = []
    for _ in range(20_000):
        counts = sample_size_counts(n, m, p, gen)[0]
        draws.append(tuple(counts[k] for k in range(n + 1)))
    c = {}
    for d in draws:
        c[d] = c.get(d, 0) + 1
    pi = size_distribution(n, p)
    for counts, k in c.items():
        expect = stats.multinomial.pmf(counts, m, pi) * len(draws)
        assert abs(k - expect) <= 5 * math.sqrt(expect) + 1


def test_stratified_huge_m_is_fast_and_unbiased():
    n, m, p = 500, 62_500_000_000, 4.5e-7
    pi2 = size_distribution(n, p)[2]
    start = time.perf_counter()
    sample_rig_stratified(n, m, p, np.random.default_rng(3))
    assert time.perf_counter() - start < 1.0
    gen = RngStream(13, 0).generator()
    c2 = np.array([sample_size_counts(n, m, p, gen)[0][2] for _ in range(1000)])
    sigma = math.sqrt(m * pi2 * (1 - pi2) / 1000)
    assert abs(c2.mean() - m * pi2) <= 3 * sigma


def test_truncation_folds_into_size_zero():
    counts, warnings = sample_size_counts(10, 10_000, 0.2, np.random.default_rng(4), k_max=3)
    assert sum(counts.values()) == 10_000
    assert all(counts[k] == 0 for k in range(4, 11))
    assert warnings


def test_uniform_k_subsets_distinct_and_uniform():
    rows = uniform_k_subsets(6, 3, 40_000, np.random.default_rng(8))
    assert (np.diff(rows, axis=1) > 0).all()
    _, counts = np.unique(rows, axis=0, return_counts=True)
    assert len(counts) == 20
    assert stats.chisquare(counts).pvalue > 0.01


# -- hypergraphs -----------------------------------------------------------

def test_iid_hypergraph_extremes():
    gen = np.random.default_rng(6)
    assert len(sample_iid_hypergraph(6, 3, 0.0, gen)) == 0
    assert len(sample_iid_hypergraph(6, 3, 1.0, gen)) == 20
    with pytest.raises(ValueError):
        sample_iid_hypergraph(4, 5, 0.1, gen)


def test_iid_hypergraph_edge_count_binomial():
    gen = RngStream(14, 0).generator()
    counts = [len(sample_iid_hypergraph(6, 3, 0.1, gen)) for _ in range(100_000)]
    assert binomial_gof(counts, 20, 0.1) > 0.01


def test_iid_hypergraph_rejection_path():
    n, k, q = 200, 4, 2e-7
    total = math.comb(n, k)
    assert total > 10**6
    gen = RngStream(15, 0).generator()
    counts = np.array([len(sample_iid_hypergraph(n, k, q, gen)) for _ in range(2000)])
    sigma = math.sqrt(total * q * (1 - q) / 2000)
    assert abs(counts.mean() - total * q) <= 3 * sigma


def test_decompose_examples():
    f = FeatureAssignment(4, [{0, 1}, {0, 1, 2}, {3}])
    d = decompose_by_size(f)
    assert set(d) == {2, 3}
    assert d[2].edges == {(0, 1)} and d[3].edges == {(0, 1, 2)}
    assert decompose_by_size(FeatureAssignment(4, [(), ()])) == {}


def test_decompose_union_identity():
    gen = RngStream(16, 0).generator()
    for _ in range(10_000):
        f = sample_rig_naive(6, 20, 0.3, gen)
        parts = [project_to_graph(h) for h in decompose_by_size(f).values()]
        assert union_graphs(parts + [LabeledGraph.empty(6)]) == project_to_graph(f)


# -- streams ---------------------------------------------------------------

def test_streams_reproducible_and_independent():
    a = RngStream(99, 3).generator().random(10_000)
    b = RngStream(99, 3).generator().random(10_000)
    c = RngStream(99, 4).generator().random(10_000)
    assert np.array_equal(a, b)
    assert abs(np.corrcoef(a, c)[0, 1]) < 4 / math.sqrt(10_000)
    assert not np.array_equal(RngStream(99, 3).child(0).random(5), RngStream(99, 3).child(1).random(5))
