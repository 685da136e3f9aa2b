import itertools
import math

import numpy as np
import pytest
from scipy import stats

from rigequiv.graph_core import LabeledGraph, pair_list
from rigequiv.properties_stats import (
    KINDS,
    POISSON_CAVEAT,
    PropertySpec,
    binomial_gof,
    chernoff_tail_bound,
    component_sizes,
    contains_subgraph,
    count_triangles,
    dominance_check,
    evaluate_property,
    exact_binomial_lower_tail,
    exact_binomial_upper_tail,
    exact_pmf_gof,
    max_clique_size,
    poisson_gof,
    tail_threshold_a,
    tail_threshold_regime,
    wilson_ci,
)

K3 = LabeledGraph.complete(3)


def cycle(n):
    return LabeledGraph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(gen, n, p):
    pairs = pair_list(n)
    keep = gen.random(len(pairs)) < p
    return LabeledGraph(n, [pr for pr, k in zip(pairs, keep) if k])


def spec_for(kind, t=2):
    if kind == "contains_subgraph":
        return PropertySpec(kind, pattern=cycle(4))
    return PropertySpec(kind, t)


# -- property evaluation -----------------------------------------------------

def test_property_spec_validation():
    with pytest.raises(ValueError):
        PropertySpec("perfect_matching")
    with pytest.raises(ValueError):
        PropertySpec("contains_subgraph")
    with pytest.raises(ValueError):
        PropertySpec("contains_subgraph", pattern=LabeledGraph.complete(6))
    assert str(PropertySpec("clique_ge", 3)) == "clique_ge(3)"


@pytest.mark.parametrize("kind", KINDS)
def test_complete_graph_satisfies_everything(kind):
    g = LabeledGraph.complete(7)
    assert evaluate_property(g, spec_for(kind, t=5))


def test_empty_graph_is_disconnected():
    assert not evaluate_property(LabeledGraph.empty(2), PropertySpec("connected"))
    assert not evaluate_property(LabeledGraph.empty(9), PropertySpec("connected"))


def test_cycle_c5():
    c5 = cycle(5)
    assert not evaluate_property(c5, PropertySpec("triangle_count_ge", 1))
    assert evaluate_property(c5, PropertySpec("largest_component_ge", 5))
    assert evaluate_property(c5, PropertySpec("connected"))
    assert evaluate_property(c5, PropertySpec("min_degree_ge", 2))
    assert not evaluate_property(c5, PropertySpec("min_degree_ge", 3))
    assert max_clique_size(c5) == 2


def test_triangle_examples():
    assert count_triangles(LabeledGraph.complete(4)) == 4
    bipartite = LabeledGraph(6, [(a, b) for a in range(3) for b in range(3, 6)])
    assert count_triangles(bipartite) == 0
    assert count_triangles(LabeledGraph(4, [(0, 1), (1, 2), (0, 2)])) == 1


def test_triangles_against_brute_force():
    gen = np.random.default_rng(51)
    for _ in range(300):
        g = random_graph(gen, 9, 0.4)
        brute = sum(all(g.has_edge(a, b) for a, b in itertools.combinations(t, 2))
                    for t in itertools.combinations(range(9), 3))
        assert count_triangles(g) == brute


def test_component_sizes_and_clique():
    g = LabeledGraph(7, [(0, 1), (1, 2), (3, 4)])
    assert sorted(component_sizes(g).tolist()) == [1, 1, 2, 3]
    assert max_clique_size(LabeledGraph.complete(6)) == 6
    assert max_clique_size(LabeledGraph.empty(3)) == 1


def test_clique_against_brute_force():
    gen = np.random.default_rng(52)
    for _ in range(200):
        g = random_graph(gen, 8, 0.5)
        best = max(k for k in range(1, 9) for s in itertools.combinations(range(8), k)
                   if all(g.has_edge(a, b) for a, b in itertools.combinations(s, 2)))
        assert max_clique_size(g) == best


def test_contains_subgraph_examples():
    assert contains_subgraph(cycle(6), LabeledGraph(3, [(0, 1), (1, 2)]))
    assert not contains_subgraph(cycle(6), K3)
    assert contains_subgraph(LabeledGraph.complete(5), cycle(5))
    assert contains_subgraph(LabeledGraph.empty(3), LabeledGraph.empty(2))
    with pytest.raises(ValueError):
        contains_subgraph(LabeledGraph.complete(7), LabeledGraph.complete(6))


def test_k3_containment_matches_triangle_count():
    gen = np.random.default_rng(53)
    spec = PropertySpec("contains_subgraph", pattern=K3)
    for _ in range(10_000):
        n = int(gen.integers(3, 10))
        g = random_graph(gen, n, float(gen.uniform(0, 0.5)))
        assert evaluate_property(g, spec) == (count_triangles(g) >= 1)


@pytest.mark.parametrize("kind", KINDS)
def test_monotonicity_audit(kind):
    gen = np.random.default_rng(54)
    spec = spec_for(kind, t=3)
    for _ in range(10_000):
        n = int(gen.integers(4, 9))
        g = random_graph(gen, n, float(gen.uniform(0, 0.6)))
        missing = [pr for pr in pair_list(n) if pr not in g.edges]
        if not missing:
            continue
        extra = missing[int(gen.integers(len(missing)))]
        bigger = LabeledGraph(n, list(g.edges) + [extra])
        assert not (evaluate_property(g, spec) and not evaluate_property(bigger, spec))


# -- tail bounds ----------------------------------------------------------------

def test_chernoff_examples():
    assert chernoff_tail_bound("binomial", 5.0, 0.0, "lower") == 1.0
    assert chernoff_tail_bound("binomial", 5.0, 0.0, "upper") == 1.0
    assert chernoff_tail_bound("binomial", 100, 10, "lower") == pytest.approx(math.exp(-0.5), rel=1e-15)
    assert chernoff_tail_bound("binomial", 100, 10, "lower") == pytest.approx(0.60653, abs=5e-6)
    upper = chernoff_tail_bound("binomial", 100, 10, "upper")
    assert upper == pytest.approx(math.exp(-300 / 620), rel=1e-15)
    assert upper == pytest.approx(0.616393, abs=5e-7)
    assert chernoff_tail_bound("poisson", 100, 10, "upper") == upper
    assert "o(n^-i)" in POISSON_CAVEAT
    with pytest.raises(ValueError):
        chernoff_tail_bound("binomial", 100, -1, "upper")
    with pytest.raises(ValueError):
        chernoff_tail_bound("binomial", 100, 1, "middle")


def test_chernoff_dominates_exact_tails():
    for trials in (50, 1000, 100_000):
        for mean in np.geomspace(0.5, min(500, trials / 2), 15):
            prob = mean / trials
            for t in np.linspace(0, 4 * math.sqrt(mean) + 4, 15):
                lo = exact_binomial_lower_tail(trials, prob, mean - t)
                hi = exact_binomial_upper_tail(trials, prob, mean + t)
                assert lo <= chernoff_tail_bound("binomial", mean, t, "lower") + 1e-12
                assert hi <= chernoff_tail_bound("binomial", mean, t, "upper") + 1e-12


def test_tail_threshold_small_mean_example():
    n = 10**4
    a = tail_threshold_a(0.01, 3, 0.1, n)
    assert a == pytest.approx(3.1 * math.log(n) / (math.log(math.log(n)) - math.log(0.01)), rel=1e-15)
    assert a == pytest.approx(4.183, abs=5e-4)
    assert tail_threshold_regime(0.01, n) == "small-mean"


def test_tail_threshold_branches():
    n = 10**4
    lam = 10 * math.log(n)
    assert tail_threshold_a(lam, 3, 0.1, n) == pytest.approx(1.1 * lam)
    mid = math.log(n)
    assert tail_threshold_a(mid, 3, 0.1, n) == pytest.approx(math.log(math.log(n)) * mid)
    with pytest.raises(ValueError):
        tail_threshold_a(0.0, 3, 0.1, n)
    with pytest.raises(ValueError):
        tail_threshold_a(1.0, 3, 0.0, n)


@pytest.mark.xfail(strict=True, reason="finite-n tail guarantee does not hold at this grid point; see decisions log")
def test_tail_threshold_finite_n_guarantee():
    n, t = 10**4, 3
    a = tail_threshold_a(10.0, t, 0.1, n)
    assert exact_binomial_upper_tail(10**6, 1e-5, a) <= n**-t


# -- confidence intervals ----------------------------------------------------------

def test_wilson_examples():
    assert wilson_ci(0, 100)[0] == 0.0
    assert wilson_ci(100, 100)[1] == 1.0
    lo, hi = wilson_ci(50, 100)
    assert lo == pytest.approx(0.404, abs=5e-4) and hi == pytest.approx(0.596, abs=5e-4)
    with pytest.raises(ValueError):
        wilson_ci(0, 0)
    with pytest.raises(ValueError):
        wilson_ci(5, 4)


def test_wilson_contains_proportion_and_covers():
    for k in range(0, 201, 7):
        lo, hi = wilson_ci(k, 200, 0.99)
        assert lo <= k / 200 <= hi
    # coverage of the 95% interval at p = 0.3, n = 200 by exact binomial summation
    ks = np.arange(201)
    cover = [wilson_ci(int(k), 200)[0] <= 0.3 <= wilson_ci(int(k), 200)[1] for k in ks]
    assert stats.binom.pmf(ks, 200, 0.3)[cover].sum() > 0.93


# -- goodness of fit -----------------------------------------------------------------

def test_poisson_gof_self_test():
    gen = np.random.default_rng(55)
    ps = [poisson_gof(np.bincount(gen.poisson(0.5, 100_000)), 0.5) for _ in range(21)]
    assert np.median(ps) > 0.05


def test_poisson_gof_power():
    gen = np.random.default_rng(56)
    assert poisson_gof(np.bincount(gen.poisson(1.0, 100_000)), 0.5) < 1e-6


def test_poisson_gof_gross_misfit_and_guard():
    assert poisson_gof([1000], 5.0) < 1e-12
    with pytest.raises(ValueError):
        poisson_gof([10, 5], 1.0)


def test_binomial_and_exact_gof():
    gen = np.random.default_rng(57)
    assert binomial_gof(gen.binomial(20, 0.3, 50_000), 20, 0.3) > 0.001
    assert binomial_gof(gen.binomial(20, 0.35, 50_000), 20, 0.3) < 1e-6
    law = {"a": 0.2, "b": 0.5, "c": 0.3}
    draws = gen.choice(list(law), size=20_000, p=list(law.values()))
    assert exact_pmf_gof(draws.tolist(), law) > 0.001
    assert exact_pmf_gof(["a", "z"] * 100, law) == 0.0


# -- dominance -------------------------------------------------------------------------

def test_dominance_identical_samples():
    x = np.random.default_rng(58).binomial(10, 0.3, 1000)
    assert dominance_check(x, x).ok


def test_dominance_true_and_reversed():
    gen = np.random.default_rng(59)
    lo, hi = gen.binomial(10, 0.2, 10_000), gen.binomial(10, 0.5, 10_000)
    assert dominance_check(lo, hi).ok
    rev = dominance_check(hi, lo)
    assert not rev.ok and rev.violations


def test_dominance_statistic_and_errors():
    gs = [LabeledGraph.empty(4), LabeledGraph.complete(4)]
    rep = dominance_check(gs[:1] * 50, gs[1:] * 50, statistic=lambda g: g.num_edges)
    assert rep.ok and rep.thresholds == [6.0]
    with pytest.raises(ValueError):
        dominance_check([], [1])
