import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rigequiv.graph_core import (
    FeatureAssignment,
    GraphError,
    KUniformHypergraph,
    LabeledGraph,
    PartiteHypergraph,
    is_subgraph,
    merge_partite,
    merge_partite_graph,
    pair_list,
    project_to_graph,
    union_graphs,
)


def edge_set(*pairs):
    return frozenset(tuple(sorted(p)) for p in pairs)


@st.composite
def graphs(draw, n=None, max_n=8):
    n = n or draw(st.integers(2, max_n))
    pairs = pair_list(n)
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    return LabeledGraph(n, chosen)


# -- LabeledGraph invariants ----------------------------------------------

def test_rejects_self_loops_and_out_of_range():
    with pytest.raises(GraphError):
        LabeledGraph(3, [(1, 1)])
    with pytest.raises(GraphError):
        LabeledGraph(3, [(0, 3)])


def test_duplicate_edges_collapse():
    g = LabeledGraph(4, [(0, 1), (1, 0), (0, 1)])
    assert g.num_edges == 1
    assert g.edges == edge_set((0, 1))


@given(graphs(max_n=11))
def test_bits_roundtrip(g):
    assert LabeledGraph.from_bits(g.n, g.to_bits()) == g


@given(graphs(max_n=12))
def test_text_roundtrip(g):
    text = g.to_text()
    assert text.startswith(f"n={g.n}\n")
    assert LabeledGraph.from_text(text) == g


def test_bits_refuse_large_n():
    with pytest.raises(GraphError):
        LabeledGraph.empty(12).to_bits()


def test_degrees_and_adjacency():
    g = LabeledGraph(4, [(0, 1), (1, 2), (1, 3)])
    assert g.degrees().tolist() == [1, 3, 1, 1]
    assert g.adjacency()[1] == {0, 2, 3}
    assert g.has_edge(2, 1) and not g.has_edge(0, 2)


# -- projection ------------------------------------------------------------

def test_project_single_triple():
    h = KUniformHypergraph(5, 3, [(0, 1, 2)])
    assert project_to_graph(h).edges == edge_set((0, 1), (0, 2), (1, 2))


def test_project_empty_hypergraph():
    g = project_to_graph(KUniformHypergraph(5, 3, []))
    assert g.n == 5 and g.num_edges == 0


def test_project_feature_assignment():
    f = FeatureAssignment(4, [{0, 1, 2}, {2, 3}])
    assert project_to_graph(f).edges == edge_set((0, 1), (0, 2), (1, 2), (2, 3))


def test_partite_projection_uses_disjoint_union():
    h = PartiteHypergraph(3, 2, [(0, 1, 0)])
    g = project_to_graph(h)
    assert g.n == 6
    assert g.edges == edge_set((0, 3), (0, 4), (3, 4))


def test_hypergraph_validation():
    with pytest.raises(GraphError):
        KUniformHypergraph(4, 3, [(0, 0, 1)])
    with pytest.raises(GraphError):
        KUniformHypergraph(4, 3, [(0, 1, 4)])
    with pytest.raises(GraphError):
        PartiteHypergraph(2, 3, [(0, 3)])


@st.composite
def hypergraphs(draw):
    n = draw(st.integers(3, 8))
    k = draw(st.integers(2, min(4, n)))
    subsets = list(itertools.combinations(range(n), k))
    edges = draw(st.lists(st.sampled_from(subsets), unique=True, max_size=8))
    return KUniformHypergraph(n, k, edges)


@given(hypergraphs())
def test_projection_edge_bound(h):
    g = project_to_graph(h)
    bound = len(h.edges) * math.comb(h.k, 2)
    assert g.num_edges <= bound
    cliques = [set(itertools.combinations(e, 2)) for e in h.edges]
    disjoint = all(not (a & b) for a, b in itertools.combinations(cliques, 2))
    assert (g.num_edges == bound) == disjoint


@given(st.integers(2, 7), st.data())
def test_decomposition_identity(n, data):
    sets = data.draw(st.lists(st.sets(st.integers(0, n - 1)), max_size=12))
    f = FeatureAssignment(n, sets)
    parts = [project_to_graph(f.restrict(k)) for k in range(0, n + 1)]
    assert union_graphs(parts) == project_to_graph(f)


# -- merge -----------------------------------------------------------------

def test_merge_examples():
    h = PartiteHypergraph(3, 4, [(0, 1, 2)])
    assert merge_partite(h) == KUniformHypergraph(4, 3, [(0, 1, 2)])
    assert len(merge_partite(PartiteHypergraph(3, 4, [(0, 0, 1)]))) == 0
    dup = PartiteHypergraph(3, 4, [(0, 1, 2), (2, 1, 0)])
    assert merge_partite(dup) == KUniformHypergraph(4, 3, [(0, 1, 2)])


@settings(max_examples=200)
@given(st.integers(2, 4), st.integers(2, 6), st.data())
def test_merge_commutes_with_projection(k, size, data):
    coords = st.tuples(*[st.integers(0, size - 1)] * k)
    h = PartiteHypergraph(k, size, data.draw(st.lists(coords, max_size=6)))
    via_hyper = project_to_graph(merge_partite(h))
    via_graph = merge_partite_graph(project_to_graph(h), k, size)
    # a collapsed edge still contributes its surviving pairs at graph level
    assert is_subgraph(via_hyper, via_graph)
    if all(len(set(e)) == k for e in h.edges):
        assert via_hyper == via_graph


# -- union and order -------------------------------------------------------

def test_union_examples():
    g = LabeledGraph(3, [(0, 1), (1, 2)])
    assert union_graphs([g, LabeledGraph.empty(3)]) == g
    assert union_graphs([LabeledGraph(3, [(0, 1)]), LabeledGraph(3, [(1, 2)])]) == g
    assert union_graphs([g, g]) == g
    with pytest.raises(GraphError):
        union_graphs([g, LabeledGraph.empty(4)])


@given(graphs(n=5), graphs(n=5), graphs(n=5))
def test_union_laws(a, b, c):
    assert union_graphs([a, b]) == union_graphs([b, a])
    assert union_graphs([union_graphs([a, b]), c]) == union_graphs([a, union_graphs([b, c])])
    assert union_graphs([a, a]) == a


def test_subgraph_examples():
    g = LabeledGraph(4, [(0, 1), (1, 2)])
    assert is_subgraph(LabeledGraph.empty(4), g)
    assert is_subgraph(g, g)
    assert not is_subgraph(LabeledGraph(4, [(0, 1), (2, 3)]), g)
    with pytest.raises(GraphError):
        is_subgraph(g, LabeledGraph.empty(5))


def test_subgraph_is_partial_order_exhaustive_n4():
    gs = [LabeledGraph.from_bits(4, b) for b in range(64)]
    le = np.array([[is_subgraph(a, b) for b in gs] for a in gs])
    bits = np.arange(64)
    assert (le == ((bits[:, None] & ~bits[None, :]) == 0)).all()
    assert le.diagonal().all()
    assert not (le & le.T & ~np.eye(64, dtype=bool)).any()
    # transitivity: le @ le reaches nothing outside le
    assert not (((le.astype(int) @ le.astype(int)) > 0) & ~le).any()
