import numpy as np

from graph.adjacency import normalize_adjacency
from graph.interactions import InteractionGraph


def test_single_edge_hand_computation():
    adj = normalize_adjacency(InteractionGraph(1, 1, [0], [0]))
    assert np.allclose(adj.dense(), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)
    assert np.array_equal(adj.degrees, [2.0, 2.0])


def test_no_edges_gives_identity():
    adj = normalize_adjacency(InteractionGraph(2, 3, [], []))
    assert np.array_equal(adj.dense(), np.eye(5))


def test_symmetric_and_entries_in_unit_interval(random_graph):
    dense = normalize_adjacency(random_graph).dense()
    assert np.max(np.abs(dense - dense.T)) <= 1e-15
    nonzero = dense[dense != 0]
    assert np.all((nonzero > 0) & (nonzero <= 1))


def test_degree_weighted_row_sums():
    rng = np.random.default_rng(0)
    for _ in range(5):
        codes = rng.choice(9, size=5, replace=False)
        g = InteractionGraph(3, 3, codes // 3, codes % 3)
        adj = normalize_adjacency(g)
        root = np.sqrt(adj.degrees)
        assert np.allclose(adj.dense() @ root, root, atol=1e-12)


def test_entry_formula(tiny_graph):
    adj = normalize_adjacency(tiny_graph)
    d = adj.degrees
    dense = adj.dense()
    for u, v in tiny_graph.edge_set():
        assert np.isclose(dense[u, 3 + v], 1.0 / np.sqrt(d[u] * d[3 + v]), atol=1e-15)
    assert np.allclose(np.diag(dense), 1.0 / d, atol=1e-15)
