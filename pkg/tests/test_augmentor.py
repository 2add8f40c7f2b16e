from collections import deque

import numpy as np
import pytest
from scipy.special import expit

import engine.tensor as T
from engine.gradcheck import gradient_check
from engine.tensor import Parameter
from graph.interactions import InteractionGraph
from models.augmentor import (EdgeAugmentor, EdgeProbabilities, candidate_edges, keep_probability,
                              sample_two_hop_pairs)
from utils.errors import ConfigurationError, ContractViolation
from utils.helpers import rng_stream


def _bipartite_distance(g, user, item):
    """Kullanıcıdan ürüne BFS mesafesi (düğümler: u, I+v)"""
    n_users = g.n_users
    item_users = [[] for _ in range(g.n_items)]
    for u, v in g.edge_set():
        item_users[v].append(u)
    target = n_users + item
    seen = {user: 0}
    queue = deque([user])
    while queue:
        node = queue.popleft()
        if node == target:
            return seen[node]
        neighbours = (n_users + g.items_of(node)).tolist() if node < n_users else item_users[node - n_users]
        for nxt in neighbours:
            if nxt not in seen:
                seen[nxt] = seen[node] + 1
                queue.append(nxt)
    return None


def _complete_graph(n_users, n_items):
    users, items = np.divmod(np.arange(n_users * n_items), n_items)
    return InteractionGraph(n_users, n_items, users, items)


# ================== ADAYLAR ==================
def test_observed_policy_returns_edges(random_graph):
    cands = candidate_edges(random_graph, "observed")
    assert cands.size == random_graph.n_edges
    assert np.array_equal(cands.users, random_graph.users)


def test_two_hop_policy_budget_and_reachability(random_graph):
    cands = candidate_edges(random_graph, "two_hop", budget=0.1, seed=3)
    assert cands.size == 110
    extras = cands.extras
    assert len(extras) == 10
    for u, v in extras:
        assert not random_graph.has_edge(u, v)
        assert _bipartite_distance(random_graph, int(u), int(v)) == 3


def test_two_hop_sampling_exhausts_small_pool(tiny_graph):
    pairs = sample_two_hop_pairs(tiny_graph, 10, seed=0)
    assert {tuple(p) for p in pairs.tolist()} == {(0, 2), (1, 0), (1, 3), (2, 1)}
    assert len(pairs) == 4


def test_two_hop_sampling_unique_and_seeded(random_graph):
    a = sample_two_hop_pairs(random_graph, 30, seed=rng_stream(9, "candidates"))
    b = sample_two_hop_pairs(random_graph, 30, seed=rng_stream(9, "candidates"))
    assert np.array_equal(a, b)
    assert len({tuple(p) for p in a.tolist()}) == len(a) == 30
    assert sample_two_hop_pairs(random_graph, 0).shape == (0, 2)


def test_candidate_budget_range(random_graph):
    with pytest.raises(ConfigurationError):
        candidate_edges(random_graph, "two_hop", budget=1.5)


# ================== KENAR OLASILIĞI ==================
def test_full_keep_mask_leaves_embeddings_unchanged(tiny_graph, rng):
    aug = EdgeAugmentor(dim=3, mask_keep=1.0, seed=0)
    cands = candidate_edges(tiny_graph)
    hbar = rng.normal(size=(7, 3))
    probs = aug.edge_probability(hbar, cands, seed=5).values

    pairs = np.concatenate([hbar[cands.users], hbar[3 + cands.items]], axis=1)
    hidden = pairs @ aug.w_hidden.value + aug.b_hidden.value
    hidden = np.where(hidden > 0, hidden, 0.5 * hidden)
    expected = expit(hidden @ aug.w_out.value + aug.b_out.value).reshape(-1)
    assert np.allclose(probs, expected, atol=1e-12)


def test_zero_keep_mask_gives_pure_noise(rng):
    aug = EdgeAugmentor(dim=3, mask_keep=0.0, seed=0)
    hbar = rng.normal(size=(5, 3))
    perturbed = aug.perturb(T.constant(hbar), seed=8).data
    draws = rng_stream(8, "masks")
    draws.random((5, 3))
    assert np.array_equal(perturbed, draws.standard_normal((5, 3)))


def test_probabilities_strictly_inside_unit_interval():
    g = _complete_graph(40, 25)
    aug = EdgeAugmentor(dim=4, seed=1)
    probs = aug.edge_probability(np.random.default_rng(2).normal(size=(65, 4)), candidate_edges(g), seed=0)
    assert probs.values.size == 1000
    assert np.all((probs.values > 0) & (probs.values < 1))


# ================== ÖRNEKLEME ==================
def test_half_noise_returns_probability(tiny_graph):
    aug = EdgeAugmentor(dim=2, tau1=1.0, xi=0.2)
    cands = candidate_edges(tiny_graph)
    p = np.linspace(0.1, 0.9, cands.size)
    view = aug.sample_view(p, cands, seed=0, noise=np.full(cands.size, 0.5))
    assert np.allclose(view.soft.data.reshape(-1), p, atol=1e-12, rtol=0)


def test_saturated_probability_always_kept(tiny_graph):
    aug = EdgeAugmentor(dim=2, tau1=0.5, xi=0.8)
    cands = candidate_edges(tiny_graph)
    logits = T.constant(np.full((cands.size, 1), 40.0))
    for seed in range(5):
        view = aug.sample_view(EdgeProbabilities(logits, T.sigmoid(logits)), cands, seed)
        assert view.kept.all()


def test_probability_outside_range_rejected(tiny_graph):
    aug = EdgeAugmentor(dim=2)
    cands = candidate_edges(tiny_graph)
    with pytest.raises(ContractViolation):
        aug.sample_view(np.ones(cands.size), cands, seed=0)


@pytest.mark.parametrize("p,tau1,xi", [(0.7, 0.5, 0.4), (0.3, 1.0, 0.2), (0.5, 2.0, 0.6)])
def test_empirical_keep_rate_matches_logistic_tail(p, tau1, xi):
    g = _complete_graph(400, 250)
    cands = candidate_edges(g)
    aug = EdgeAugmentor(dim=2, tau1=tau1, xi=xi)
    view = aug.sample_view(np.full(cands.size, p), cands, seed=17)
    n = cands.size
    expected = keep_probability(p, tau1, xi)
    stderr = np.sqrt(expected * (1 - expected) / n)
    assert abs(view.kept.mean() - expected) < 3 * stderr


def test_keep_probability_without_threshold():
    assert keep_probability(0.3, 1.0, 0.0) == 1.0


def test_monotone_in_probability_and_threshold_consistent(tiny_graph):
    aug = EdgeAugmentor(dim=2, tau1=0.7, xi=0.5)
    cands = candidate_edges(tiny_graph)
    noise = np.full(cands.size, 0.37)
    p = np.linspace(0.05, 0.95, cands.size)
    view = aug.sample_view(p, cands, seed=0, noise=noise)
    soft = view.soft.data.reshape(-1)
    assert np.all(np.diff(soft) > 0)
    assert np.array_equal(view.kept, soft > 0.5)
    assert np.all(view.thresholded[~view.kept] == 0)
    assert np.array_equal(view.thresholded[view.kept], soft[view.kept])


def test_same_seed_same_view(block_graph):
    aug = EdgeAugmentor(dim=4, seed=2)
    cands = candidate_edges(block_graph)
    hbar = np.random.default_rng(0).normal(size=(60, 4))
    a = aug.sample_view(aug.edge_probability(hbar, cands, seed=1), cands, seed=9)
    b = aug.sample_view(aug.edge_probability(hbar, cands, seed=1), cands, seed=9)
    assert np.array_equal(a.soft.data, b.soft.data)
    assert np.array_equal(a.kept, b.kept)


# ================== GÖRÜNÜM YAYILIMI ==================
def test_view_propagation_matches_dense(tiny_graph, rng):
    aug = EdgeAugmentor(dim=2, xi=0.3)
    cands = candidate_edges(tiny_graph)
    view = aug.sample_view(np.linspace(0.2, 0.8, cands.size), cands, seed=4)
    h = rng.normal(size=(7, 2))
    assert np.allclose(view.propagate(h).data, view.dense() @ h, atol=1e-12)
    assert set(map(tuple, view.kept_edges().tolist())) <= tiny_graph.edge_set()


def test_soft_sampling_gradcheck_with_frozen_noise(tiny_graph, rng):
    aug = EdgeAugmentor(dim=2, tau1=0.8, xi=0.0, seed=6)
    cands = candidate_edges(tiny_graph)
    hbar = Parameter(rng.uniform(-1, 1, size=(7, 2)), "hbar")

    def build():
        probs = aug.edge_probability(hbar.leaf(), cands, seed=3)
        view = aug.sample_view(probs, cands, seed=5)
        return T.add(T.mean(view.soft), T.sum(T.sigmoid(view.propagate(hbar.leaf()))))

    result = gradient_check(build, aug.parameters() + [hbar])
    assert result.ok, result
