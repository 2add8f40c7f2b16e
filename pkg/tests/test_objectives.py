import numpy as np
import pytest

import engine.tensor as T
from engine.gradcheck import gradient_check
from engine.tensor import Parameter
from training.objectives import bpr, contrastive_loss, infonce, joint_loss, score_triplets
from training.sampling import TripletBatch
from utils.errors import ConfigurationError, ContractViolation, NumericError


def _infonce_loop(h1, h2, nodes, tau):
    a = h1[nodes] / np.linalg.norm(h1[nodes], axis=1, keepdims=True)
    b = h2[nodes] / np.linalg.norm(h2[nodes], axis=1, keepdims=True)
    total = 0.0
    for i in range(len(nodes)):
        numerator = np.exp(a[i] @ b[i] / tau)
        denominator = sum(np.exp(a[i] @ b[j] / tau) for j in range(len(nodes)))
        total += -np.log(numerator / denominator)
    return total


# ================== INFONCE ==================
def test_infonce_identical_rows_is_n_log_n():
    h = np.tile([[0.5, -1.0, 2.0]], (6, 1))
    value = infonce(h, h, np.arange(6), tau=0.3).item()
    assert value == pytest.approx(6 * np.log(6), abs=1e-12)


def test_infonce_single_node_is_zero(rng):
    h1, h2 = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    assert infonce(h1, h2, [2], tau=0.5).item() == pytest.approx(0.0, abs=1e-12)


def test_infonce_empty_nodes_is_zero(rng):
    h = rng.normal(size=(3, 2))
    assert infonce(h, h, [], tau=0.5).item() == 0.0


def test_infonce_matches_loop(rng):
    h1, h2 = rng.normal(size=(9, 4)), rng.normal(size=(9, 4))
    nodes = np.array([0, 2, 3, 7, 8])
    assert infonce(h1, h2, nodes, tau=0.2).item() == pytest.approx(_infonce_loop(h1, h2, nodes, 0.2), abs=1e-10)


def test_infonce_scale_invariant(rng):
    h1, h2 = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    nodes = np.arange(5)
    assert infonce(3.0 * h1, h2, nodes, 0.4).item() == pytest.approx(infonce(h1, h2, nodes, 0.4).item(), abs=1e-12)


def test_infonce_zero_norm_row():
    h = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(NumericError):
        infonce(h, h, [0, 1], tau=0.5)


def test_infonce_bad_tau(rng):
    h = rng.normal(size=(2, 2))
    with pytest.raises(ContractViolation):
        infonce(h, h, [0, 1], tau=0.0)


def test_contrastive_sums_user_and_item_terms(rng):
    h1, h2 = rng.normal(size=(8, 3)), rng.normal(size=(8, 3))
    users, items = np.array([0, 1, 2]), np.array([4, 6])
    expected = _infonce_loop(h1, h2, users, 0.5) + _infonce_loop(h1, h2, items, 0.5)
    assert contrastive_loss(h1, h2, users, items, 0.5).item() == pytest.approx(expected, abs=1e-10)


def test_infonce_mean_reduction_divides_by_node_count(rng):
    h = np.tile([[1.0, 2.0]], (4, 1))
    assert infonce(h, h, np.arange(4), tau=0.7, reduction="mean").item() == pytest.approx(np.log(4), abs=1e-12)
    h1, h2 = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
    nodes = np.array([1, 2, 5])
    expected = _infonce_loop(h1, h2, nodes, 0.9) / 3
    assert infonce(h1, h2, nodes, 0.9, reduction="mean").item() == pytest.approx(expected, abs=1e-12)


def test_infonce_identical_views_swap_symmetric(rng):
    h = rng.normal(size=(7, 3))
    nodes = np.array([0, 1, 4, 6])
    assert infonce(h, h.copy(), nodes, 0.5).item() == pytest.approx(infonce(h.copy(), h, nodes, 0.5).item(), abs=1e-12)
    users, items = np.array([0, 1]), np.array([4, 6])
    forward = contrastive_loss(h, h.copy(), users, items, 0.3, "mean").item()
    assert contrastive_loss(h.copy(), h, users, items, 0.3, "mean").item() == pytest.approx(forward, abs=1e-12)


def test_infonce_swapped_views_use_column_softmax(rng):
    h1, h2 = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    nodes = np.arange(5)
    a = h1 / np.linalg.norm(h1, axis=1, keepdims=True)
    b = h2 / np.linalg.norm(h2, axis=1, keepdims=True)
    logits = a @ b.T / 0.4
    by_column = sum(np.log(np.exp(logits[:, j]).sum()) - logits[j, j] for j in range(5))
    assert infonce(h2, h1, nodes, 0.4).item() == pytest.approx(by_column, abs=1e-10)


def test_unknown_reduction_rejected(rng):
    h = rng.normal(size=(3, 2))
    with pytest.raises(ConfigurationError):
        infonce(h, h, [0, 1], 0.5, reduction="median")
    with pytest.raises(ConfigurationError):
        bpr(np.zeros(2), np.zeros(2), reduction="max")


def test_infonce_gradcheck(rng):
    h1 = Parameter(rng.normal(size=(5, 3)), "h1")
    h2 = Parameter(rng.normal(size=(5, 3)), "h2")
    result = gradient_check(lambda: infonce(h1.leaf(), h2.leaf(), [0, 1, 3, 4], 0.4), [h1, h2])
    assert result.ok, result


# ================== BPR ==================
def test_bpr_equal_scores_is_log2_per_triplet():
    assert bpr(np.zeros(5), np.zeros(5)).item() == pytest.approx(5 * np.log(2.0))


def test_bpr_matches_scalar_loop(rng):
    pos, neg = rng.normal(size=12), rng.normal(size=12)
    expected = sum(-np.log(1.0 / (1.0 + np.exp(-(p - n)))) for p, n in zip(pos, neg))
    assert bpr(pos, neg).item() == pytest.approx(expected, abs=1e-12)


def test_bpr_mean_is_per_triplet(rng):
    assert bpr(np.zeros(5), np.zeros(5), reduction="mean").item() == pytest.approx(np.log(2.0))
    pos, neg = rng.normal(size=7), rng.normal(size=7)
    assert bpr(pos, neg, "mean").item() == pytest.approx(bpr(pos, neg).item() / 7, abs=1e-12)


def test_bpr_empty_batch():
    with pytest.raises(ContractViolation):
        bpr(np.array([]), np.array([]))


def test_score_triplets_inner_products(rng):
    h = rng.normal(size=(7, 3))
    batch = TripletBatch(np.array([0, 2]), np.array([1, 3]), np.array([0, 2]))
    pos, neg = score_triplets(h, batch, n_users=3)
    assert np.allclose(pos.data.reshape(-1), [h[0] @ h[4], h[2] @ h[6]], atol=1e-14)
    assert np.allclose(neg.data.reshape(-1), [h[0] @ h[3], h[2] @ h[5]], atol=1e-14)


def test_bpr_gradcheck(rng):
    h = Parameter(rng.normal(size=(6, 2)), "h")
    batch = TripletBatch(np.array([0, 1, 2, 0]), np.array([0, 1, 2, 1]), np.array([1, 2, 0, 2]))
    result = gradient_check(lambda: bpr(*score_triplets(h.leaf(), batch, 3)), [h])
    assert result.ok, result


# ================== BİRLEŞİK KAYIP ==================
def test_joint_loss_is_linear_in_betas(rng):
    p = Parameter(rng.normal(size=(3, 2)), "p")
    l_bpr, l_gib, l_cl = T.constant(1.5), T.constant(0.25), T.constant(4.0)
    reg = float(np.sum(p.value ** 2))
    value = joint_loss(l_bpr, l_gib, l_cl, [p], beta1=0.2, beta2=0.1, beta3=0.01).item()
    assert value == pytest.approx(1.5 + 0.2 * 0.25 + 0.1 * 4.0 + 0.01 * reg, abs=1e-12)


def test_joint_loss_zero_betas_is_bpr(rng):
    p = Parameter(rng.normal(size=(3, 2)), "p")
    assert joint_loss(T.constant(2.0), T.constant(9.0), T.constant(7.0), [p], 0.0, 0.0, 0.0).item() == 2.0
    assert joint_loss(T.constant(2.0), None, None, [p], 0.5, 0.5, 0.0).item() == 2.0


def test_joint_loss_regularizer_gradcheck(rng):
    p = Parameter(rng.normal(size=(3, 2)), "p")
    q = Parameter(rng.normal(size=(2, 2)), "q")
    result = gradient_check(
        lambda: joint_loss(T.sum(T.sigmoid(p.leaf())), None, None, [p, q], 0.0, 0.0, 0.3), [p, q])
    assert result.ok, result
