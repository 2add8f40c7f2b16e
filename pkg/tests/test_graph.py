import io
from fractions import Fraction

import numpy as np
import pytest

from graph.interactions import InteractionGraph, density, ingest, load_graph, read_serialized, split
from graph.synthetic import make_block_dataset
from utils.errors import ContractViolation, EmptyDatasetError, InputError, ParseError
from utils.helpers import fmt_sci


def test_ingest_reindexes_in_first_seen_order():
    g = ingest("a x\na y\nb x\n")
    assert (g.n_users, g.n_items, g.n_edges) == (2, 2, 3)
    assert g.user_labels == ["a", "b"]
    assert g.item_labels == ["x", "y"]
    assert g.edge_set() == {(0, 0), (0, 1), (1, 0)}
    assert g.user_index == {"a": 0, "b": 1}


def test_ingest_collapses_duplicates_and_ignores_weights():
    g = ingest("# yorum\nu1\ti1\t5\n\nu1 i1 3.5\n")
    assert g.n_edges == 1
    assert g.csr.nnz == g.n_edges


def test_ingest_malformed_line_reports_line_number():
    with pytest.raises(ParseError) as info:
        ingest("a x\nonlyone\n")
    assert info.value.line_number == 2
    with pytest.raises(ParseError):
        ingest("a x notanumber\n")
    with pytest.raises(ParseError):
        ingest("a x 1 extra\n")


def test_ingest_empty_stream():
    with pytest.raises(EmptyDatasetError):
        ingest("# sadece yorum\n\n")


def test_load_graph_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_graph(str(tmp_path / "yok.txt"))


def test_load_graph_from_file(tmp_path):
    path = tmp_path / "data.txt"
    path.write_text("a x\nb y\n", encoding="utf-8")
    assert load_graph(str(path)).n_edges == 2


def test_graph_rejects_duplicates_and_out_of_range():
    with pytest.raises(ContractViolation):
        InteractionGraph(2, 2, [0, 0], [1, 1])
    with pytest.raises(ContractViolation):
        InteractionGraph(2, 2, [0, 2], [0, 0])


@pytest.mark.parametrize("counts,printed", [
    ((50821, 57440, 1172425), "4.0e-4"),
    ((49611, 20994, 169909), "1.6e-4"),
    ((56027, 29525, 256036), "1.5e-4"),
])
def test_density_reproduces_published_table(counts, printed):
    assert fmt_sci(density(*counts)) == printed
    exact = Fraction(counts[2], counts[0] * counts[1])
    assert density(*counts) == pytest.approx(float(exact), rel=1e-15)


def test_toy_density():
    assert ingest("a x\na y\nb x\n").stats().density == 0.75


def test_serialized_round_trip(random_graph):
    text = random_graph.to_text()
    assert text.splitlines()[0] == "20 15 100"
    assert read_serialized(text) == random_graph
    assert read_serialized(io.StringIO(text)) == random_graph


def test_serialized_header_mismatch():
    with pytest.raises(ParseError):
        read_serialized("2 2 3\n0 0\n1 1\n")


def test_split_user_with_ten_edges():
    g = InteractionGraph(1, 12, [0] * 10, list(range(10)))
    train, test = split(g, 0.2, seed=4)
    assert len(test[0]) == 2
    assert train.n_edges == 8


def test_split_keeps_single_interaction_users_in_train():
    g = InteractionGraph(2, 3, [0, 1, 1], [0, 1, 2])
    train, test = split(g, 0.5, seed=0)
    assert 0 not in test
    assert train.has_edge(0, 0)


def test_split_is_partition(random_graph):
    train, test = split(random_graph, 0.2, seed=9)
    held = {(u, int(v)) for u, items in test.items() for v in items}
    assert train.edge_set().isdisjoint(held)
    assert train.edge_set() | held == random_graph.edge_set()
    for u in range(random_graph.n_users):
        if random_graph.user_degrees()[u] > 0:
            assert train.user_degrees()[u] >= 1


def test_split_deterministic(random_graph):
    a_train, a_test = split(random_graph, 0.2, seed=5)
    b_train, b_test = split(random_graph, 0.2, seed=5)
    assert a_train == b_train
    assert a_test.keys() == b_test.keys()
    assert all(np.array_equal(a_test[u], b_test[u]) for u in a_test)


def test_split_fraction_range(random_graph):
    with pytest.raises(ContractViolation):
        split(random_graph, 1.0, seed=0)


def test_block_dataset_shape():
    g = make_block_dataset(40, 30, n_blocks=4, p_in=0.3, noise=0.1, seed=2)
    assert g.n_users == 40 and g.n_items == 30
    assert g.user_degrees().min() >= 1
