import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plrg._rng import stream
from plrg.dist import TailModel, sample_iid
from plrg.errors import InvalidParameterError, SizeError
from plrg.hardgraph import (
    HardGraph, KVector, assemble_from_kvector, brute_force_graph, build_hard_graph, edge_count,
    hard_edge_count, is_threshold_graph, k_vector, nonisolated_count, parse_kvector, read_edge_list,
    write_edge_list, format_kvector,
)


def test_strict_threshold_example():
    g = build_hard_graph([10, 5, 1.2, 1.1], 12)
    assert g.edges.tolist() == [[0, 1]]
    assert g.vertices.tolist() == [0, 1]


def test_follower_example():
    s = [10, 5, 1.3, 1.1]
    g = build_hard_graph(s, 12)
    assert g.edges.tolist() == [[0, 1], [0, 2]]
    assert g.vertices.tolist() == [0, 1, 2]
    assert brute_force_graph(s, 12) == g
    assert k_vector(s, 12) == KVector(2, (0, 1))


def test_empty_and_tiny_graphs():
    assert build_hard_graph([1, 1, 1], 12).n_edges == 0
    assert brute_force_graph([5.0], 2).n_edges == 0
    assert k_vector([1, 2], 100) == KVector(0, ())


def test_brute_force_guard():
    with pytest.raises(SizeError):
        brute_force_graph(np.ones(10_001), 2)


def test_edge_count_examples():
    assert edge_count(KVector(3, (2, 0, 1))) == 10
    assert edge_count(KVector(0, ())) == 0
    assert edge_count(KVector(2, (0, 1))) == 2


def test_kvector_validation():
    with pytest.raises(InvalidParameterError):
        KVector(2, (1,))
    with pytest.raises(InvalidParameterError):
        KVector(1, (-1,))


def test_assemble_examples():
    g = assemble_from_kvector(KVector(2, (0, 1)))
    assert g.n_vertices == 3
    assert g.edges.tolist() == [[0, 1], [0, 2]]
    g = assemble_from_kvector(KVector(1, (1,)))
    assert g.edges.tolist() == [[0, 1]]


@given(st.integers(0, 6).flatmap(lambda k: st.tuples(st.just(k), st.lists(st.integers(0, 4), min_size=k, max_size=k))))
def test_assemble_counts(kv):
    k = KVector(kv[0], tuple(kv[1]))
    g = assemble_from_kvector(k)
    assert g.n_edges == edge_count(k)
    assert g.n_vertices == k.vertex_count or (k.k0 == 1 and sum(k.followers) == 0)
    assert is_threshold_graph(g)
    assert parse_kvector(format_kvector(k)) == k


@pytest.mark.parametrize("seed", range(100))
def test_fast_equals_brute_force(seed):
    rng = stream(seed, "hg")
    alpha = 0.8 + 2 * rng.random()
    s = sample_iid(TailModel(alpha), 200, rng)
    a = float(np.quantile(np.multiply.outer(s.values, s.values), 0.97))
    g = build_hard_graph(s, a)
    assert g == brute_force_graph(s, a)
    kv = k_vector(s, a)
    assert kv.edge_count == g.n_edges
    assert kv.vertex_count == g.n_vertices
    assert hard_edge_count(s, a) == g.n_edges
    assert nonisolated_count(s, a) == g.n_vertices
    assert is_threshold_graph(g)


def test_ties_are_deterministic():
    g = build_hard_graph([4, 3, 3, 1], 9)
    assert g.edges.tolist() == [[0, 1], [0, 2]]


def test_edge_list_roundtrip(tmp_path):
    g = build_hard_graph(sample_iid(TailModel(1.5), 300, 2), 40)
    p = tmp_path / "g.txt"
    write_edge_list(g, p)
    back = read_edge_list(p)
    assert back == g
    p.write_text("3 2\n0 1\n")
    with pytest.raises(InvalidParameterError):
        read_edge_list(p)
    p.write_text("3 1\n0 5\n")
    with pytest.raises(InvalidParameterError):
        read_edge_list(p)


def test_adjacency_symmetric():
    g = build_hard_graph(sample_iid(TailModel(1.5), 200, 4), 30)
    a = g.adjacency()
    assert (a != a.T).nnz == 0
    assert np.array_equal(np.asarray(a.sum(axis=1)).ravel(), g.degrees())
