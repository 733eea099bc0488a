import math

import numpy as np
import pytest

from plrg._rng import stream
from plrg.errors import InvalidParameterError, RangeError
from plrg.graphex import follower_intervals, interval_intensities, nested_subgraph, sample_graphex, to_kvector
from plrg.hardgraph import KVector, assemble_from_kvector


def test_interval_example():
    iv = follower_intervals([4.0, 3.0], 4.0)
    assert iv[0] == pytest.approx((4 / 3, 2.0))
    assert iv[1] == pytest.approx((1.0, 4 / 3))
    assert interval_intensities([4.0, 3.0], 1.0, 4.0, 1.0) == pytest.approx([0.25, 0.25])


def test_interval_below_one_is_empty():
    lam = interval_intensities([100.0, 50.0, 3.0], 1.0, 4.0, 2.0)
    iv = follower_intervals([100.0, 50.0, 3.0], 4.0)
    # x0 / 50 sits below 1, so the last interval is (1, 1]
    assert iv[2] == (1.0, 1.0)
    assert lam[2] == 0
    assert iv[1] == pytest.approx((1.0, 4 / 3))


def test_interval_validation():
    with pytest.raises(InvalidParameterError):
        follower_intervals([3.0, 4.0], 4.0)
    with pytest.raises(InvalidParameterError):
        follower_intervals([1.5], 4.0)
    with pytest.raises(InvalidParameterError):
        sample_graphex(1.0, 1.0, 2.0, 0)


def test_telescoping_intensity():
    for seed in range(50):
        g = sample_graphex(3.0, 4.0, 1.5, seed)
        if g.k0 == 0:
            continue
        lam = interval_intensities(g.clique_values, g.t, g.x0, g.alpha).sum()
        expect = g.t * (max(1.0, g.x0 / g.clique_values[0]) ** -g.alpha - g.x0 ** (-g.alpha / 2))
        assert lam == pytest.approx(expect, rel=1e-12)


def test_poisson_clique_size():
    reps = 100_000
    k = np.array([sample_graphex(2.0, 4.0, 2.0, stream(9, "gx", i)).k0 for i in range(reps)])
    lam = 0.5
    assert abs(k.mean() - lam) < 3 * math.sqrt(lam / reps)
    for j in range(6):
        p = math.exp(-lam) * lam**j / math.factorial(j)
        assert abs(np.mean(k == j) - p) < 3 * math.sqrt(p * (1 - p) / reps) + 1e-9


def test_large_threshold_gives_empty_graph():
    empty = sum(sample_graphex(1.0, 1e8, 2.0, s).k0 == 0 for s in range(200))
    assert empty >= 195


def test_structure_and_kvector():
    g = sample_graphex(20.0, 4.0, 1.5, 3)
    assert len(g.clique_times) == g.k0 == len(g.follower_counts)
    assert np.all(np.diff(g.clique_values) < 0)
    kv = to_kvector(g)
    assert kv.edge_count == assemble_from_kvector(kv).n_edges
    for vals, (lo, hi) in zip(g.follower_values, follower_intervals(g.clique_values, g.x0)):
        assert np.all((vals > lo) & (vals <= hi))


def test_nested_subgraph_monotone():
    for seed in range(1000):
        g = sample_graphex(5.0, 4.0, 2.0, seed)
        assert nested_subgraph(g, 0.0).edge_count == 0
        assert nested_subgraph(g, 5.0) == g
        e = [nested_subgraph(g, s).edge_count for s in (1.0, 2.5, 4.0, 5.0)]
        assert e == sorted(e)
    with pytest.raises(RangeError):
        nested_subgraph(g, 6.0)


def test_nested_subgraph_has_right_law():
    # the s-horizon subgraph of a t-graph is a graph at time s
    reps = 20000
    k = np.array([nested_subgraph(sample_graphex(4.0, 4.0, 2.0, stream(5, i)), 2.0).k0 for i in range(reps)])
    assert abs(k.mean() - 0.5) < 3 * math.sqrt(0.5 / reps)


def test_empty_kvector():
    g = sample_graphex(1.0, 1e12, 2.0, 0)
    assert to_kvector(g) == KVector(0, ())
