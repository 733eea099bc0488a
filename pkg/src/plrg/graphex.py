"""Limit graph of the critical regime, sampled from its Poisson construction.

Points of a Poisson process with intensity ``alpha x**(-alpha-1) dx (x >= 1)``
times Lebesgue ``du`` are only generated where they can matter: above
``sqrt(x0)`` (the clique) and inside the follower intervals below it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import as_generator
from .dist import TailModel
from .errors import InvalidParameterError, RangeError
from .hardgraph import KVector


@dataclass(frozen=True, eq=False)
class GraphexGraph:
    t: float
    x0: float
    alpha: float
    clique_values: np.ndarray
    clique_times: np.ndarray
    follower_counts: tuple[int, ...]
    follower_times: tuple[np.ndarray, ...]
    follower_values: tuple[np.ndarray, ...]

    @property
    def k0(self) -> int:
        return int(self.clique_values.size)

    @property
    def edge_count(self) -> int:
        return to_kvector(self).edge_count

    def __eq__(self, other):
        if not isinstance(other, GraphexGraph):
            return NotImplemented
        return (
            (self.t, self.x0, self.alpha) == (other.t, other.x0, other.alpha)
            and np.array_equal(self.clique_values, other.clique_values)
            and np.array_equal(self.clique_times, other.clique_times)
            and self.follower_counts == other.follower_counts
            and all(np.array_equal(a, b) for a, b in zip(self.follower_times, other.follower_times))
            and all(np.array_equal(a, b) for a, b in zip(self.follower_values, other.follower_values))
        )


def follower_intervals(clique_values, x0: float) -> list[tuple[float, float]]:
    """``(L_j, R_j]`` for j = 1..K0, clamped below at 1."""
    th = np.asarray(clique_values, dtype=float)
    k0 = th.size
    if k0 and (np.any(np.diff(th) >= 0) or th[-1] <= math.sqrt(x0)):
        raise InvalidParameterError("clique values must be strictly decreasing and above sqrt(x0)")
    out = []
    upper = math.sqrt(x0)
    for j in range(1, k0 + 1):
        lower = x0 / th[k0 - j]
        out.append((max(1.0, lower), max(1.0, upper)))
        upper = lower
    return out


def interval_intensities(clique_values, t: float, x0: float, alpha: float) -> np.ndarray:
    """Poisson means of the follower groups."""
    lam = [t * (left ** -alpha - right ** -alpha) for left, right in follower_intervals(clique_values, x0)]
    return np.maximum(np.array(lam, dtype=float), 0.0)


def _check(t, x0, alpha):
    if not (t > 0 and x0 > 1 and alpha > 0):
        raise InvalidParameterError("need t > 0, x0 > 1, alpha > 0")


def sample_graphex(t: float, x0: float, alpha: float, seed) -> GraphexGraph:
    _check(t, x0, alpha)
    rng = as_generator(seed)
    model = TailModel(alpha)
    root = math.sqrt(x0)
    k0 = int(rng.poisson(t * x0 ** (-alpha / 2)))
    while True:
        th = np.sort(model.sample_above(root, k0, rng))[::-1]
        if np.all(np.diff(th) < 0):
            break
    times = t * (1.0 - rng.random(k0))
    counts, ftimes, fvalues = [], [], []
    for (left, right), lam in zip(follower_intervals(th, x0), interval_intensities(th, t, x0, alpha)):
        kj = int(rng.poisson(lam)) if lam > 0 else 0
        counts.append(kj)
        fvalues.append(model.sample_between(left, right, kj, rng) if kj else np.empty(0))
        ftimes.append(t * (1.0 - rng.random(kj)))
    return GraphexGraph(float(t), float(x0), float(alpha), th, times, tuple(counts), tuple(ftimes), tuple(fvalues))


def nested_subgraph(g: GraphexGraph, s: float) -> GraphexGraph:
    """The graph at horizon ``s``: points with time <= s, followers regrouped."""
    if not (0 <= s <= g.t):
        raise RangeError(f"s must lie in [0, {g.t}]")
    if s == g.t:
        return g
    keep = g.clique_times <= s
    th, times = g.clique_values[keep], g.clique_times[keep]
    vals = np.concatenate((np.empty(0),) + tuple(g.follower_values))
    ftim = np.concatenate((np.empty(0),) + tuple(g.follower_times))
    live = ftim <= s
    vals, ftim = vals[live], ftim[live]
    counts, ftimes, fvalues = [], [], []
    for left, right in follower_intervals(th, g.x0):
        # 1 is the support floor, so a clamped lower end stays exclusive
        sel = (vals > left) & (vals <= right)
        counts.append(int(sel.sum()))
        fvalues.append(vals[sel])
        ftimes.append(ftim[sel])
    return GraphexGraph(float(s), g.x0, g.alpha, th, times, tuple(counts), tuple(ftimes), tuple(fvalues))


def to_kvector(g: GraphexGraph) -> KVector:
    return KVector(g.k0, g.follower_counts)


def finite_clique_sizes(model: TailModel, n: int, a_n: float, x0: float, reps: int, seed) -> np.ndarray:
    """``K_{n,0}`` for ``reps`` samples of size ``n`` at threshold ``x0 * a_n``.

    The count of weights above ``sqrt(x0 a_n)`` is Binomial, so each
    replicate costs O(1).  With ``a_n = n**(2/alpha)`` the law tends to
    Poisson(``x0**(-alpha/2)``), the clique size of the limit graph at t = 1.
    """
    if not (x0 > 1 and a_n > 0 and n >= 1 and reps >= 1):
        raise InvalidParameterError("need x0 > 1, a_n > 0, n >= 1, reps >= 1")
    p = float(model.tail(math.sqrt(x0 * a_n)))
    return as_generator(seed).binomial(int(n), p, size=int(reps))
