"""Random graphs where pair ``{i, j}`` is an edge with probability
``min(1, X_i X_j / a_n)`` given the weights.

Pairs with ``X_i X_j >= a_n`` are always connected (hard edges); the rest
are independent coin flips.  Row ``i`` of the upper triangle draws its coins
from its own stream keyed by ``(seed, i)``, so a graph does not depend on
how rows are scheduled.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._rng import replicate_blocks, stream
from .dist import TailModel, WeightedSample, scaling_a_n
from .errors import InvalidParameterError, RegionError, SizeError
from .hardgraph import HardGraph, _as_values
from .stats import EstimateReport, MIN_REPS, _report

FULL_BUILD_MAX_N = 4000
MIN_EVENTS = 100


def edge_probability(xi, xj, a_n: float):
    return np.minimum(1.0, np.multiply(xi, xj) / a_n)


@dataclass(frozen=True, eq=False)
class BernoulliGraph:
    sample: WeightedSample
    a_n: float
    edges: np.ndarray
    seed: int

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def as_graph(self) -> HardGraph:
        return HardGraph.from_edges(self.edges, self.sample.n, self.sample.values)

    def __eq__(self, other):
        return (
            isinstance(other, BernoulliGraph)
            and self.a_n == other.a_n
            and self.sample == other.sample
            and np.array_equal(self.edges, other.edges)
        )


def _row_edges(x: np.ndarray, i: int, a_n: float, seed: int) -> np.ndarray:
    p = edge_probability(x[i], x[i + 1 :], a_n)
    hit = stream(seed, "bernoulli_row", i).random(p.size) < p
    return i + 1 + np.flatnonzero(hit)


def build_bernoulli_graph(sample, a_n: float, seed: int) -> BernoulliGraph:
    x = _as_values(sample)
    n = x.size
    if n > FULL_BUILD_MAX_N:
        raise SizeError(f"full Bernoulli build limited to n <= {FULL_BUILD_MAX_N}, got {n}")
    if not a_n > 0:
        raise InvalidParameterError("a_n must be positive")
    parts = []
    for i in range(n - 1):
        js = _row_edges(x, i, a_n, seed)
        if js.size:
            parts.append(np.column_stack([np.full(js.size, i), js]))
    e = np.concatenate(parts).astype(np.int64) if parts else np.empty((0, 2), dtype=np.int64)
    return BernoulliGraph(WeightedSample(x), float(a_n), e, int(seed))


def _check_super(gamma: float):
    if gamma <= 2:
        raise RegionError("Bernoulli-edge experiments target gamma > 2")


def _few_reps(reps, name):
    if reps < MIN_REPS:
        warnings.warn(f"{name} with reps={reps} < {MIN_REPS}", stacklevel=3)
        return ("few_reps",)
    return ()


def nonisolated_asymptote(alpha: float, gamma: float, n: int) -> float:
    """1 when gamma/alpha < 1, else (alpha/(alpha-1))^2 n / a_n."""
    if gamma / alpha < 1:
        return 1.0
    return (alpha / (alpha - 1)) ** 2 * n / scaling_a_n(alpha, gamma, n)


def nonisolated_given_no_clique_exact(alpha: float, gamma: float, n: int) -> float:
    """P(vertex 1 non-isolated | every weight <= sqrt(a_n)) by quadrature.

    Given X_1 = x the other n-1 weights connect independently with
    probability x E[Z] / a_n, Z the weight law truncated at sqrt(a_n).
    """
    a = scaling_a_n(alpha, gamma, n)
    r = math.sqrt(a)
    mass = -math.expm1(-alpha * math.log(r))
    mean_z = (alpha / (alpha - 1) * (1 - r ** (1 - alpha)) if alpha != 1 else math.log(r)) / mass

    def f(t):
        x = math.exp(t)
        dens = alpha * x ** (-alpha) / mass
        return dens * -math.expm1((n - 1) * math.log1p(-x * mean_z / a))

    val, _ = integrate.quad(f, 0.0, math.log(r), epsabs=1e-14, epsrel=1e-10, limit=200)
    return val


def mc_nonisolated_given_no_clique(alpha: float, gamma: float, n: int, reps: int, seed: int,
                                   threads: int = 1, method: str = "conditional") -> EstimateReport:
    """MC of P(vertex 1 non-isolated) with all weights drawn below sqrt(a_n).

    Each replicate draws vertex 1's row.  ``method="bernoulli"`` flips the
    coins; ``"conditional"`` averages the exact non-isolation probability
    given the row, ``1 - prod(1 - p_j)``, which has the same mean.
    """
    _check_super(gamma)
    if method not in ("conditional", "bernoulli"):
        raise InvalidParameterError(f"unknown method {method!r}")
    flags = _few_reps(reps, "mc_nonisolated_given_no_clique")
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n)
    r = math.sqrt(a)
    chunk = max(1, 2_000_000 // n)

    def block(rng, size):
        s1 = s2 = 0.0
        done = 0
        while done < size:
            m = min(chunk, size - done)
            x1 = np.asarray(model.sample_below(r, m, rng))
            z = np.asarray(model.sample_below(r, (m, n - 1), rng))
            p = x1[:, None] * z / a
            if method == "bernoulli":
                v = np.any(rng.random(p.shape) < p, axis=1).astype(float)
            else:
                v = -np.expm1(np.log1p(-p).sum(axis=1))
            s1 += float(v.sum())
            s2 += float((v * v).sum())
            done += m
        return s1, s2

    parts = replicate_blocks(block, seed, ("nonisolated", n), reps, threads, block=1000)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / reps
    var = max(s2 / reps - mean * mean, 0.0) * reps / max(reps - 1, 1)
    region = "gamma/alpha<1" if gamma / alpha < 1 else "gamma/alpha>=1"
    return _report("nonisolated_given_no_clique", n, gamma, alpha, mean, math.sqrt(var / reps),
                   nonisolated_asymptote(alpha, gamma, n), reps, method, region, flags)


def empty_graph_lower_bound(alpha: float, gamma: float, n: int, slack: float = 1.0) -> float:
    """``1 - slack (alpha/(alpha-1))^2 n^2 / a_n``."""
    return 1.0 - slack * (alpha / (alpha - 1)) ** 2 * n * n / scaling_a_n(alpha, gamma, n)


def mc_empty_graph(alpha: float, gamma: float, n: int, reps: int, seed: int, a_n: float | None = None,
                   threads: int = 1) -> EstimateReport:
    """P(no edges | every weight <= sqrt(a_n)) from full graph builds."""
    if n > FULL_BUILD_MAX_N:
        raise SizeError(f"full Bernoulli build limited to n <= {FULL_BUILD_MAX_N}, got {n}")
    flags = _few_reps(reps, "mc_empty_graph")
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n) if a_n is None else float(a_n)
    r = math.sqrt(a)

    def block(rng, size):
        empty = 0
        for _ in range(size):
            x = np.asarray(model.sample_below(r, n, rng))
            g = build_bernoulli_graph(x, a, int(rng.integers(2**63)))
            empty += g.n_edges == 0
        return empty

    parts = replicate_blocks(block, seed, ("empty_graph", n), reps, threads, block=16)
    p = sum(parts) / reps
    region = "gamma/alpha>=2" if gamma / alpha >= 2 else "trend_only"
    bound = max(empty_graph_lower_bound(alpha, gamma, n), 0.0)
    return _report("empty_graph", n, gamma, alpha, p, math.sqrt(p * (1 - p) / reps), bound, reps,
                   "bernoulli", region, flags)


@dataclass
class LoneCliqueReport:
    alpha: float
    gamma: float
    n: int
    reps: int
    p_lone_clique: float
    nonisolated: EstimateReport
    follower_counts: dict[int, int]
    p_one_follower: float
    modal_follower_count: int | None
    trend: float
    flags: tuple[str, ...] = field(default=())


def lone_clique_follower_stats(alpha: float, gamma: float, n: int, reps: int, seed: int,
                               threads: int = 1) -> LoneCliqueReport:
    """Neighbour count of the clique vertex given exactly one clique vertex.

    K0 = 1 has exact Binomial probability; replicates draw directly from the
    conditional law (one weight above sqrt(a_n), n - 1 below) and flip its
    n - 1 coins.
    """
    _check_super(gamma)
    flags = list(_few_reps(reps, "lone_clique_follower_stats"))
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n)
    r = math.sqrt(a)
    p = r ** (-alpha)
    p_lone = n * p * math.exp((n - 1) * math.log1p(-p))
    chunk = max(1, 2_000_000 // n)

    def block(rng, size):
        counts = np.zeros(n, dtype=np.int64)
        done = 0
        while done < size:
            m = min(chunk, size - done)
            y = np.asarray(model.sample_above(r, m, rng))
            z = np.asarray(model.sample_below(r, (m, n - 1), rng))
            deg = np.count_nonzero(rng.random(z.shape) < edge_probability(y[:, None], z, a), axis=1)
            counts += np.bincount(deg, minlength=n)
            done += m
        return counts

    parts = replicate_blocks(block, seed, ("lone_clique", n), reps, threads, block=1000)
    counts = np.sum(parts, axis=0)
    events = int(counts[1:].sum())
    hist = {int(c): int(counts[c]) for c in np.flatnonzero(counts) if c > 0}
    if events < MIN_EVENTS:
        flags.append("insufficient_sample")
    q = events / reps
    noniso = _report("lone_clique_nonisolated", n, gamma, alpha, p_lone * q,
                     p_lone * math.sqrt(q * (1 - q) / reps),
                     _lone_clique_asymptote(alpha, gamma, n, a), reps, "conditional",
                     "gamma/alpha<2" if gamma / alpha < 2 else "gamma/alpha>=2", flags)
    one = hist.get(1, 0) / events if events else float("nan")
    modal = max(sorted(hist), key=lambda c: hist[c]) if hist else None
    return LoneCliqueReport(alpha, gamma, n, reps, p_lone, noniso, hist, one, modal,
                            n / a ** (alpha / 2), tuple(flags))


def _lone_clique_asymptote(alpha, gamma, n, a):
    if gamma / alpha < 2:
        return n / a ** (alpha / 2)
    return (alpha / (alpha - 1)) ** 2 * n * n / a ** ((alpha + 1) / 2)


def limit_graphon_value(alphaprime: float, x: float, y: float) -> float:
    return (1 - alphaprime) ** 2 * (x * y) ** (-alphaprime)


def rescaled_graphon_partial_integral(alphaprime: float, beta: float, n: int, x: float, y: float,
                                      seed: int) -> float:
    """Edge mass in the top ``ceil(xn) x ceil(yn)`` block over the total.

    Weights are Pareto with index ``1/alphaprime`` and ``a_n =
    n**(2 alphaprime - beta)``; vertices are ordered by decreasing weight.
    The limit is ``(xy)**(1 - alphaprime)``.
    """
    if not 0 < alphaprime < 1:
        raise InvalidParameterError("alphaprime must lie in (0, 1)")
    if not 0 < beta < 2 * alphaprime:
        raise RegionError("beta must lie in (0, 2 alphaprime)")
    if not (0 < x <= 1 and 0 < y <= 1):
        raise InvalidParameterError("x and y must lie in (0, 1]")
    if n > FULL_BUILD_MAX_N:
        raise SizeError(f"full Bernoulli build limited to n <= {FULL_BUILD_MAX_N}, got {n}")
    model = TailModel(1.0 / alphaprime)
    vals = np.sort(np.asarray(model.quantile(1.0 - stream(seed, "graphon_sample").random(n))))[::-1]
    g = build_bernoulli_graph(vals, n ** (2 * alphaprime - beta), seed)
    e = g.edges
    if e.shape[0] == 0:
        return float("nan")
    cx, cy = math.ceil(x * n), math.ceil(y * n)
    i, j = e[:, 0], e[:, 1]
    # ordered pairs: both (i, j) and (j, i)
    part = np.count_nonzero((i < cx) & (j < cy)) + np.count_nonzero((j < cx) & (i < cy))
    return part / (2.0 * e.shape[0])
