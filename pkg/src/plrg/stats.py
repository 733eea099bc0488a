"""Monte Carlo estimators and closed-form/asymptotic oracles for motif
probabilities, edge/vertex counts and the super-critical clique.

Motif events concern designated vertices 1, 2 (and 3) of an n-sample.  A
replicate only needs their weights and the maximum of the remaining
``n - k`` weights, which is drawn exactly from its own law, so each
replicate costs O(1) whatever ``n`` is.

Two estimators are offered.  ``method="plain"`` averages event
indicators.  ``method="importance"`` draws the designated tail levels from
a defensive mixture of the uniform law and a log-uniform law reaching down
to the edge scale, and averages likelihood-ratio weighted indicators; it
is what makes events of probability ~1e-7 measurable with 1e6 replicates.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import integrate

from ._rng import replicate_blocks
from .dist import (
    TailModel,
    max_of_iid,
    next_order_statistic,
    product_tail,
    sample_iid,
    sample_top,
    scaling_a_n,
)
from .errors import InvalidParameterError, RegionError
from .hardgraph import hard_edge_count, k_vector, nonisolated_count

MIN_REPS = 1000


class MotifEvent(enum.Enum):
    EDGE_PRESENT = "edge_present"
    EDGE_VACANT2 = "edge_vacant2"
    VACANT_TRIANGLE = "vacant_triangle"
    ONE_EDGE_TRIPLE = "one_edge_triple"
    TWO_STAR = "two_star"
    PATH2 = "path2"
    TRIANGLE = "triangle"
    NON_ISOLATED_VERTEX = "non_isolated_vertex"

    @property
    def order(self) -> int:
        """Number of designated vertices."""
        if self is MotifEvent.NON_ISOLATED_VERTEX:
            return 1
        if self in (MotifEvent.EDGE_PRESENT, MotifEvent.EDGE_VACANT2):
            return 2
        return 3


@dataclass
class EstimateReport:
    event: str
    n: int
    gamma: float
    alpha: float
    mc_mean: float
    mc_se: float
    asymptote: float
    ratio: float
    reps: int = 0
    method: str = "plain"
    region: str = ""
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return asdict(self)


def _report(event, n, gamma, alpha, mean, se, asym, reps, method="plain", region="", flags=()):
    ratio = mean / asym if asym > 0 else float("nan")
    return EstimateReport(str(event), int(n), float(gamma), float(alpha), float(mean), float(se),
                          float(asym), float(ratio), int(reps), method, region, tuple(flags))


@dataclass(frozen=True)
class Asymptote:
    value: float
    region: str


def motif_asymptote(event: MotifEvent, alpha: float, gamma: float, n: int) -> Asymptote:
    """Leading-order value of a motif probability (natural log throughout)."""
    event = MotifEvent(event)
    if gamma <= 0:
        raise RegionError("gamma must be positive")
    L = math.log(n)
    E = MotifEvent
    if event is E.EDGE_PRESENT:
        return Asymptote(gamma / n**gamma, "gamma>0")
    if event in (E.EDGE_VACANT2, E.VACANT_TRIANGLE):
        c = 2.0 if event is E.EDGE_VACANT2 else 1.5
        if gamma >= 1:
            return Asymptote(c / (n ** (gamma - 1) * L), "gamma>=1")
        return Asymptote(1.0, "0<gamma<1")
    if event is E.ONE_EDGE_TRIPLE:
        if gamma > 1:
            return Asymptote((gamma - 1) / n ** (2 * gamma - 1), "gamma>1")
        if gamma == 1:
            return Asymptote(math.log(L) / (n * L), "gamma=1")
        return Asymptote(gamma / n**gamma, "0<gamma<1")
    if event in (E.TWO_STAR, E.PATH2):
        return Asymptote(2.0 / (n**gamma * L), "gamma>0")
    if event is E.TRIANGLE:
        # strictly lower order than 1/(n^gamma ln n): leading coefficient 0
        return Asymptote(0.0, "o(1/(n^gamma ln n))")
    if event is E.NON_ISOLATED_VERTEX:
        return Asymptote(expected_vertices(alpha, gamma, n, "asymptotic") / n, _vertex_region(gamma))
    raise RegionError(f"no asymptote for {event}")


def _vertex_region(gamma):
    if gamma > 2:
        return "gamma>2"
    if gamma > 1:
        return "1<gamma<=2"
    if gamma == 1:
        return "gamma=1"
    return "0<gamma<1"


# ---------------------------------------------------------------- sampling

def _proposal_levels(rng, shape, eps):
    """Tail levels from 0.5*U(0,1) + 0.5*LogU(eps,1) and their densities."""
    logu = math.log(1.0 / eps)
    coin = rng.random(shape) < 0.5
    r = rng.random(shape)
    u = np.where(coin, 1.0 - r, np.exp(-logu * r))
    q = 0.5 + 0.5 * (u > eps) / (u * logu)
    return u, q


def designated_weights(model: TailModel, n: int, k: int, scale: float, rng, size: int, method: str):
    """Weights of k designated vertices, max of the other n-k, and IS weights.

    ``scale`` is the product threshold setting the log-uniform reach of the
    importance proposal.
    """
    if method == "plain":
        levels = 1.0 - rng.random((size, k))
        w = np.ones(size)
    elif method == "importance":
        eps = 1e-2 * min(1.0, float(model.tail(scale)))
        levels, q = _proposal_levels(rng, (size, k), eps)
        w = 1.0 / np.prod(q, axis=1)
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    x = np.asarray(model.quantile(levels), dtype=float).reshape(size, k)
    rest = max_of_iid(model, n - k, rng, size)
    return x, rest, w


def event_mask(event: MotifEvent, x: np.ndarray, rest: np.ndarray, a: float) -> np.ndarray:
    """Indicator of ``event`` for each row of designated weights ``x``."""
    event = MotifEvent(event)
    k = x.shape[1]

    def B(i, j):
        return x[:, i] * x[:, j] > a

    def A(i):
        others = [x[:, j] for j in range(k) if j != i] + [rest]
        return x[:, i] * np.max(np.column_stack(others), axis=1) > a

    E = MotifEvent
    if event is E.NON_ISOLATED_VERTEX:
        return A(0)
    if event is E.EDGE_PRESENT:
        return B(0, 1)
    if event is E.EDGE_VACANT2:
        return A(0) & A(1) & ~B(0, 1)
    all3 = A(0) & A(1) & A(2)
    b01, b02, b12 = B(0, 1), B(0, 2), B(1, 2)
    if event is E.VACANT_TRIANGLE:
        return all3 & ~b01 & ~b02 & ~b12
    if event is E.ONE_EDGE_TRIPLE:
        return all3 & b01 & ~b02 & ~b12
    if event is E.TWO_STAR:
        return all3 & b01 & b12 & ~b02
    if event is E.PATH2:
        return all3 & b01 & b12
    if event is E.TRIANGLE:
        return b01 & b02 & b12
    raise InvalidParameterError(f"unknown event {event}")


def _weighted_mean_se(s1, s2, reps, method):
    mean = s1 / reps
    if method == "plain":
        se = math.sqrt(max(mean * (1 - mean), 0.0) / reps)
    else:
        var = max(s2 - reps * mean * mean, 0.0) / max(reps - 1, 1)
        se = math.sqrt(var / reps)
    return mean, se


def motif_mc(event, alpha: float, gamma: float, n: int, reps: int, seed: int,
             method: str = "plain", a_n: float | None = None, threads: int = 1) -> EstimateReport:
    """Monte Carlo probability of a motif event on the designated vertices."""
    event = MotifEvent(event)
    k = event.order
    if n < k:
        raise InvalidParameterError(f"n must be >= {k} for {event.value}")
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n) if a_n is None else float(a_n)
    flags = []
    if reps < MIN_REPS:
        flags.append("insufficient_reps")
        warnings.warn(f"motif_mc with reps={reps} < {MIN_REPS}", stacklevel=2)

    def block(rng, size):
        x, rest, w = designated_weights(model, n, k, a, rng, size, method)
        hit = np.where(event_mask(event, x, rest, a), w, 0.0)
        return float(hit.sum()), float((hit * hit).sum())

    parts = replicate_blocks(block, seed, ("motif", event.value, n), reps, threads)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean, se = _weighted_mean_se(s1, s2, reps, method)
    try:
        asym = motif_asymptote(event, alpha, gamma, n)
    except RegionError:
        asym = Asymptote(float("nan"), "unsupported")
    return _report(event.value, n, gamma, alpha, mean, se, asym.value, reps, method, asym.region, flags)


# ------------------------------------------------------- edges and vertices

def edge_count_samples(alpha: float, gamma: float, n: int, reps: int, seed: int,
                       a_n: float | None = None, threads: int = 1) -> np.ndarray:
    """|E_n| for ``reps`` independent n-samples."""
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n) if a_n is None else float(a_n)

    def block(rng, size):
        return [hard_edge_count(sample_iid(model, n, rng), a) for _ in range(size)]

    parts = replicate_blocks(block, seed, ("edges", n), reps, threads, block=64)
    return np.array([c for p in parts for c in p], dtype=np.int64)


def vertex_count_samples(alpha: float, gamma: float, n: int, reps: int, seed: int,
                         a_n: float | None = None, threads: int = 1) -> np.ndarray:
    """|V_n| (non-isolated vertices) for ``reps`` independent n-samples."""
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n) if a_n is None else float(a_n)

    def block(rng, size):
        return [nonisolated_count(sample_iid(model, n, rng), a) for _ in range(size)]

    parts = replicate_blocks(block, seed, ("vertices", n), reps, threads, block=64)
    return np.array([c for p in parts for c in p], dtype=np.int64)


def expected_edges(alpha: float, gamma: float, n: int, mode: str = "exact", reps: int = 1000,
                   seed: int = 0, threads: int = 1) -> float:
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    if mode == "exact":
        return math.comb(n, 2) * product_tail(TailModel(alpha), scaling_a_n(alpha, gamma, n))
    if mode == "asymptotic":
        return 0.5 * gamma * n ** (2 - gamma)
    if mode == "mc":
        return float(edge_count_samples(alpha, gamma, n, reps, seed, threads=threads).mean())
    raise InvalidParameterError(f"unknown mode {mode!r}")


def nonisolated_probability(model: TailModel, n: int, a: float) -> float:
    """P(vertex 1 has a neighbour) = tail(a) + int_1^a f(x) (1 - F(a/x)^(n-1)) dx."""

    def integrand(t):
        x = math.exp(t)
        p = float(model.tail(a / x))
        hit = 1.0 if p >= 1.0 else -math.expm1((n - 1) * math.log1p(-p))
        return float(model.pdf(x)) * x * hit

    la = math.log(a)
    knot = la - math.log(n) / model.alpha
    pts = [p for p in (knot, la / 2) if 0 < p < la]
    val, _ = integrate.quad(integrand, 0.0, la, points=pts or None, epsabs=1e-13, epsrel=1e-10, limit=500)
    return float(model.tail(a)) + val


def expected_vertices(alpha: float, gamma: float, n: int, mode: str = "exact", reps: int = 1000,
                      seed: int = 0, threads: int = 1) -> float:
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    if mode == "asymptotic":
        if gamma > 2:
            return 0.0
        if gamma > 1:
            return (gamma - 1) * n ** (2 - gamma)
        if gamma == 1:
            L = math.log(n)
            return n * math.log(L) / L
        return float(n)
    if mode == "exact":
        return n * nonisolated_probability(TailModel(alpha), n, scaling_a_n(alpha, gamma, n))
    if mode == "mc":
        return float(vertex_count_samples(alpha, gamma, n, reps, seed, threads=threads).mean())
    raise InvalidParameterError(f"unknown mode {mode!r}")


# ------------------------------------------------------------ super-critical

@dataclass
class SupercriticalReport:
    alpha: float
    gamma: float
    n: int
    reps: int
    p_clique_ge1: float
    p_clique_eq1: float
    clique_asymptote: float
    lone_star: EstimateReport
    lone_star_one_follower: EstimateReport
    n_nonempty: int
    configurations: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def modal_configuration(self) -> tuple[int, int] | None:
        if not self.configurations:
            return None
        return max(sorted(self.configurations), key=lambda c: self.configurations[c])


def binomial_clique_probabilities(alpha: float, gamma: float, n: int) -> tuple[float, float]:
    """Exact P(K0 >= 1), P(K0 == 1) with K0 ~ Binomial(n, a_n**(-alpha/2))."""
    p = scaling_a_n(alpha, gamma, n) ** (-alpha / 2)
    log_stay = math.log1p(-p)
    return -math.expm1(n * log_stay), n * p * math.exp((n - 1) * log_stay)


def sample_nonempty_top(model: TailModel, n: int, a: float, rng, size: int):
    """Per replicate, the weights that can carry edges (empty list if none).

    The two largest weights decide emptiness; for the rare non-empty case
    further order statistics are drawn until ``X(1) * X(k) <= a``, beyond
    which every vertex is isolated.
    """
    top = sample_top(model, n, 2, rng, size)
    out = []
    for r in np.flatnonzero(top[:, 0] * top[:, 1] > a):
        vals = [top[r, 0], top[r, 1]]
        lvl = float(model.tail(top[r, 1]))
        while len(vals) < n:
            lvl, x = next_order_statistic(model, n, len(vals), lvl, rng)
            if top[r, 0] * x <= a:
                break
            vals.append(x)
        out.append((int(r), np.array(vals)))
    return out


def supercritical_clique_stats(alpha: float, gamma: float, n: int, reps: int, seed: int,
                               threads: int = 1) -> SupercriticalReport:
    if gamma <= 2:
        raise RegionError("super-critical statistics need gamma > 2")
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n)

    def block(rng, size):
        res = []
        for _, vals in sample_nonempty_top(model, n, a, rng, size):
            kv = k_vector(vals, a)
            res.append((kv.vertex_count, kv.k0, kv.followers[0] if kv.k0 == 1 else -1))
        return res

    parts = replicate_blocks(block, seed, ("supercritical", n), reps, threads)
    rows = [r for p in parts for r in p]
    configs: dict[tuple[int, int], int] = {}
    for v, k0, _ in rows:
        configs[(v, k0)] = configs.get((v, k0), 0) + 1
    star = sum(1 for _, k0, _ in rows if k0 == 1)
    star1 = sum(1 for _, k0, k1 in rows if k0 == 1 and k1 == 1)
    asym = (gamma / 2 - 1) * n ** (2 - gamma)
    ge1, eq1 = binomial_clique_probabilities(alpha, gamma, n)

    def rep(name, count):
        p = count / reps
        return _report(name, n, gamma, alpha, p, math.sqrt(p * (1 - p) / reps), asym, reps)

    return SupercriticalReport(
        alpha, gamma, n, reps, ge1, eq1, n ** (1 - gamma / 2) / math.sqrt(math.log(n)),
        rep("lone_clique_nonisolated", star), rep("lone_clique_one_follower", star1),
        len(rows), configs,
    )


# ------------------------------------------------------- anti-clustering

@dataclass
class AnticlusteringRow:
    x: float
    pair: float
    pair_se: float
    pair_exact: float
    joint: float
    joint_se: float
    ratio: float
    ratio_se: float
    joint_constant: float


@dataclass
class AnticlusteringReport:
    alpha: float
    reps: int
    method: str
    rows: list[AnticlusteringRow]
    loglog_slope: float


def anticlustering_diagnostics(alpha: float, x_grid, reps: int, seed: int, method: str = "plain",
                               threads: int = 1) -> AnticlusteringReport:
    """P(X1X2 > x), P(X1X2 > x, X1X3 > x) and their ratio along ``x_grid``."""
    model = TailModel(alpha)
    xs = [float(x) for x in x_grid]
    if any(x < 1 for x in xs):
        raise InvalidParameterError("x_grid values must be >= 1")
    rows = []
    for x in xs:
        def block(rng, size, x=x):
            v, _, w = designated_weights(model, 3, 3, x, rng, size, method)
            pair = (v[:, 0] * v[:, 1] > x) * w
            joint = pair * (v[:, 0] * v[:, 2] > x)
            return np.array([pair.sum(), (pair * pair).sum(), joint.sum(), (joint * joint).sum(), (pair * joint).sum()])

        s = np.sum(replicate_blocks(block, seed, ("anticlustering", repr(x)), reps, threads), axis=0)
        pm, pse = _weighted_mean_se(s[0], s[1], reps, method)
        jm, jse = _weighted_mean_se(s[2], s[3], reps, method)
        if pm > 0:
            r = jm / pm
            # delta method for a ratio of means of the same replicates
            var = (s[3] - 2 * r * s[4] + r * r * s[1]) / reps
            rse = math.sqrt(max(var, 0.0) / reps) / pm
        else:
            r, rse = float("nan"), float("nan")
        rows.append(AnticlusteringRow(x, pm, pse, product_tail(model, x), jm, jse, r, rse, jm * x**alpha))
    good = [(math.log(math.log(r.x)), math.log(r.ratio)) for r in rows if r.x > 1 and r.ratio > 0]
    slope = float(np.polyfit(*zip(*good), 1)[0]) if len(good) >= 2 else float("nan")
    return AnticlusteringReport(alpha, reps, method, rows, slope)
