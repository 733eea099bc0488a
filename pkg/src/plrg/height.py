"""Sub-critical height function and its fluctuations.

Given the clique size ``k_n`` and the clique weights ``y``, the follower
weights ``z`` are i.i.d. from the law of X given X <= sqrt(a_n).  The height
``H_n(x)`` counts followers above ``tau(x) = a_n / y_(ceil(x k_n))``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from ._rng import as_generator, replicate_blocks
from .dist import TailModel
from .errors import InvalidParameterError, RangeError, RegionError

MIN_SIGMA2 = 10.0


@dataclass(frozen=True, eq=False)
class ConditionedSample:
    """One replicate of the clique/follower split.

    ``y`` and ``z`` are sorted increasingly.  When ``z_floor > 1`` only the
    followers above ``z_floor`` are stored; the rest (``n - k_n - z.size``
    of them) lie below every threshold that ``tau`` can produce.
    """

    model: TailModel
    n: int
    a_n: float
    k_n: int
    y: np.ndarray
    z: np.ndarray
    z_floor: float = 1.0

    @property
    def sigma2(self) -> float:
        return self.n * float(self.model.tail(math.sqrt(self.a_n)))

    @property
    def n_followers(self) -> int:
        return self.n - self.k_n


def sample_conditioned(model: TailModel, n: int, a_n: float, seed, lazy: bool = False,
                       max_resample: int = 100) -> ConditionedSample:
    """Draw ``k_n``, the clique weights and the follower weights.

    With ``lazy=True`` only followers above ``a_n / max(y)`` are drawn: their
    number is Binomial and their values come from the law restricted to
    ``(a_n / max(y), sqrt(a_n)]``.  ``H_n`` is unchanged in law.
    """
    rng = as_generator(seed)
    root = math.sqrt(a_n)
    p = float(model.tail(root))
    sigma2 = n * p
    if sigma2 < 1:
        raise RegionError(f"n * tail(sqrt(a_n)) = {sigma2:.3g} < 1: not sub-critical")
    if sigma2 < MIN_SIGMA2:
        warnings.warn(f"sigma_n^2 = {sigma2:.3g} is small for sub-critical asymptotics", stacklevel=2)
    for _ in range(max_resample):
        k = int(rng.binomial(n, p))
        if k > 0:
            break
    else:
        raise RegionError("clique stayed empty after resampling")
    y = np.sort(np.atleast_1d(model.sample_above(root, k, rng)))
    m = n - k
    if not lazy:
        z = np.sort(np.atleast_1d(model.sample_below(root, m, rng)))
        return ConditionedSample(model, n, a_n, k, y, z, 1.0)
    floor = max(1.0, a_n / y[-1])
    q = (float(model.tail(floor)) - p) / float(model.cdf(root))
    above = int(rng.binomial(m, min(max(q, 0.0), 1.0)))
    z = np.sort(np.atleast_1d(model.sample_between(floor, root, above, rng))) if above else np.empty(0)
    return ConditionedSample(model, n, a_n, k, y, z, floor)


def resample_followers(cs: ConditionedSample, seed) -> ConditionedSample:
    """Same clique ``(k_n, y)`` with the followers drawn afresh."""
    rng = as_generator(seed)
    root = math.sqrt(cs.a_n)
    m = cs.n_followers
    if cs.z_floor <= 1.0:
        z = np.sort(np.atleast_1d(cs.model.sample_below(root, m, rng)))
        return ConditionedSample(cs.model, cs.n, cs.a_n, cs.k_n, cs.y, z, 1.0)
    p = float(cs.model.tail(root))
    q = (float(cs.model.tail(cs.z_floor)) - p) / float(cs.model.cdf(root))
    above = int(rng.binomial(m, min(max(q, 0.0), 1.0)))
    z = np.sort(np.atleast_1d(cs.model.sample_between(cs.z_floor, root, above, rng))) if above else np.empty(0)
    return ConditionedSample(cs.model, cs.n, cs.a_n, cs.k_n, cs.y, z, cs.z_floor)


def tau(x, y_sorted, a_n: float):
    """Follower threshold ``a_n / y_(ceil(x k))`` (1-based order statistic)."""
    y = np.asarray(y_sorted, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.size == 0:
        raise InvalidParameterError("need at least one clique value")
    if np.any((x <= 0) | (x >= 1)):
        raise RangeError("x must lie in (0, 1)")
    idx = np.clip(np.ceil(x * y.size).astype(int), 1, y.size) - 1
    out = a_n / y[idx]
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class HeightSeries:
    x_grid: np.ndarray
    h: np.ndarray
    tau: np.ndarray
    centered: np.ndarray


def theta_n(x, model: TailModel, a_n: float):
    """Centering function ``tail(sqrt(a_n) * F_W^{-1}(x)) / tail(sqrt(a_n))``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x > 1):
        raise RangeError("x must lie in (0, 1]")
    root = math.sqrt(a_n)
    if model.is_pareto:
        cap = a_n ** (model.alpha / 2)
        out = np.where(x > 1.0 / cap, 1.0 / x, cap)
    else:
        # F_W^{-1}(x) = sqrt(a_n) / Q(x tail(sqrt(a_n))), Q the tail inverse
        p = float(model.tail(root))
        q = np.asarray(model.quantile(x * p), dtype=float)
        out = np.asarray(model.tail(a_n / q), dtype=float) / p
    return out[()] if out.ndim == 0 else out


def height_series(cs: ConditionedSample, x_grid) -> HeightSeries:
    xs = np.asarray(x_grid, dtype=float)
    th = tau(xs, cs.y, cs.a_n)
    h = cs.z.size - np.searchsorted(cs.z, th, side="right")
    s2 = cs.sigma2
    centered = (h - s2 * (theta_n(1.0 - xs, cs.model, cs.a_n) - 1.0)) / math.sqrt(s2)
    return HeightSeries(xs, h.astype(np.int64), np.atleast_1d(th), np.atleast_1d(centered))


def decompose(cs: ConditionedSample, series: HeightSeries):
    """``(h1bar, h2bar)`` with ``h1bar + h2bar == H - (n - k) p_n``."""
    m = cs.model
    root = math.sqrt(cs.a_n)
    p, F = float(m.tail(root)), float(m.cdf(root))
    phat = (np.asarray(m.tail(series.tau)) - p) / F
    pn = (p / F) * (theta_n(1.0 - series.x_grid, m, cs.a_n) - 1.0)
    nf = cs.n_followers
    return series.h - nf * phat, nf * (phat - pn)


def decomposition_residual(cs: ConditionedSample, series: HeightSeries) -> float:
    """Relative error of the identity h1bar + h2bar = H - (n-k) p_n."""
    h1, h2 = decompose(cs, series)
    m, root = cs.model, math.sqrt(cs.a_n)
    pn = float(m.tail(root)) / float(m.cdf(root)) * (theta_n(1.0 - series.x_grid, m, cs.a_n) - 1.0)
    rhs = series.h - cs.n_followers * pn
    return float(np.max(np.abs(h1 + h2 - rhs) / np.maximum(1.0, np.abs(rhs))))


# ---------------------------------------------------------------- covariance

class CovarianceAccumulator:
    """Mergeable (count, mean, co-moment) running covariance."""

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self.comoment = np.zeros((dim, dim))

    def update(self, rows) -> "CovarianceAccumulator":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        other = CovarianceAccumulator(self.mean.size)
        other.count = rows.shape[0]
        if other.count:
            other.mean = rows.mean(axis=0)
            d = rows - other.mean
            other.comoment = d.T @ d
        return self.merge(other)

    def merge(self, other: "CovarianceAccumulator") -> "CovarianceAccumulator":
        n1, n2 = self.count, other.count
        if n2 == 0:
            return self
        if n1 == 0:
            self.count, self.mean, self.comoment = n2, other.mean.copy(), other.comoment.copy()
            return self
        n = n1 + n2
        delta = other.mean - self.mean
        self.comoment = self.comoment + other.comoment + np.outer(delta, delta) * (n1 * n2 / n)
        self.mean = self.mean + delta * (n2 / n)
        self.count = n
        return self

    def covariance(self) -> np.ndarray:
        return self.comoment / max(self.count - 1, 1)


def bm_cov(x, y):
    """Covariance of Brownian motion run at time s/(1-s)."""
    m = np.minimum(x, y)
    return m / (1 - m)


def gbb_cov(x, y):
    """Covariance of the generalized Brownian bridge."""
    return np.minimum(x, y) * (1 - np.maximum(x, y)) / ((1 - x) ** 2 * (1 - y) ** 2)


def bridge_cov(x, y):
    return np.minimum(x, y) * (1 - np.maximum(x, y))


def _grid_matrix(fn, xs):
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    return fn(X, Y)


@dataclass
class FluctuationSummary:
    x_grid: np.ndarray
    emp_mean: np.ndarray
    emp_cov: np.ndarray
    target_cov: np.ndarray
    n: int = 0
    reps: int = 0
    sigma2: float = float("nan")
    h1_cov: np.ndarray | None = None
    h1_target: np.ndarray | None = None
    h2_cov: np.ndarray | None = None
    h2_target: np.ndarray | None = None
    scaled_height_mean: np.ndarray | None = None
    max_identity_residual: float = 0.0
    flags: tuple[str, ...] = field(default=())

    def to_csv(self, path) -> None:
        write_cov_csv(path, self.x_grid, self.emp_cov, self.target_cov, self.n, self.reps)


def write_cov_csv(path, xs, emp, target, n, reps) -> None:
    lines = ["x,y,emp_cov,target_cov,n,reps"]
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            lines.append(f"{x!r},{y!r},{float(emp[i, j])!r},{float(target[i, j])!r},{n},{reps}")
    Path(path).write_text("\n".join(lines) + "\n")


def _check_grid(x_grid, upper):
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or xs.size == 0 or np.any(xs <= 0) or np.any(xs > upper) or np.any(np.diff(xs) <= 0):
        raise RangeError(f"x_grid must be increasing in (0, {upper}]")
    return xs


def fluctuation_summary(model: TailModel, n: int, a_n: float, x_grid, reps: int, seed: int,
                        threads: int = 1) -> FluctuationSummary:
    """Empirical mean/covariance of the normalized height fluctuation and
    of its two components, next to their Gaussian-limit targets."""
    xs = _check_grid(x_grid, 0.8)
    flags = ()
    if reps < 1000:
        flags = ("few_reps",)
        warnings.warn(f"fluctuation_summary with reps={reps} < 1000", stacklevel=2)
    d = xs.size

    def block(rng, size):
        tot, c1, c2 = CovarianceAccumulator(d), CovarianceAccumulator(d), CovarianceAccumulator(d)
        rows_t, rows_1, rows_2, hs = [], [], [], []
        worst = 0.0
        for _ in range(size):
            cs = sample_conditioned(model, n, a_n, rng, lazy=True)
            s = height_series(cs, xs)
            h1, h2 = decompose(cs, s)
            sig = math.sqrt(cs.sigma2)
            rows_t.append(s.centered)
            rows_1.append(h1 / sig)
            rows_2.append(h2 / sig)
            hs.append(s.h / cs.sigma2)
            worst = max(worst, decomposition_residual(cs, s))
        tot.update(rows_t), c1.update(rows_1), c2.update(rows_2)
        return tot, c1, c2, np.sum(hs, axis=0), worst

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        parts = replicate_blocks(block, seed, ("height", n), reps, threads, block=256)
    tot, c1, c2 = CovarianceAccumulator(d), CovarianceAccumulator(d), CovarianceAccumulator(d)
    hsum = np.zeros(d)
    worst = 0.0
    for t, a, b, h, w in parts:
        tot.merge(t), c1.merge(a), c2.merge(b)
        hsum += h
        worst = max(worst, w)
    t1, t2 = _grid_matrix(bm_cov, xs), _grid_matrix(gbb_cov, xs)
    return FluctuationSummary(
        xs, tot.mean, tot.covariance(), t1 + t2, n, reps, n * float(model.tail(math.sqrt(a_n))),
        c1.covariance(), t1, c2.covariance(), t2, hsum / reps, worst, flags,
    )


@dataclass
class BridgeReport:
    x_grid: np.ndarray
    emp_cov: np.ndarray
    target_cov: np.ndarray
    sup_gap_ok_fraction: float
    q_at_one: float
    reps: int


def empirical_quantile_levels(w_sorted: np.ndarray, x) -> np.ndarray:
    """Left-continuous empirical quantile ``W_(ceil(x m))``; x = 1 maps to 1."""
    m = w_sorted.size
    x = np.asarray(x, dtype=float)
    idx = np.clip(np.ceil(x * m).astype(int), 1, m) - 1
    return np.where(x >= 1.0, 1.0, w_sorted[idx])


def quantile_bridge_check(model: TailModel, n: int, a_n: float, x_grid, reps: int, seed: int,
                          threads: int = 1) -> BridgeReport:
    """Covariance of ``sqrt(k)(Q_n(x) - x)`` against the Brownian bridge."""
    xs = _check_grid(x_grid, 1.0)
    root = math.sqrt(a_n)
    p = float(model.tail(root))
    inner = xs[xs < 1]
    d = inner.size

    def block(rng, size):
        acc = CovarianceAccumulator(d)
        rows, ok, q1 = [], 0, 1.0
        for _ in range(size):
            k = 0
            while k == 0:
                k = int(rng.binomial(n, p))
            y = np.atleast_1d(model.sample_above(root, k, rng))
            w = np.sort(root / y)
            # F_W(w) = tail(sqrt(a_n) / w) / tail(sqrt(a_n))
            q = np.asarray(model.tail(root / empirical_quantile_levels(w, xs)), dtype=float) / p
            q = np.where(xs >= 1.0, 1.0, q)
            q1 = min(q1, float(q[-1])) if xs[-1] >= 1 else q1
            rows.append(math.sqrt(k) * (q[: d] - inner))
            ok += bool(np.max(np.abs(q - xs)) < 5 / math.sqrt(k))
        acc.update(rows)
        return acc, ok, q1

    parts = replicate_blocks(block, seed, ("bridge", n), reps, threads, block=1024)
    acc = CovarianceAccumulator(d)
    ok, q1 = 0, 1.0
    for a, o, q in parts:
        acc.merge(a)
        ok += o
        q1 = min(q1, q)
    return BridgeReport(inner, acc.covariance(), _grid_matrix(bridge_cov, inner), ok / reps, q1, reps)


@dataclass
class BoundaryReport:
    x_grid: np.ndarray
    h_hat: np.ndarray
    h_ref: np.ndarray
    ratio: np.ndarray
    sigma2: float
    reps: int


def boundary_profile(model: TailModel, n: int, a_n: float, x_grid, reps: int, seed: int,
                     threads: int = 1) -> BoundaryReport:
    """``1 + E H_n(1-x) / sigma_n^2`` against ``1/x`` (x = 1 gives 1)."""
    xs = _check_grid(x_grid, 1.0)
    inner = 1.0 - xs[xs < 1]

    def block(rng, size):
        tot = np.zeros(inner.size)
        for _ in range(size):
            cs = sample_conditioned(model, n, a_n, rng, lazy=True)
            tot += height_series(cs, inner).h / cs.sigma2
        return tot

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        parts = replicate_blocks(block, seed, ("boundary", n), reps, threads, block=256)
    mean = np.sum(parts, axis=0) / reps
    h_hat = np.ones(xs.size)
    h_hat[xs < 1] += mean
    ref = 1.0 / xs
    return BoundaryReport(xs, h_hat, ref, h_hat / ref, n * float(model.tail(math.sqrt(a_n))), reps)
