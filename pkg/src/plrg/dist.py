"""Heavy-tailed weight laws, scaling sequences and regime classification."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from ._rng import as_generator
from .errors import EmptySampleError, InvalidParameterError, NumericError


class Family(enum.Enum):
    EXACT_PARETO = "exact_pareto"
    GENERIC_RV = "generic_rv"


@dataclass(frozen=True)
class TailModel:
    """A law on [1, inf) with tail ``x**-alpha * L(x)``.

    With ``slowly_varying=None`` the model is the exact Pareto law and every
    function has a closed form.  Otherwise ``L`` is evaluated pointwise and
    inverses/densities are computed numerically; ``L(1)`` should be 1 and
    the resulting tail non-increasing.
    """

    alpha: float
    slowly_varying: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    density: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha!r}")

    @property
    def family(self) -> Family:
        return Family.EXACT_PARETO if self.slowly_varying is None else Family.GENERIC_RV

    @property
    def is_pareto(self) -> bool:
        return self.slowly_varying is None

    def tail(self, x):
        """P(X > x)."""
        x = np.asarray(x, dtype=float)
        xc = np.maximum(x, 1.0)
        if self.is_pareto:
            out = xc ** (-self.alpha)
        else:
            out = xc ** (-self.alpha) * np.asarray(self.slowly_varying(xc), dtype=float)
        out = np.where(x <= 1.0, 1.0, out)
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_pareto:
            out = np.where(x <= 1.0, 0.0, -np.expm1(-self.alpha * np.log(np.maximum(x, 1.0))))
            return out[()] if out.ndim == 0 else out
        return 1.0 - self.tail(x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.maximum(x, 1.0)
        if self.is_pareto:
            out = self.alpha * xc ** (-self.alpha - 1.0)
        elif self.density is not None:
            out = np.asarray(self.density(xc), dtype=float)
        else:
            h = 1e-6 * xc
            out = (self.tail(xc - h) - self.tail(xc + h)) / (2 * h)
        out = np.where(x < 1.0, 0.0, out)
        return out[()] if out.ndim == 0 else out

    def quantile(self, u):
        """Inverse of the tail: the x >= 1 with ``tail(x) == u``, for u in (0, 1]."""
        u = np.asarray(u, dtype=float)
        if self.is_pareto:
            out = u ** (-1.0 / self.alpha)
            return out[()] if out.ndim == 0 else out
        return self._numeric_quantile(u)

    def _numeric_quantile(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        umin = float(flat.min()) if flat.size else 1.0
        top = 1.0
        while float(self.tail(math.exp(top))) > umin:
            top *= 2.0
            if top > 1e4:
                raise NumericError("tail does not decay; cannot invert")
        lo = np.zeros_like(flat)
        hi = np.full_like(flat, top)
        # bisection on log x; 80 halvings resolve log-width 2^-80 * hi
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            above = self.tail(np.exp(mid)) > flat
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        out = np.exp(0.5 * (lo + hi)).reshape(u.shape)
        return out[()] if out.ndim == 0 else out

    # conditional samplers used throughout: draw tail levels uniformly in a band
    def sample_above(self, t: float, size, rng: np.random.Generator):
        """Draws from the law of X given X > t."""
        return self.quantile(self.tail(t) * (1.0 - rng.random(size)))

    def sample_between(self, lo: float, hi: float, size, rng: np.random.Generator):
        """Draws from the law of X given lo < X <= hi."""
        t_hi, t_lo = self.tail(hi), self.tail(lo)
        return self.quantile(t_hi + (t_lo - t_hi) * (1.0 - rng.random(size)))

    def sample_below(self, t: float, size, rng: np.random.Generator):
        """Draws from the law of X given X <= t."""
        return self.sample_between(1.0, t, size, rng)


def tail_model_pareto(alpha: float) -> TailModel:
    return TailModel(float(alpha))


def tail_model_generic(alpha: float, slowly_varying, density=None) -> TailModel:
    return TailModel(float(alpha), slowly_varying, density)


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """The vertex weights ``X_1..X_n``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise InvalidParameterError("values must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("weights must be finite")
        if v.size and v.min() < 1.0:
            raise InvalidParameterError("all weights must be >= 1")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return isinstance(other, WeightedSample) and np.array_equal(self.values, other.values)


def sample_iid(model: TailModel, n: int, seed) -> WeightedSample:
    """Inverse-transform sample of ``n`` weights."""
    if n < 1:
        raise EmptySampleError("n must be >= 1")
    rng = as_generator(seed)
    return WeightedSample(np.asarray(model.quantile(1.0 - rng.random(int(n))), dtype=float).reshape(-1))


def sample_top(model: TailModel, n: int, k: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """The ``k`` largest of ``n`` i.i.d. weights, decreasing, for ``size`` replicates.

    Uses the uniform order-statistic recursion on tail levels so the cost is
    O(k) per replicate regardless of ``n``.  Returns shape ``(size, k)``.
    """
    k = min(int(k), int(n))
    levels = np.empty((size, k))
    prev = np.zeros(size)
    for i in range(k):
        m = n - i
        # min of m uniforms on (prev, 1)
        v = 1.0 - rng.random(size)
        levels[:, i] = prev + (1.0 - prev) * -np.expm1(np.log(v) / m)
        prev = levels[:, i]
    return np.asarray(model.quantile(np.maximum(levels, np.finfo(float).tiny)))


def next_order_statistic(model: TailModel, n: int, taken: int, last_level: float, rng: np.random.Generator):
    """Tail level and value of the next largest weight after ``taken`` of ``n``."""
    m = n - taken
    lvl = last_level + (1.0 - last_level) * -math.expm1(math.log(1.0 - rng.random()) / m)
    return lvl, float(model.quantile(max(lvl, np.finfo(float).tiny)))


def max_of_iid(model: TailModel, m: int, rng: np.random.Generator, size: int):
    """Maximum of ``m`` i.i.d. weights (0 where m == 0)."""
    if m <= 0:
        return np.zeros(size)
    v = 1.0 - rng.random(size)
    lvl = -np.expm1(np.log(v) / m)
    return np.asarray(model.quantile(np.maximum(lvl, np.finfo(float).tiny)), dtype=float)


def scaling_a_n(alpha: float, gamma: float, n: int) -> float:
    """``(n**gamma * ln n) ** (1/alpha)``."""
    if n < 2:
        raise InvalidParameterError("n must be >= 2 (ln n must be positive)")
    if alpha <= 0 or gamma <= 0:
        raise InvalidParameterError("alpha and gamma must be positive")
    return math.exp((gamma * math.log(n) + math.log(math.log(n))) / alpha)


def critical_scale(model: TailModel, n: int, kind: str = "single") -> float:
    """Root ``a`` of ``n * tail(sqrt(a)) == 1`` (or with the product tail)."""
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    if kind == "single":
        g = lambda la: math.log(n) + math.log(float(model.tail(math.exp(0.5 * la))))
    elif kind == "product":
        g = lambda la: math.log(n) + math.log(product_tail(model, math.exp(0.5 * la)))
    else:
        raise InvalidParameterError(f"unknown kind {kind!r}")
    lo, hi = 0.0, 4.0 * math.log(n) / model.alpha
    for _ in range(60):
        if g(hi) < 0:
            break
        hi *= 2.0
    if not (g(lo) > 0 > g(hi)):
        raise NumericError(f"root not bracketed: g({lo})={g(lo)}, g({hi})={g(hi)}")
    la = optimize.brentq(g, lo, hi, xtol=1e-13, rtol=1e-13, maxiter=500)
    return math.exp(la)


class Regime(enum.Enum):
    SUB_CRITICAL = "sub-critical"
    CRITICAL = "critical"
    SUPER_CRITICAL = "super-critical"
    INDETERMINATE = "indeterminate"


TREND_NS = tuple(2**p for p in range(10, 21))
CRITICAL_SLOPE_TOL = 0.01


def regime_trend(model: TailModel, a_n: Callable[[int], float], ns=TREND_NS) -> np.ndarray:
    """``n * tail(sqrt(a_n))`` along ``ns``."""
    return np.array([n * float(model.tail(math.sqrt(a_n(n)))) for n in ns])


def classify_regime(model: TailModel, gamma: float | None = None, a_n: Callable[[int], float] | None = None) -> Regime:
    """Regime of the scaling ``a_n`` relative to the critical scale.

    For the Pareto model with the standard rule the answer is analytic
    (gamma < 2 sub-critical, gamma >= 2 super-critical, the log factor
    pushing gamma == 2 to zero).  With a callback, the log-log slope of
    ``n * tail(sqrt(a_n))`` over n = 2**10..2**20 decides.
    """
    if a_n is None:
        if gamma is None or gamma <= 0:
            raise InvalidParameterError("gamma must be positive")
        if model.is_pareto:
            return Regime.SUB_CRITICAL if gamma < 2 else Regime.SUPER_CRITICAL
        a_n = lambda n: scaling_a_n(model.alpha, gamma, n)
    v = regime_trend(model, a_n)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        return Regime.SUPER_CRITICAL if np.all(v[-3:] == 0) else Regime.INDETERMINATE
    lv = np.log(v)
    d = np.diff(lv)
    scale = max(1.0, np.abs(lv).max())
    if np.any(d > 1e-9 * scale) and np.any(d < -1e-9 * scale):
        return Regime.INDETERMINATE
    slope = np.polyfit(np.log(TREND_NS), lv, 1)[0]
    if abs(slope) < CRITICAL_SLOPE_TOL:
        return Regime.CRITICAL
    return Regime.SUB_CRITICAL if slope > 0 else Regime.SUPER_CRITICAL


def product_tail(model: TailModel, a: float) -> float:
    """P(X1 * X2 > a)."""
    a = float(a)
    if a < 1.0:
        return 1.0
    if model.is_pareto:
        return a ** (-model.alpha) * (1.0 + model.alpha * math.log(a))
    if a == 1.0:
        return 1.0
    # P = tail(a) + int_1^a pdf(x) tail(a/x) dx, on a log grid
    f = lambda t: float(model.pdf(math.exp(t))) * math.exp(t) * float(model.tail(a / math.exp(t)))
    val, _ = integrate.quad(f, 0.0, math.log(a), epsabs=1e-10, epsrel=1e-10, limit=400)
    return float(model.tail(a)) + val
