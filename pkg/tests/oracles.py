"""Independent reference values computed by quadrature or closed forms."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def path_n3(alpha: float, a: float) -> float:
    """P(X1 X2 > a, X2 X3 > a) for three Pareto(alpha) weights.

    Given X2 = x the two events are independent with probability
    min(1, (a/x)^-alpha) each, which integrates to 2 a^-alpha - a^-2alpha.
    """
    return 2 * a ** (-alpha) - a ** (-2 * alpha)


def _density_log(alpha, t):
    # density of ln X
    return alpha * math.exp(-alpha * t)


def path_n3_quad(alpha: float, a: float) -> float:
    """Same probability by 3-dim quadrature in log coordinates."""
    L = math.log(a)
    top = L + 40.0 / alpha  # tail mass beyond is below e^-40
    f = lambda t2, t0, t1: _density_log(alpha, t0) * _density_log(alpha, t1) * _density_log(alpha, t2)
    val, _ = integrate.tplquad(
        f, 0, top,
        lambda t1: max(0.0, L - t1), lambda t1: top,
        lambda t1, t0: max(0.0, L - t1), lambda t1, t0: top,
        epsabs=1e-11, epsrel=1e-9,
    )
    return val


def two_star_n3_quad(alpha: float, a: float) -> float:
    """P(X1 X2 > a, X2 X3 > a, X1 X3 <= a) by 3-dim quadrature.

    Variables are (ln X2, ln X1, ln X3); the last is confined to
    ``[max(0, L - t1), max(lower, L - t0)]``.
    """
    L = math.log(a)
    f = lambda t2, t0, t1: _density_log(alpha, t0) * _density_log(alpha, t1) * _density_log(alpha, t2)
    lo = lambda t1, t0: max(0.0, L - t1)
    val, _ = integrate.tplquad(
        f, 0, L + 40.0 / alpha,
        lambda t1: max(0.0, L - t1), lambda t1: max(max(0.0, L - t1), L),
        lo, lambda t1, t0: max(lo(t1, t0), L - t0),
        epsabs=1e-11, epsrel=1e-9,
    )
    return val


def bernoulli_empty_n2(alpha: float, a: float) -> float:
    """P(no edge | both weights <= sqrt(a)) for n = 2: 1 - E[X1 X2 / a]."""
    r = math.sqrt(a)
    mass = 1 - r ** (-alpha)
    dens = lambda x: alpha * x ** (-alpha - 1) / mass
    val, _ = integrate.dblquad(lambda y, x: dens(x) * dens(y) * x * y / a, 1, r, 1, r, epsabs=1e-13)
    return 1 - val


def bernoulli_empty_n2_unconditional(alpha: float, a: float) -> float:
    """P(no edge) for n = 2 without conditioning: 1 - E[min(1, X1 X2 / a)]."""
    dens = lambda x: alpha * x ** (-alpha - 1)
    val, _ = integrate.dblquad(
        lambda v, u: dens(math.exp(u)) * math.exp(u) * dens(math.exp(v)) * math.exp(v) * min(1.0, math.exp(u + v) / a),
        0, 60 / alpha, 0, 60 / alpha, epsabs=1e-12,
    )
    return 1 - val


def nonisolated_n3(alpha: float, a: float) -> float:
    """P(vertex 1 non-isolated) among three weights: 1 - E[(1 - tail(a/X1))^2]."""
    def f(t):
        x = math.exp(t)
        tl = 1.0 if a / x <= 1 else (a / x) ** (-alpha)
        return _density_log(alpha, t) * (1 - (1 - tl) ** 2)
    L = math.log(a)
    lo, _ = integrate.quad(f, 0, L, limit=200)
    # X1 >= a connects to anything
    return lo + a ** (-alpha)
