"""Step graphons: empirical graphons, L1 rescaling, stretching and cut norm."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from ._rng import as_generator, replicate_blocks
from .dist import TailModel, sample_top, scaling_a_n
from .errors import InvalidParameterError, NumericError, SizeError
from .hardgraph import HardGraph, build_hard_graph

EXACT_MAX_K = 16
DEFAULT_WINDOW = 3.0


@dataclass(frozen=True, eq=False)
class GraphonGrid:
    """Symmetric step function on ``[0, side]^2`` with ``k x k`` equal cells.

    ``signed`` marks difference grids, which may hold negative values.
    """

    values: np.ndarray
    side: float = 1.0
    signed: bool = False
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] == 0:
            raise InvalidParameterError("values must be a non-empty square matrix")
        if not self.side > 0:
            raise InvalidParameterError("side must be positive")
        if not np.allclose(v, v.T, rtol=0, atol=1e-12):
            raise InvalidParameterError("graphon values must be symmetric")
        if not self.signed and np.any(v < 0):
            raise InvalidParameterError("graph-derived graphons are non-negative")
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def cell_measure(self) -> float:
        return (self.side / self.k) ** 2

    def l1(self) -> float:
        return float(np.abs(self.values).sum() * self.cell_measure)

    def lp_norm(self, p: float) -> float:
        if p <= 0:
            raise InvalidParameterError("p must be positive")
        return float((np.abs(self.values) ** p).sum() * self.cell_measure) ** (1.0 / p)

    def __eq__(self, other):
        return (
            isinstance(other, GraphonGrid)
            and self.side == other.side
            and np.array_equal(self.values, other.values)
        )


def _overlap(positions: int, cells: int, unit: float, width: float) -> sparse.csr_matrix:
    """Lengths of ``[r unit, (r+1) unit) ∩ [c width, (c+1) width)``."""
    rows, cols, data = [], [], []
    for r in range(positions):
        lo, hi = r * unit, (r + 1) * unit
        c0 = int(lo // width)
        c1 = min(int(math.ceil(hi / width)), cells)
        for c in range(c0, c1):
            ov = min(hi, (c + 1) * width) - max(lo, c * width)
            if ov > 0:
                rows.append(r)
                cols.append(c)
                data.append(ov)
    return sparse.csr_matrix((data, (rows, cols)), shape=(positions, cells))


def vertex_order(g: HardGraph, ordering: str = "by_value_desc") -> np.ndarray:
    """Labels in plotting order; falls back to decreasing degree without values."""
    n = g.n_original
    if ordering == "by_index":
        return np.arange(n)
    if ordering != "by_value_desc":
        raise InvalidParameterError(f"unknown ordering {ordering!r}")
    key = g.values if g.values is not None else g.degrees().astype(float)
    return np.argsort(-np.asarray(key), kind="stable")


def _gridded(g: HardGraph, order: np.ndarray, unit: float, cells: int, width: float) -> np.ndarray:
    pos = np.empty(g.n_original, dtype=np.int64)
    pos[order] = np.arange(g.n_original)
    used = min(g.n_original, int(math.ceil(cells * width / unit)))
    if g.n_edges == 0:
        return np.zeros((cells, cells))
    e = pos[g.edges]
    keep = (e[:, 0] < used) & (e[:, 1] < used)
    e = e[keep]
    a = sparse.csr_matrix(
        (np.ones(2 * len(e)), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(used, used)
    )
    p = _overlap(used, cells, unit, width)
    return np.asarray((p.T @ a @ p).todense()) / width**2


def empirical_graphon(g: HardGraph, ordering: str = "by_value_desc", k: int | None = None) -> GraphonGrid:
    """Adjacency as a step function, each vertex an interval of length 1/n,
    averaged into ``k x k`` cells."""
    n = g.n_original
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise InvalidParameterError(f"resolution k must lie in [1, n={n}]")
    vals = _gridded(g, vertex_order(g, ordering), 1.0 / n, k, 1.0 / k)
    flags = ("empty_graph",) if g.n_edges == 0 else ()
    return GraphonGrid(vals, 1.0, flags=flags)


def _nonzero_l1(w: GraphonGrid) -> float:
    norm = w.l1()
    if norm <= 0:
        raise NumericError("graphon has zero L1 norm")
    return norm


def rescale_l1(w: GraphonGrid) -> GraphonGrid:
    """Values divided by the L1 norm."""
    return GraphonGrid(w.values / _nonzero_l1(w), w.side, w.signed)


def stretch(w: GraphonGrid) -> GraphonGrid:
    """Domain stretched by ``||W||_1^{-1/2}`` so the L1 norm becomes 1."""
    return GraphonGrid(w.values, w.side / math.sqrt(_nonzero_l1(w)), w.signed)


def stretch_by_clique(g: HardGraph, ek0: float, window: float = DEFAULT_WINDOW, k: int = 60) -> GraphonGrid:
    """``W_n(ek0 x, ek0 y)`` on ``[0, window]^2`` in units where each vertex
    has length 1, i.e. the vertex of rank r covers ``[r/ek0, (r+1)/ek0)``."""
    if not ek0 > 0 or not window > 0 or k < 1:
        raise InvalidParameterError("ek0, window and k must be positive")
    flags = ("truncated",) if window * ek0 > g.n_original else ()
    vals = _gridded(g, vertex_order(g, "by_value_desc"), 1.0 / ek0, int(k), window / k)
    return GraphonGrid(vals, float(window), flags=flags)


def expected_clique_size(alpha: float, n: int, a_n: float) -> float:
    return n * a_n ** (-alpha / 2)


def limit_indicator(k: int, window: float = DEFAULT_WINDOW) -> np.ndarray:
    """``1{xy <= 1}`` at the cell centres of a ``k x k`` grid on ``[0, window]^2``."""
    c = (np.arange(k) + 0.5) * window / k
    return (np.multiply.outer(c, c) <= 1.0).astype(float)


def mismatch_fraction(w: GraphonGrid, threshold: float = 0.5) -> float:
    """Share of cells where ``w >= threshold`` disagrees with ``1{xy <= 1}``."""
    target = limit_indicator(w.k, w.side)
    return float(np.mean((w.values >= threshold) != (target > 0)))


def clique_stretch_ensemble(alpha: float, gamma: float, n: int, reps: int, seed: int,
                            window: float = DEFAULT_WINDOW, k: int = 60, threads: int = 1) -> GraphonGrid:
    """Mean clique-stretched graphon over ``reps`` independent graphs.

    Only the ``ceil(window * E K0) + 1`` largest weights reach the window,
    so each replicate draws just those order statistics exactly.
    """
    model = TailModel(alpha)
    a = scaling_a_n(alpha, gamma, n)
    ek0 = expected_clique_size(alpha, n, a)
    top = min(n, int(math.ceil(window * ek0)) + 1)

    def block(rng, size):
        tot = np.zeros((k, k))
        for row in sample_top(model, n, top, rng, size):
            g = build_hard_graph(row, a)
            tot += stretch_by_clique(g, ek0, window, k).values
        return tot

    parts = replicate_blocks(block, seed, ("clique_stretch", n), reps, threads, block=64)
    flags = ("truncated",) if window * ek0 > n else ()
    return GraphonGrid(np.sum(parts, axis=0) / reps, float(window), flags=flags)


# ---------------------------------------------------------------- cut norm

def _weights(w: GraphonGrid) -> np.ndarray:
    return w.values * w.cell_measure


def cut_norm_exact(w: GraphonGrid) -> float:
    """Max over row/column block unions ``S, T`` of ``|sum_{S x T} W|``.

    Rows are enumerated; for a fixed ``S`` the best ``T`` takes all
    positive (or all negative) column sums.
    """
    k = w.k
    if k > EXACT_MAX_K:
        raise SizeError(f"exact cut norm limited to k <= {EXACT_MAX_K}; use cut_norm_heuristic")
    m = _weights(w)
    masks = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
    cols = masks @ m
    pos = np.where(cols > 0, cols, 0).sum(axis=1)
    neg = np.where(cols < 0, -cols, 0).sum(axis=1)
    return float(max(pos.max(), neg.max()))


def cut_norm_heuristic(w: GraphonGrid, restarts: int = 32, seed=0, return_trace: bool = False):
    """Lower bound on the cut norm by alternating best responses.

    Starting from a random ``T``, pick the best ``S`` for it, then the best
    ``T`` for that ``S``, until the value stops improving.
    """
    m = _weights(w)
    rng = as_generator(seed)
    best = 0.0
    trace = []
    for _ in range(max(int(restarts), 1)):
        for sign in (1.0, -1.0):
            sm = sign * m
            t = rng.random(w.k) < 0.5
            val = -np.inf
            while True:
                s = (sm @ t) > 0
                t = (s @ sm) > 0
                new = float(s @ sm @ t)
                if new <= val + 1e-15:
                    break
                val = new
            best = max(best, val)
        trace.append(best)
    return (best, trace) if return_trace else best


def _canonical(w: GraphonGrid) -> np.ndarray:
    order = np.argsort(-w.values.sum(axis=1), kind="stable")
    return w.values[np.ix_(order, order)]


def aligned_cut_distance(w1: GraphonGrid, w2: GraphonGrid, restarts: int = 64) -> float:
    """Cut norm of the difference after sorting both by decreasing degree.

    An upper bound on the cut distance (no optimisation over relabellings).
    """
    if not math.isclose(w1.side, w2.side, rel_tol=1e-12):
        raise InvalidParameterError("graphons must share the same side length")
    k = math.lcm(w1.k, w2.k)
    v1 = np.kron(_canonical(w1), np.ones((k // w1.k, k // w1.k)))
    v2 = np.kron(_canonical(w2), np.ones((k // w2.k, k // w2.k)))
    d = GraphonGrid(v1 - v2, w1.side, signed=True)
    if k <= EXACT_MAX_K:
        return cut_norm_exact(d)
    return cut_norm_heuristic(d, restarts, seed=0)


# ---------------------------------------------------------------- file format

def write_grid(w: GraphonGrid, path) -> None:
    lines = [f"{w.k} {w.side!r}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in w.values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path) -> GraphonGrid:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    if len(head) != 2:
        raise InvalidParameterError("grid header must be 'k side'")
    k, side = int(head[0]), float(head[1])
    rows = [list(map(float, ln.split())) for ln in lines[1 : 1 + k]]
    vals = np.array(rows, dtype=float)
    if vals.shape != (k, k):
        raise InvalidParameterError(f"expected {k}x{k} values")
    return GraphonGrid(vals, side, signed=bool(np.any(vals < 0)))


def stretch_ratio(alpha: float, gamma: float, n: int) -> float:
    """Side of the L1 stretch over the side of the clique stretch.

    In unit coordinates the L1 stretch gives side ``n / sqrt(2 E|E_n|)`` and
    the clique stretch gives ``n / E K0``; the ratio grows like a square
    root of a logarithm.  Reported, not asserted.
    """
    from .stats import expected_edges

    a = scaling_a_n(alpha, gamma, n)
    return math.sqrt(2 * expected_edges(alpha, gamma, n, "exact")) / expected_clique_size(alpha, n, a)
