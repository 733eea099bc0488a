"""The hard-threshold graph ``i ~ j  iff  X_i * X_j > a`` and its K-vector."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dist import WeightedSample
from .errors import InvalidParameterError, SizeError

BRUTE_FORCE_MAX_N = 10_000


def _as_values(sample) -> np.ndarray:
    if isinstance(sample, WeightedSample):
        return sample.values
    return WeightedSample(np.asarray(sample, dtype=float)).values


@dataclass(frozen=True, eq=False)
class HardGraph:
    """Non-isolated vertices and edges of a graph on ``n_original`` labels.

    ``edges`` is an ``(m, 2)`` array of 0-based original indices with
    ``i < j``, sorted lexicographically.  ``values`` keeps the weights the
    graph was built from when there are any.
    """

    vertices: np.ndarray
    edges: np.ndarray
    n_original: int
    values: np.ndarray | None = None

    @classmethod
    def from_edges(cls, edges, n_original: int, values=None) -> "HardGraph":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            e = np.sort(e, axis=1)
            if np.any(e[:, 0] == e[:, 1]):
                raise InvalidParameterError("self-loops are not allowed")
            e = np.unique(e, axis=0)
        verts = np.unique(e) if e.size else np.empty(0, dtype=np.int64)
        return cls(verts, e, int(n_original), values)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.size)

    def degrees(self) -> np.ndarray:
        """Degree of every original label (isolated ones included)."""
        return np.bincount(self.edges.ravel(), minlength=self.n_original)

    def neighbor_sets(self) -> dict[int, set[int]]:
        nb: dict[int, set[int]] = {int(v): set() for v in self.vertices}
        for i, j in self.edges:
            nb[int(i)].add(int(j))
            nb[int(j)].add(int(i))
        return nb

    def adjacency(self):
        from scipy import sparse

        n = self.n_original
        e = self.edges
        data = np.ones(2 * len(e))
        return sparse.csr_matrix(
            (data, (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n)
        )

    def __eq__(self, other):
        return (
            isinstance(other, HardGraph)
            and self.n_original == other.n_original
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.edges, other.edges)
        )

    def __repr__(self):
        return f"HardGraph(n_original={self.n_original}, vertices={self.n_vertices}, edges={self.n_edges})"


def _first_exceeding(sorted_asc: np.ndarray, x: np.ndarray, a: float) -> np.ndarray:
    """For each x, the first index p with ``sorted_asc[p] * x > a``.

    Binary search on ``a / x`` and then a fix-up against the products
    themselves, so the answer agrees exactly with the strict product test.
    """
    x = np.asarray(x, dtype=float)
    n = sorted_asc.size
    lo = np.searchsorted(sorted_asc, a / x, side="right")
    while True:
        down = (lo > 0) & (sorted_asc[np.maximum(lo - 1, 0)] * x > a)
        up = (lo < n) & (sorted_asc[np.minimum(lo, n - 1)] * x <= a)
        if not (down.any() or up.any()):
            return lo
        lo = lo - down + up


def hard_edge_count(sample, a_n: float) -> int:
    """Number of hard edges, O(n log n) and without materializing them."""
    v = np.sort(_as_values(sample))
    n = v.size
    lo = _first_exceeding(v, v, a_n)
    start = np.maximum(lo, np.arange(n) + 1)
    return int(np.sum(np.maximum(n - start, 0)))


def nonisolated_count(sample, a_n: float) -> int:
    """Number of non-isolated vertices via the two largest weights."""
    v = _as_values(sample)
    if v.size < 2:
        return 0
    top2 = np.partition(v, v.size - 2)[-2:]
    m2, m1 = top2[0], top2[1]
    best = np.full(v.size, m1)
    best[int(np.argmax(v))] = m2
    return int(np.count_nonzero(v * best > a_n))


def build_hard_graph(sample, a_n: float) -> HardGraph:
    """Graph with an edge for every pair whose weight product exceeds ``a_n``."""
    values = _as_values(sample)
    if a_n < 1:
        raise InvalidParameterError("a_n must be >= 1")
    n = values.size
    order = np.argsort(values, kind="stable")
    s = values[order]
    lo = _first_exceeding(s, s, a_n)
    start = np.maximum(lo, np.arange(n) + 1)
    counts = np.maximum(n - start, 0)
    m = int(counts.sum())
    if m == 0:
        return HardGraph(np.empty(0, dtype=np.int64), np.empty((0, 2), dtype=np.int64), n, values)
    p = np.repeat(np.arange(n), counts)
    offs = np.arange(m) - np.repeat(np.cumsum(counts) - counts, counts)
    q = np.repeat(start, counts) + offs
    i, j = order[p], order[q]
    e = np.column_stack([np.minimum(i, j), np.maximum(i, j)]).astype(np.int64)
    e = e[np.lexsort((e[:, 1], e[:, 0]))]
    return HardGraph(np.unique(e), e, n, values)


def brute_force_graph(sample, a_n: float) -> HardGraph:
    """O(n^2) reference construction."""
    values = _as_values(sample)
    n = values.size
    if n > BRUTE_FORCE_MAX_N:
        raise SizeError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    prod = np.multiply.outer(values, values)
    i, j = np.nonzero(np.triu(prod > a_n, k=1))
    e = np.column_stack([i, j]).astype(np.int64)
    verts = np.unique(e) if e.size else np.empty(0, dtype=np.int64)
    return HardGraph(verts, e, n, values)


@dataclass(frozen=True)
class KVector:
    """Clique size ``k0`` and follower group sizes ``(K_1, ..., K_k0)``.

    Group ``j`` followers attach to the ``k0 + 1 - j`` heaviest clique
    vertices.
    """

    k0: int
    followers: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "followers", tuple(int(f) for f in self.followers))
        if self.k0 < 0 or len(self.followers) != self.k0 or any(f < 0 for f in self.followers):
            raise InvalidParameterError(f"invalid KVector ({self.k0}; {self.followers})")

    @property
    def vertex_count(self) -> int:
        return self.k0 + sum(self.followers)

    @property
    def edge_count(self) -> int:
        return edge_count(self)

    def __str__(self):
        return format_kvector(self)


def k_vector(sample, a_n: float) -> KVector:
    values = _as_values(sample)
    if a_n < 1:
        raise InvalidParameterError("a_n must be >= 1")
    root = math.sqrt(a_n)
    is_clique = values > root
    k0 = int(is_clique.sum())
    if k0 == 0:
        return KVector(0, ())
    clique = np.sort(values[is_clique])
    followers = values[~is_clique]
    # each follower's number of clique neighbours d fixes its group k0 + 1 - d
    d = k0 - _first_exceeding(clique, followers, a_n)
    groups = np.bincount(k0 + 1 - d[d > 0], minlength=k0 + 1)[1:]
    return KVector(k0, tuple(int(g) for g in groups))


def edge_count(kv: KVector) -> int:
    k0 = kv.k0
    return k0 * (k0 - 1) // 2 + sum((k0 + 1 - j) * kj for j, kj in enumerate(kv.followers, start=1))


def assemble_from_kvector(kv: KVector) -> HardGraph:
    """Canonical graph: clique on labels ``0..k0-1``, then followers group by group."""
    k0 = kv.k0
    edges = [(i, j) for i in range(k0) for j in range(i + 1, k0)]
    label = k0
    for j, kj in enumerate(kv.followers, start=1):
        for _ in range(kj):
            edges.extend((c, label) for c in range(k0 + 1 - j))
            label += 1
    return HardGraph.from_edges(edges, label)


def is_threshold_graph(g: HardGraph) -> bool:
    """Nested-neighbourhood check, ordering vertices by weight (or degree)."""
    nb = g.neighbor_sets()
    verts = list(nb)
    if g.values is not None:
        verts.sort(key=lambda v: -g.values[v])
    else:
        verts.sort(key=lambda v: -len(nb[v]))
    for u, v in zip(verts, verts[1:]):
        if not (nb[v] - {u}) <= (nb[u] - {v}):
            return False
    return True


def format_kvector(kv: KVector) -> str:
    return " ".join(str(x) for x in (kv.k0, *kv.followers))


def parse_kvector(line: str) -> KVector:
    parts = [int(t) for t in line.split()]
    if not parts:
        raise InvalidParameterError("empty KVector line")
    return KVector(parts[0], tuple(parts[1:]))


def write_edge_list(g: HardGraph, path) -> None:
    lines = [f"{g.n_original} {g.n_edges}"] + [f"{i} {j}" for i, j in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> HardGraph:
    rows = Path(path).read_text().split("\n")
    n, m = (int(t) for t in rows[0].split())
    pairs = [tuple(int(t) for t in r.split()) for r in rows[1:] if r.strip()]
    if len(pairs) != m:
        raise InvalidParameterError(f"header says {m} edges, found {len(pairs)}")
    if any(not (0 <= i < n and 0 <= j < n) for i, j in pairs):
        raise InvalidParameterError("edge index out of range")
    return HardGraph.from_edges(pairs, n)
