"""Sampling the core G(N, p) and an independent component oracle.

Edges are enumerated over the linear pair index ``j*(j-1)/2 + i`` (``i < j``),
so the graph induced by the first ``m`` vertices is exactly the prefix of the
edge list. Geometric skipping jumps from one present edge to the next, giving
O(n + m) expected sampling cost.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from poisson_er.errors import ParameterError
from poisson_er.stochastic_kernel import RandomStream, geometric_skip, geometric_skips, poisson_sample

# Below this expected edge count the scalar skip loop beats array set-up.
_SCALAR_EDGE_BUDGET = 48


@dataclass(frozen=True)
class ModelParams:
    """Parameters of G_Poi(alpha, p).

    ``c`` and ``lam`` are kept only as provenance for the parameterization used
    to derive ``p``; ``alpha`` and ``p`` are authoritative.
    """

    alpha: float
    p: float
    c: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ParameterError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not (0.0 <= self.p <= 1.0):
            raise ParameterError(f"p must lie in [0, 1], got {self.p!r}")

    @classmethod
    def supercritical(cls, n: float, c: float) -> "ModelParams":
        """alpha = n, p = c/n."""
        if n <= 0:
            raise ParameterError("n must be positive")
        return cls(alpha=float(n), p=c / n, c=c)

    @classmethod
    def critical(cls, n: float, lam: float) -> "ModelParams":
        """alpha = n, p = 1/n + lam/n^(4/3)."""
        if n <= 0:
            raise ParameterError("n must be positive")
        return cls(alpha=float(n), p=1.0 / n + lam / n ** (4.0 / 3.0), lam=lam)

    @classmethod
    def connectivity(cls, n: float, c: float) -> "ModelParams":
        """alpha = n, p = (log n + c)/n."""
        if n <= 1:
            raise ParameterError("n must exceed 1")
        return cls(alpha=float(n), p=(math.log(n) + c) / n, c=c)

    @property
    def n(self) -> int:
        return int(round(self.alpha))


class CoreGraph:
    """Undirected simple graph on vertices ``0..n_vertices-1``.

    Edges are stored as two int64 arrays ``u < v`` sorted by ``(v, u)``; the
    adjacency (``indptr``, ``indices``) is a CSR structure with sorted
    neighbour lists. Instances are treated as immutable.
    """

    __slots__ = ("n_vertices", "u", "v", "_csr")

    def __init__(self, n_vertices: int, u: np.ndarray, v: np.ndarray):
        self.n_vertices = int(n_vertices)
        self.u = u
        self.v = v
        self._csr = None

    def _adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        # Built on first use: connectivity checks only need the edge arrays.
        if self._csr is None:
            both_src = np.concatenate((self.u, self.v))
            both_dst = np.concatenate((self.v, self.u))
            order = np.argsort(both_src * max(self.n_vertices, 1) + both_dst, kind="stable")
            indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
            np.cumsum(np.bincount(both_src, minlength=self.n_vertices), out=indptr[1:])
            self._csr = (indptr, both_dst[order])
        return self._csr

    @property
    def indptr(self) -> np.ndarray:
        return self._adjacency()[0]

    @property
    def indices(self) -> np.ndarray:
        return self._adjacency()[1]

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[tuple[int, int]]) -> "CoreGraph":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ParameterError("self-loops are not allowed")
        if arr.size and (arr.min() < 0 or arr.max() >= n_vertices):
            raise ParameterError("edge endpoint out of range")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        key = hi * (hi - 1) // 2 + lo
        if np.unique(key).size != key.size:
            raise ParameterError("multi-edges are not allowed")
        order = np.argsort(key)
        return cls(n_vertices, lo[order], hi[order])

    @property
    def n_edges(self) -> int:
        return int(self.u.size)

    def neighbors(self, vertex: int) -> np.ndarray:
        return self.indices[self.indptr[vertex] : self.indptr[vertex + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.u.tolist(), self.v.tolist()))

    def induced_prefix(self, m: int) -> "CoreGraph":
        """Subgraph induced by vertices ``0..m-1``."""
        m = max(0, min(int(m), self.n_vertices))
        cut = int(np.searchsorted(self.v, m))
        return CoreGraph(m, self.u[:cut], self.v[:cut])

    def __eq__(self, other):
        if not isinstance(other, CoreGraph):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
        )

    def __repr__(self):
        return f"CoreGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class ComponentSummary:
    sizes: tuple[int, ...]  # descending
    largest: int
    count: int

    @property
    def connected(self) -> bool:
        return self.count <= 1


def _decode_pairs(pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    j = ((1.0 + np.sqrt(1.0 + 8.0 * pos)) * 0.5).astype(np.int64)
    # Float rounding can put j off by one either way; fix with exact integers.
    j -= (j * (j - 1)) >> 1 > pos
    j += ((j + 1) * j) >> 1 <= pos
    return pos - ((j * (j - 1)) >> 1), j


def edge_positions(stream: RandomStream, total: int, p: float) -> tuple[np.ndarray, int]:
    """Positions of successes among ``total`` Bernoulli(p) trials.

    Returns ``(positions, skips)`` where ``skips`` counts the geometric gaps
    consumed, including the final one that overshoots ``total``.
    """
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")
    if total <= 0 or p == 0.0:
        return np.empty(0, dtype=np.int64), 0
    expected = total * p
    if expected <= _SCALAR_EDGE_BUDGET:
        found = []
        pos = geometric_skip(stream, p) - 1
        skips = 1
        while pos < total:
            found.append(pos)
            pos += geometric_skip(stream, p)
            skips += 1
        return np.asarray(found, dtype=np.int64), skips
    batch = int(expected + 6.0 * math.sqrt(expected) + 16)
    pos = np.cumsum(geometric_skips(stream, p, batch)) - 1
    while pos[-1] < total:
        pos = np.concatenate((pos, pos[-1] + np.cumsum(geometric_skips(stream, p, batch))))
    kept = int(np.searchsorted(pos, total))
    return pos[:kept], kept + 1


def sample_fixed_core(stream: RandomStream, n: int, p: float, stats: dict | None = None) -> CoreGraph:
    """Sample G(n, p) by geometric skipping over the C(n, 2) pair index.

    If ``stats`` is given, ``stats["skips"]`` receives the number of geometric
    gaps drawn.
    """
    if n < 0:
        raise ParameterError(f"n must be non-negative, got {n!r}")
    pos, skips = edge_positions(stream, n * (n - 1) // 2, p)
    if stats is not None:
        stats["skips"] = skips
    u, v = _decode_pairs(pos)
    return CoreGraph(n, u, v)


def sample_poissonized_core(stream: RandomStream, params: ModelParams) -> CoreGraph:
    """Draw N ~ Poisson(alpha), then the core G(N, p). The stack is not built."""
    n = poisson_sample(stream, params.alpha)
    return sample_fixed_core(stream, n, params.p)


def _hook_and_compress(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Union-find in array form: label every vertex by the smallest index in its component.

    Each round hooks the larger of the two endpoint labels onto the smaller
    (labels only ever decrease, so ``labels[x] <= x`` and no cycles form),
    then compresses every pointer chain to its root.
    """
    labels = np.arange(n, dtype=np.int64)
    while u.size:
        lu, lv = labels[u], labels[v]
        live = lu != lv
        if not live.any():
            break
        lu, lv = lu[live], lv[live]
        u, v = u[live], v[live]
        np.minimum.at(labels, np.maximum(lu, lv), np.minimum(lu, lv))
        while True:
            nxt = labels[labels]
            if np.array_equal(nxt, labels):
                break
            labels = nxt
    return labels


def prefix_component_labels(graph: CoreGraph, cuts: Sequence[int]) -> list[np.ndarray]:
    """Component labels of the subgraphs induced by ``0..m-1`` for each ``m`` in ``cuts``.

    Edges are stored by larger endpoint, so each induced subgraph is an edge
    prefix. Labels are the smallest vertex index of each component.
    """
    if any(m < 0 or m > graph.n_vertices for m in cuts):
        raise ParameterError("cuts must lie within the vertex range")
    out = []
    for m in cuts:
        stop = int(np.searchsorted(graph.v, m))
        out.append(_hook_and_compress(int(m), graph.u[:stop], graph.v[:stop]))
    return out


def component_labels(graph: CoreGraph) -> np.ndarray:
    """Root label of every vertex's component (int64 array)."""
    return prefix_component_labels(graph, [graph.n_vertices])[0]


def components_oracle(graph: CoreGraph) -> ComponentSummary:
    """Exact component sizes by union-find."""
    if graph.n_vertices == 0:
        return ComponentSummary(sizes=(), largest=0, count=0)
    counts = np.bincount(component_labels(graph))
    sizes = np.sort(counts[counts > 0])[::-1]
    return ComponentSummary(sizes=tuple(sizes.tolist()), largest=int(sizes[0]), count=int(sizes.size))


def is_connected(graph: CoreGraph) -> bool:
    """Graphs with 0 or 1 vertices count as connected."""
    if graph.n_vertices <= 1:
        return True
    if graph.n_edges < graph.n_vertices - 1:
        return False
    return components_oracle(graph).count <= 1


def size_multiset(sizes: Iterable[int]) -> Counter:
    return Counter(int(s) for s in sizes)


def format_edge_list(graph: CoreGraph) -> str:
    lines = [f"n {graph.n_vertices}"]
    lines.extend(f"{a} {b}" for a, b in graph.edges())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> CoreGraph:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("n "):
        raise ParameterError("edge list must start with a header line 'n <N>'")
    n = int(lines[0].split()[1])
    edges = []
    for line in lines[1:]:
        a, b = line.split()
        edges.append((int(a), int(b)))
    return CoreGraph.from_edges(n, edges)


def write_edge_list(graph: CoreGraph, fp: TextIO) -> None:
    fp.write(format_edge_list(graph))


def read_edge_list(fp: TextIO) -> CoreGraph:
    return parse_edge_list(fp.read())
