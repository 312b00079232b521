"""Explicit-graph engine: G(n,p) sampling, generation-based bootstrap
percolation, and an incremental cascade state machine.

The sampler walks the linearized upper-triangle pair index with geometric
skips, so the cost is O(n + m) rather than O(n^2).  Adjacency is CSR-style
(indptr/indices, neighbor lists sorted), which keeps the per-generation
bootstrap loop a handful of vectorized gathers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import derive_stream

_DEFAULT_MEM_CAP = 8 << 30  # bytes; gen_gnp refuses bigger graphs


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph in CSR form; neighbor lists sorted."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    edge_count: int

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]: self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])


def _pair_offsets(n: int) -> np.ndarray:
    """offsets[i] = linear index of pair (i, i+1); pairs ordered (0,1),
    (0,2), ..., (0,n-1), (1,2), ..."""
    i = np.arange(n, dtype=np.int64)
    return i * n - (i * (i + 1)) // 2


def _pairs_from_linear(k: np.ndarray, n: int, offsets: np.ndarray):
    i = np.searchsorted(offsets, k, side="right") - 1
    j = k - offsets[i] + i + 1
    return i, j


def _adjacency(n: int, eu: np.ndarray, ev: np.ndarray):
    u = np.concatenate([eu, ev])
    v = np.concatenate([ev, eu])
    order = np.lexsort((v, u))
    indices = v[order]
    deg = np.bincount(u, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    return indptr, indices


def from_edges(n: int, edges: np.ndarray) -> Graph:
    """Build a Graph from an (m, 2) array of unordered vertex pairs."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges):
        if edges.min() < 0 or edges.max() >= n:
            raise ValueError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loop in edge list")
    indptr, indices = _adjacency(n, edges[:, 0], edges[:, 1])
    return Graph(n=n, indptr=indptr, indices=indices, edge_count=len(edges))


def gen_gnp(n: int, p: float, seed: int, stream: int = 0,
            mem_cap: int = _DEFAULT_MEM_CAP) -> Graph:
    """Sample G(n, p): every unordered pair present independently w.p. p.

    Geometric skipping over the linearized pair index; expected time and
    memory O(n + m).  Raises before allocating if the expected footprint
    exceeds mem_cap bytes.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p outside [0,1]")
    total_pairs = n * (n - 1) // 2
    expected_edges = total_pairs * p
    # 2 int64 per directed entry plus CSR overhead, with sampling slack
    est_bytes = 40 * expected_edges + 16 * n
    if est_bytes > mem_cap:
        raise MemoryError(f"gen_gnp estimate {est_bytes / 1e9:.1f} GB exceeds "
                          f"cap {mem_cap / 1e9:.1f} GB")
    rng = derive_stream(seed, stream)
    if p == 0.0 or total_pairs == 0:
        return Graph(n=n, indptr=np.zeros(n + 1, dtype=np.int64),
                     indices=np.empty(0, dtype=np.int64), edge_count=0)
    offsets = _pair_offsets(n)
    if p == 1.0:
        k = np.arange(total_pairs, dtype=np.int64)
    else:
        chunks = []
        pos = -1
        batch = max(int(expected_edges * 1.1) + 16, 1024)
        while pos < total_pairs:
            gaps = rng.geometric(p, size=batch)
            ks = pos + np.cumsum(gaps)
            chunks.append(ks)
            pos = int(ks[-1])
        k = np.concatenate(chunks)
        k = k[k < total_pairs]
    eu, ev = _pairs_from_linear(k, n, offsets)
    indptr, indices = _adjacency(n, eu, ev)
    return Graph(n=n, indptr=indptr, indices=indices, edge_count=len(k))


def export_edges(graph: Graph) -> np.ndarray:
    """(m, 2) array of pairs (u, v) with u < v, ascending."""
    u = np.repeat(np.arange(graph.n, dtype=np.int64),
                  np.diff(graph.indptr))
    v = graph.indices
    keep = u < v
    return np.stack([u[keep], v[keep]], axis=1)


def _gather_neighbors(graph: Graph, frontier: np.ndarray) -> np.ndarray:
    """Concatenated neighbor lists of the frontier vertices (CSR row gather)."""
    starts = graph.indptr[frontier]
    lengths = graph.indptr[frontier + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=graph.indices.dtype)
    out_starts = np.zeros(len(frontier), dtype=np.int64)
    np.cumsum(lengths[:-1], out=out_starts[1:])
    idx = np.arange(total, dtype=np.int64)
    idx += np.repeat(starts - out_starts, lengths)
    return graph.indices[idx]


@dataclass
class BootstrapResult:
    final_active: np.ndarray  # bool mask
    final_size: int
    generation_sizes: tuple[int, ...]
    tau: int


def bootstrap(graph: Graph, initial, r: int) -> BootstrapResult:
    """Generation-based bootstrap percolation: an inactive vertex with >= r
    active neighbors activates; repeated until no vertex qualifies."""
    n = graph.n
    initial = np.asarray(initial, dtype=np.int64)
    if len(initial) and (initial.min() < 0 or initial.max() >= n):
        raise ValueError("initial vertex out of range")
    active = np.zeros(n, dtype=bool)
    active[initial] = True
    marks = np.zeros(n, dtype=np.int64)
    frontier = np.unique(initial)
    sizes = [len(frontier)]
    while len(frontier):
        nbrs = _gather_neighbors(graph, frontier)
        if len(nbrs) == 0:
            break
        marks += np.bincount(nbrs, minlength=n)
        frontier = np.nonzero((~active) & (marks >= r))[0]
        active[frontier] = True
        if len(frontier):
            sizes.append(len(frontier))
    tau = max((k for k, g in enumerate(sizes) if g > 0), default=0)
    return BootstrapResult(final_active=active, final_size=int(active.sum()),
                           generation_sizes=tuple(sizes), tau=tau)


class CascadeState:
    """Incremental cascade: activations, external infections, edge additions.

    marks[v] counts distinct active neighbors plus external infections, and
    is never decremented; any vertex reaching r marks activates, and every
    mutator runs the induced cascade to quiescence before returning.  The
    static adjacency (if any) is fixed at init; add_edge grows a dynamic
    overlay, so the edges model can start from the empty graph.
    """

    def __init__(self, n: int, r: int, graph: Graph | None = None):
        self.n = n
        self.r = r
        self.graph = graph
        self.dyn: list[list[int]] = [[] for _ in range(n)]
        self.marks = np.zeros(n, dtype=np.int64)
        self.active = np.zeros(n, dtype=bool)
        self.active_count = 0

    def _check(self, v: int):
        if not 0 <= v < self.n:
            raise ValueError(f"unknown vertex {v}")

    def _cascade(self, stack: list[int]):
        while stack:
            w = stack.pop()
            if self.graph is not None:
                nbrs = self.graph.neighbors(w)
                if len(nbrs):
                    self.marks[nbrs] += 1
                    newly = nbrs[(~self.active[nbrs]) & (self.marks[nbrs] >= self.r)]
                    for x in newly:
                        self.active[x] = True
                        self.active_count += 1
                        stack.append(int(x))
            for x in self.dyn[w]:
                self.marks[x] += 1
                if not self.active[x] and self.marks[x] >= self.r:
                    self.active[x] = True
                    self.active_count += 1
                    stack.append(x)

    def activate(self, v: int):
        """Externally activate v (no marks needed), then cascade."""
        self._check(v)
        if self.active[v]:
            return
        self.active[v] = True
        self.active_count += 1
        self._cascade([v])

    def external_infect(self, v: int):
        """One external infection: a single mark on v."""
        self._check(v)
        self.marks[v] += 1
        if not self.active[v] and self.marks[v] >= self.r:
            self.active[v] = True
            self.active_count += 1
            self._cascade([v])

    def add_edge(self, u: int, v: int):
        """Add edge (u, v); an active endpoint marks the other across it."""
        self._check(u)
        self._check(v)
        if u == v:
            raise ValueError("self-loop")
        self.dyn[u].append(v)
        self.dyn[v].append(u)
        stack: list[int] = []
        if self.active[u] and not self.active[v]:
            self.marks[v] += 1
            if self.marks[v] >= self.r:
                self.active[v] = True
                self.active_count += 1
                stack.append(v)
        elif self.active[v] and not self.active[u]:
            self.marks[u] += 1
            if self.marks[u] >= self.r:
                self.active[u] = True
                self.active_count += 1
                stack.append(u)
        if stack:
            self._cascade(stack)


def cascade_init(graph: Graph, r: int) -> CascadeState:
    """CascadeState over a static graph."""
    return CascadeState(graph.n, r, graph=graph)
