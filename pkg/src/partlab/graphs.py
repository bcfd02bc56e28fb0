"""Graph representation, validation, generators, and edge-list serialization.

The graph model throughout is a sparse symmetric weighted graph in which
every vertex has weighted degree exactly one.  Vertices are dense 0-indexed
integers; edge weights live in (0, 1]; the lazy-walk self-loop is implicit
in the walk operator and never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GraphFormatError, GraphValidationError

DEGREE_TOL = 1e-9


@dataclass(frozen=True)
class VertexSet:
    """A nonempty subset of vertices, stored as a sorted index tuple."""

    members: tuple[int, ...]

    def __post_init__(self):
        if len(self.members) == 0:
            raise ValueError("VertexSet must be nonempty")
        ms = tuple(sorted(int(v) for v in self.members))
        if len(set(ms)) != len(ms):
            raise ValueError("VertexSet members must be distinct")
        object.__setattr__(self, "members", ms)

    @property
    def size(self) -> int:
        return len(self.members)

    def validate_for(self, n: int) -> None:
        if self.members[0] < 0 or self.members[-1] >= n:
            raise ValueError(f"vertex index out of range [0, {n})")
        if self.size > n:
            raise ValueError("set larger than the vertex count")

    def indicator(self, n: int) -> np.ndarray:
        x = np.zeros(n)
        x[list(self.members)] = 1.0
        return x

    @staticmethod
    def from_iterable(vs) -> "VertexSet":
        return VertexSet(tuple(int(v) for v in vs))


class WeightedGraph:
    """Symmetric weighted graph with unit weighted degree, in CSR form.

    Both directions of every edge are stored with bit-identical weights.
    Instances are immutable after construction and safe for concurrent reads.
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray,
                 weights: np.ndarray, labels: np.ndarray | None = None,
                 validate: bool = True):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.labels = labels          # original external labels, if remapped
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.weights.setflags(write=False)
        if validate:
            self.validate()

    # ---- construction -------------------------------------------------

    @staticmethod
    def from_edges(n: int, edges, labels: np.ndarray | None = None,
                   validate: bool = True) -> "WeightedGraph":
        """Build from an iterable of (u, v, w) with u != v; both directions stored."""
        us, vs, ws = [], [], []
        for u, v, w in edges:
            us.append(u); vs.append(v); ws.append(w)
        u = np.asarray(us, dtype=np.int64)
        v = np.asarray(vs, dtype=np.int64)
        w = np.asarray(ws, dtype=np.float64)
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        wt = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, wt = src[order], dst[order], wt[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        return WeightedGraph(n, indptr, dst, wt, labels=labels, validate=validate)

    # ---- validation ---------------------------------------------------

    def validate(self) -> None:
        n = self.n
        if n < 1:
            raise GraphValidationError("graph needs at least one vertex")
        if np.any(self.indices < 0) or np.any(self.indices >= n):
            raise GraphValidationError("neighbor index out of range")
        rows = np.repeat(np.arange(n), np.diff(self.indptr))
        if np.any(rows == self.indices):
            raise GraphValidationError("explicit self-loops are not allowed")
        if np.any(self.weights <= 0):
            raise GraphValidationError("all edge weights must be strictly positive")
        if np.any(self.weights > 1 + DEGREE_TOL):
            raise GraphValidationError("edge weight exceeds 1")
        deg = self.degrees()
        bad = np.flatnonzero(np.abs(deg - 1.0) > DEGREE_TOL)
        if bad.size:
            raise GraphValidationError(
                f"weighted degree of vertex {bad[0]} is {deg[bad[0]]!r}, not 1"
            )
        # symmetry, bit-exact: sorted (u, v, w) triples must equal (v, u, w)
        fwd = np.lexsort((self.indices, rows))
        rev = np.lexsort((rows, self.indices))
        if not (np.array_equal(rows[fwd], self.indices[rev])
                and np.array_equal(self.indices[fwd], rows[rev])
                and np.array_equal(self.weights[fwd], self.weights[rev])):
            raise GraphValidationError("adjacency is not bit-identically symmetric")

    # ---- queries ------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def degrees(self) -> np.ndarray:
        return np.add.reduceat(self.weights, self.indptr[:-1]) \
            if len(self.weights) else np.zeros(self.n)

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def max_neighbors(self) -> int:
        """Largest neighbor count; the 'd' of the local-work budgets."""
        return int(np.diff(self.indptr).max(initial=0))

    def uniform_weight(self) -> float | None:
        """The common edge weight if every stored weight is bit-identical, else None."""
        if len(self.weights) == 0:
            return None
        w0 = self.weights[0]
        return float(w0) if np.all(self.weights == w0) else None

    def adjacency_matvec(self, x: np.ndarray) -> np.ndarray:
        """A @ x for the weighted adjacency A (unit row sums)."""
        if x.shape != (self.n,):
            raise ValueError(f"vector has shape {x.shape}, expected ({self.n},)")
        prod = self.weights * x[self.indices]
        return np.add.reduceat(prod, self.indptr[:-1]) \
            if len(prod) else np.zeros(self.n)

    def to_dense_adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        A[rows, self.indices] = self.weights
        return A

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edges as (u, v, w) with u < v, sorted."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = rows < self.indices
        out = list(zip(rows[keep].tolist(), self.indices[keep].tolist(),
                       self.weights[keep].tolist()))
        out.sort()
        return out

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, edges={self.num_edges})"


# ---- generators --------------------------------------------------------


def gen_cycle(n: int) -> WeightedGraph:
    """Cycle on n >= 3 vertices, every edge weight 1/2."""
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    edges = [(i, (i + 1) % n, 0.5) for i in range(n)]
    return WeightedGraph.from_edges(n, edges)


def gen_complete(n: int) -> WeightedGraph:
    """Complete graph on n >= 2 vertices, every edge weight 1/(n-1)."""
    if n < 2:
        raise ValueError(f"complete graph needs n >= 2, got {n}")
    w = 1.0 / (n - 1)
    edges = [(i, j, w) for i in range(n) for j in range(i + 1, n)]
    return WeightedGraph.from_edges(n, edges)


def gen_hypercube(d: int) -> WeightedGraph:
    """d-dimensional hypercube: 2^d vertices, Hamming-1 edges of weight 1/d."""
    if not 1 <= d <= 20:
        raise ValueError(f"hypercube dimension must be in [1, 20], got {d}")
    n = 1 << d
    w = 1.0 / d
    edges = [(i, i ^ (1 << b), w) for i in range(n) for b in range(d)
             if i < (i ^ (1 << b))]
    return WeightedGraph.from_edges(n, edges)


def gen_dumbbell(m: int) -> WeightedGraph:
    """Two m-cliques joined by one bridge edge, weighted to unit degrees.

    Bridge weight is 1/m on the two endpoint vertices (vertex 0 and vertex m).
    Clique edges incident to an endpoint carry 1/m; the remaining clique edges
    carry (m-1)/(m(m-2)).  These choices make every weighted degree exactly 1
    in closed form.
    """
    if m < 3:
        raise ValueError(f"dumbbell needs clique size m >= 3, got {m}")
    beta = 1.0 / m
    v_end = (1.0 - beta) / (m - 1)            # endpoint--clique edges
    u_mid = (1.0 - v_end) / (m - 2)           # interior clique edges
    edges = []
    for base, endpoint in ((0, 0), (m, m)):
        verts = range(base, base + m)
        for i in verts:
            for j in verts:
                if i >= j:
                    continue
                w = v_end if (i == endpoint or j == endpoint) else u_mid
                edges.append((i, j, w))
    edges.append((0, m, beta))
    return WeightedGraph.from_edges(2 * m, edges)


def gen_planted_partition(k: int, m: int, p_in: float, seed: int) -> WeightedGraph:
    """Planted k-partition with parts of size m.

    Every intra-part pair receives weight proportional to p_in and every
    inter-part pair proportional to (1 - p_in), modulated by uniform random
    factors, then a symmetric Sinkhorn pass normalizes all weighted degrees
    to one.  Deterministic given the seed; re-runs are bit-identical.
    """
    if k < 2:
        raise ValueError(f"need k >= 2 parts, got {k}")
    if m < 2:
        raise ValueError(f"need part size m >= 2, got {m}")
    if not 0.0 < p_in < 1.0:
        raise ValueError(f"p_in must be in (0, 1), got {p_in}")
    n = k * m
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.5, 1.5, size=(n, n))
    noise = np.triu(noise, 1)
    noise = noise + noise.T
    part = np.repeat(np.arange(k), m)
    same = part[:, None] == part[None, :]
    w = np.where(same, p_in / max(m - 1, 1), (1.0 - p_in) / ((k - 1) * m)) * noise
    np.fill_diagonal(w, 0.0)
    # symmetric Sinkhorn: scaling by outer(s, s) keeps w bit-symmetric
    for _ in range(500):
        deg = w.sum(axis=1)
        if np.max(np.abs(deg - 1.0)) <= 1e-13:
            break
        s = 1.0 / np.sqrt(deg)
        w = w * np.outer(s, s)
    iu, ju = np.triu_indices(n, 1)
    edges = list(zip(iu.tolist(), ju.tolist(), w[iu, ju].tolist()))
    return WeightedGraph.from_edges(n, edges)


def planted_part(k: int, m: int, index: int = 0) -> VertexSet:
    """The vertex set of one planted part, matching gen_planted_partition's layout."""
    if not 0 <= index < k:
        raise ValueError("part index out of range")
    return VertexSet(tuple(range(index * m, (index + 1) * m)))


GENERATORS = {
    "cycle": gen_cycle,
    "complete": gen_complete,
    "hypercube": gen_hypercube,
    "dumbbell": gen_dumbbell,
    "planted": gen_planted_partition,
}


# ---- edge-list serialization -------------------------------------------


def save_graph(graph: WeightedGraph, path: str | Path) -> None:
    """Write the edge-list format: header "n m", then "u v w" with u < v.

    Weights are emitted with 17 significant digits so that a save/load round
    trip reproduces the graph bit-exactly.
    """
    lines = [f"{graph.n} {graph.num_edges}"]
    for u, v, w in graph.edges():
        lines.append(f"{u} {v} {w:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(path: str | Path, normalize: bool = False) -> WeightedGraph:
    """Parse an edge-list file; optionally normalize degrees to one.

    Vertex labels in the file may be arbitrary integers; they are remapped to
    dense 0-indexed vertices (ascending label order) and the original labels
    are kept on the returned graph.  With normalize=False the unit-degree
    invariant is asserted; with normalize=True each vertex's incident weights
    are divided by its weighted degree and the result is symmetrized by
    averaging the two directed copies.
    """
    text = Path(path).read_text()
    rows: list[tuple[int, int, float]] = []
    header: tuple[int, int] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: expected header 'n m'")
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: bad header: {exc}") from None
            continue
        if len(parts) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'u v w'")
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise GraphFormatError(f"line {lineno}: {exc}") from None
        if not u < v:
            raise GraphFormatError(f"line {lineno}: edges must satisfy u < v")
        if not math.isfinite(w):
            raise GraphFormatError(f"line {lineno}: non-finite weight")
        rows.append((u, v, w))
    if header is None:
        raise GraphFormatError("empty file: missing 'n m' header")
    n, m = header
    if len(rows) != m:
        raise GraphFormatError(f"header declares {m} edges, file has {len(rows)}")
    labels = np.unique(np.array([[u, v] for u, v, _ in rows], dtype=np.int64))
    if len(labels) > n:
        raise GraphFormatError(f"{len(labels)} distinct labels exceed declared n={n}")
    if labels.size and (labels[0] < 0 or labels[-1] >= n):
        remap = {int(lab): i for i, lab in enumerate(labels)}
        rows = [(remap[u], remap[v], w) for u, v, w in rows]
        kept_labels = labels
        n = len(labels)
    else:
        kept_labels = None
    for u, v, w in rows:
        if w <= 0:
            raise GraphValidationError(f"edge ({u},{v}) has nonpositive weight {w}")
    if normalize:
        acc = np.zeros((n, n))
        for u, v, w in rows:
            acc[u, v] += w
            acc[v, u] += w
        if np.any(acc.sum(axis=1) <= 0):
            raise GraphValidationError("isolated vertex cannot be normalized")
        # divide-by-degree + symmetrize by averaging, iterated to its fixpoint
        for _ in range(5000):
            deg = acc.sum(axis=1)
            if np.max(np.abs(deg - 1.0)) <= 1e-13:
                break
            acc = acc / deg[:, None]
            acc = 0.5 * (acc + acc.T)
        else:
            raise GraphValidationError("degree normalization did not converge")
        iu, ju = np.nonzero(np.triu(acc, 1))
        rows = list(zip(iu.tolist(), ju.tolist(), acc[iu, ju].tolist()))
    return WeightedGraph.from_edges(n, rows, labels=kept_labels)
