"""Exact expansion quantities: boundary weight, edge expansion, robust vertex
expansion, graph-level minima by exhaustive enumeration, and incremental
sweep profiles over vertex orderings.

Conventions: every graph has unit weighted degrees, so 0 <= phi(S) <= 1 and
boundary weights never exceed |S|.  Brute-force enumerators are exact and
intended for small instances only (subset bitmasks, vectorized in chunks).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .graphs import VertexSet, WeightedGraph

_REL_TOL = 1e-12


@dataclass(frozen=True)
class ExpansionStats:
    """Expansion quantities of a single vertex set.

    phi = boundary_weight / |S|; phi_v = n_half / |S| (None when not computed);
    psi = phi * phi_v.
    """

    set: VertexSet
    boundary_weight: float
    phi: float
    n_half: int | None = None
    phi_v: float | None = None
    psi: float | None = None

    def to_dict(self) -> dict:
        return {
            "set": list(self.set.members),
            "size": self.set.size,
            "boundary_weight": self.boundary_weight,
            "phi": self.phi,
            "n_half": self.n_half,
            "phi_v": self.phi_v,
            "psi": self.psi,
        }


def _check_proper(graph: WeightedGraph, S: VertexSet) -> None:
    S.validate_for(graph.n)
    if S.size >= graph.n:
        raise PreconditionError("set must be a proper subset of the vertices")


def boundary_weight(graph: WeightedGraph, S: VertexSet) -> float:
    """Total weight of edges with exactly one endpoint in S."""
    _check_proper(graph, S)
    x = S.indicator(graph.n)
    ax = graph.adjacency_matvec(x)
    # sum of degrees in S minus twice the internal weight
    return float(S.size - x @ ax)


def edge_expansion(graph: WeightedGraph, S: VertexSet) -> float:
    """phi(S) = w(S, complement) / |S|."""
    return boundary_weight(graph, S) / S.size


def robust_vertex_expansion(graph: WeightedGraph, S: VertexSet,
                            rho: float = 0.5) -> tuple[int, float]:
    """N_rho(S) and phi_v(S) = N_rho(S) / |S|.

    N_rho(S) is the fewest outside vertices that collectively carry a rho
    fraction of S's boundary weight.  Sorting outside vertices by their
    carried weight (descending, ties by index) and taking the shortest
    sufficient prefix is exact for this objective.
    """
    if not 0.0 < rho < 1.0:
        raise PreconditionError(f"rho must be in (0, 1), got {rho}")
    _check_proper(graph, S)
    x = S.indicator(graph.n)
    contrib = graph.adjacency_matvec(x)
    contrib[list(S.members)] = 0.0
    bw = float(S.size - x @ graph.adjacency_matvec(x))
    if bw <= _REL_TOL:
        return 0, 0.0
    order = np.lexsort((np.arange(graph.n), -contrib))
    csum = np.cumsum(contrib[order])
    target = rho * bw - _REL_TOL * max(1.0, bw)
    n_half = int(np.argmax(csum >= target)) + 1
    return n_half, n_half / S.size


def set_stats(graph: WeightedGraph, S: VertexSet,
              with_phi_v: bool = True, rho: float = 0.5) -> ExpansionStats:
    """All expansion quantities of S in one call."""
    bw = boundary_weight(graph, S)
    phi = bw / S.size
    if not with_phi_v:
        return ExpansionStats(S, bw, phi)
    n_half, phi_v = robust_vertex_expansion(graph, S, rho=rho)
    return ExpansionStats(S, bw, phi, n_half, phi_v, phi * phi_v)


# ---- exhaustive enumeration over subsets --------------------------------

_CHUNK = 1 << 15


def _mask_members(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def _chunks_of_masks(n: int, dense_a: np.ndarray):
    """Yield (masks, X, sizes, boundary) for all masks 1..2^n-1 in chunks."""
    total = 1 << n
    bits = np.arange(n, dtype=np.uint64)
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        masks = np.arange(start, stop, dtype=np.uint64)
        if start == 0:
            masks = masks[1:]
        X = ((masks[:, None] >> bits[None, :]) & 1).astype(np.float64)
        sizes = X.sum(axis=1)
        XA = X @ dense_a
        boundary = sizes - np.einsum("ij,ij->i", XA, X)
        yield masks, X, XA, sizes, boundary


def _phi_for_all_masks(dense_a: np.ndarray) -> np.ndarray:
    """phi of every nonempty mask (index = bitmask); entry 0 is +inf."""
    n = dense_a.shape[0]
    phi = np.full(1 << n, np.inf)
    for masks, _X, _XA, sizes, bw in _chunks_of_masks(n, dense_a):
        phi[masks] = np.maximum(bw, 0.0) / sizes
    return phi


def _n_half_rows(XA: np.ndarray, X: np.ndarray, boundary: np.ndarray,
                 rho: float) -> np.ndarray:
    contrib = XA * (1.0 - X)
    srt = -np.sort(-contrib, axis=1)
    csum = np.cumsum(srt, axis=1)
    target = rho * boundary - _REL_TOL * np.maximum(1.0, boundary)
    counts = np.argmax(csum >= target[:, None], axis=1) + 1
    counts[boundary <= _REL_TOL] = 0
    return counts


def _lex_smallest(masks: list[int], n: int) -> int:
    return min(masks, key=lambda m: _mask_members(m, n))


def graph_expansion_bruteforce(graph: WeightedGraph, mode: str = "phi",
                               max_size: int | None = None,
                               rho: float = 0.5) -> tuple[float, VertexSet]:
    """Exact phi(G), phi_v(G) or psi(G) with a minimizing witness.

    Enumerates every subset with 1 <= |S| <= min(max_size, n // 2); among
    ties, returns the lexicographically smallest witness.
    """
    n = graph.n
    if n > 24:
        raise PreconditionError(f"exhaustive search capped at n <= 24, got {n}")
    if mode not in ("phi", "phi_v", "psi"):
        raise PreconditionError(f"unknown mode {mode!r}")
    cap = n // 2 if max_size is None else min(max_size, n // 2)
    if cap < 1:
        raise PreconditionError("no eligible set sizes")
    dense = graph.to_dense_adjacency()
    best = np.inf
    cands: list[int] = []
    for masks, X, XA, sizes, bw in _chunks_of_masks(n, dense):
        ok = sizes <= cap
        if not ok.any():
            continue
        if mode == "phi":
            vals = np.where(ok, np.maximum(bw, 0.0) / sizes, np.inf)
        else:
            counts = _n_half_rows(XA, X, bw, rho)
            phiv = counts / sizes
            if mode == "phi_v":
                vals = np.where(ok, phiv, np.inf)
            else:
                vals = np.where(ok, phiv * np.maximum(bw, 0.0) / sizes, np.inf)
        lo = vals.min()
        if not np.isfinite(lo):
            continue
        if lo < best:
            best = lo
            cands = []
        tol = _REL_TOL * max(1.0, abs(best))
        cands.extend(int(m) for m in masks[vals <= best + tol])
    witness = _lex_smallest(cands, n)
    return float(best), VertexSet(_mask_members(witness, n))


def small_set_expansion_bruteforce(graph: WeightedGraph,
                                   delta: float) -> tuple[float, VertexSet]:
    """Exact expansion-profile value phi_delta(G) with witness."""
    if not 0.0 < delta <= 0.5:
        raise PreconditionError(f"delta must be in (0, 1/2], got {delta}")
    cap = int(np.floor(delta * graph.n + 1e-12))
    if cap < 1:
        raise PreconditionError(f"delta*n < 1: no eligible set")
    return graph_expansion_bruteforce(graph, mode="phi", max_size=cap)


# ---- k-way expansion via threshold search + subset convolution ----------


def _ranked_transform(F: np.ndarray, n: int, sign: int) -> None:
    """In-place zeta (sign=+1) or Moebius (sign=-1) transform per rank slice."""
    R, N = F.shape
    for i in range(n):
        view = F.reshape(R, N >> (i + 1), 2, 1 << i)
        if sign > 0:
            view[:, :, 1, :] += view[:, :, 0, :]
        else:
            view[:, :, 1, :] -= view[:, :, 0, :]


def _subset_convolve_bool(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """exists T subset mask with a[T] and b[mask \\ T], via ranked convolution."""
    N = 1 << n
    pc = _popcounts(n)
    idx = np.arange(N)
    Fa = np.zeros((n + 1, N), dtype=np.int64)
    Fb = np.zeros((n + 1, N), dtype=np.int64)
    Fa[pc, idx] = a.astype(np.int64)
    Fb[pc, idx] = b.astype(np.int64)
    _ranked_transform(Fa, n, +1)
    _ranked_transform(Fb, n, +1)
    H = np.zeros((n + 1, N), dtype=np.int64)
    for r in range(n + 1):
        acc = np.zeros(N, dtype=np.int64)
        for i in range(r + 1):
            acc += Fa[i] * Fb[r - i]
        H[r] = acc
    _ranked_transform(H, n, -1)
    return H[pc, idx] > 0


def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.uint64)
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc += ((masks >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
    return pc


def _subset_or_closure(a: np.ndarray, n: int) -> np.ndarray:
    """u[mask] = OR of a over all submasks of mask."""
    u = a.copy()
    N = 1 << n
    for i in range(n):
        view = u.reshape(N >> (i + 1), 2, 1 << i)
        view[:, 1, :] |= view[:, 0, :]
    return u


def k_way_expansion_bruteforce(graph: WeightedGraph,
                               k: int) -> tuple[float, list[VertexSet]]:
    """Exact phi_k(G) with a witnessing family of k disjoint sets.

    Searches the sorted distinct phi values for the smallest threshold at
    which k pairwise-disjoint admissible sets exist; existence is decided by
    boolean subset convolutions over the mask lattice, which is exact.
    """
    n = graph.n
    if k < 2:
        raise PreconditionError(f"need k >= 2, got {k}")
    if k > n:
        raise PreconditionError(f"cannot pack {k} disjoint nonempty sets into {n} vertices")
    if (k <= 3 and n > 14) or (k >= 4 and n > 12):
        raise PreconditionError(
            f"instance too large for exhaustive k-way search (n={n}, k={k})")
    dense = graph.to_dense_adjacency()
    phi = _phi_for_all_masks(dense)
    full = (1 << n) - 1
    phi[full] = np.inf            # the full set leaves no room for k >= 2
    values = np.unique(phi[np.isfinite(phi)])

    def feasible(theta: float) -> list[np.ndarray] | None:
        a = np.isfinite(phi) & (phi <= theta)
        a[0] = False
        levels = [_subset_or_closure(a, n)]
        for _ in range(k - 1):
            levels.append(_subset_convolve_bool(a, levels[-1], n))
        return levels if levels[-1][full] else None

    lo, hi = 0, len(values) - 1
    if feasible(values[hi]) is None:
        raise PreconditionError("graph admits no family of k disjoint sets")
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(values[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    theta = float(values[lo])
    levels = feasible(theta)
    assert levels is not None

    a = np.isfinite(phi) & (phi <= theta)
    a[0] = False
    remaining = full
    family: list[int] = []
    for depth in range(k, 0, -1):
        for t in range(1, full + 1):
            if not a[t] or (t & ~remaining):
                continue
            rest = remaining & ~t
            if depth == 1 or levels[depth - 2][rest]:
                family.append(t)
                remaining = rest
                break
        else:
            raise AssertionError("witness reconstruction failed")
    family.sort(key=lambda m: _mask_members(m, n))
    return theta, [VertexSet(_mask_members(m, n)) for m in family]


# ---- sweep profiles ------------------------------------------------------


@dataclass
class SweepProfile:
    """Per-prefix expansion statistics of a vertex ordering.

    Arrays are indexed by prefix size a - 1 for a = 1..max_prefix.  phi_v,
    n_half and psi hold NaN (or -1) where not computed.
    """

    order: np.ndarray
    boundary: np.ndarray
    phi: np.ndarray
    n_half: np.ndarray
    phi_v: np.ndarray
    psi: np.ndarray

    @property
    def max_prefix(self) -> int:
        return len(self.boundary)

    def stats_at(self, a: int) -> ExpansionStats:
        if not 1 <= a <= self.max_prefix:
            raise IndexError(f"prefix {a} outside 1..{self.max_prefix}")
        i = a - 1
        S = VertexSet(tuple(int(v) for v in self.order[:a]))
        have_v = self.n_half[i] >= 0
        return ExpansionStats(
            S, float(self.boundary[i]), float(self.phi[i]),
            int(self.n_half[i]) if have_v else None,
            float(self.phi_v[i]) if have_v else None,
            float(self.psi[i]) if have_v else None,
        )

    def best_prefix(self, max_size: int | None = None) -> int:
        hi = self.max_prefix if max_size is None else min(max_size, self.max_prefix)
        return int(np.argmin(self.phi[:hi])) + 1


def sweep_profile(graph: WeightedGraph, order, max_prefix: int | None = None,
                  with_phi_v: bool = False, phi_v_at=(),
                  rho: float = 0.5) -> SweepProfile:
    """Expansion statistics of every prefix [1..a] of an ordering.

    Boundary weights are maintained incrementally under single-vertex moves,
    O(edges) in total.  phi_v is O(n log n) per prefix, so it is computed
    only when with_phi_v is set or the prefix size is listed in phi_v_at.
    """
    n = graph.n
    order = np.asarray(order, dtype=np.int64)
    if order.ndim != 1 or len(order) != n or len(np.unique(order)) != n \
            or order.min() < 0 or order.max() >= n:
        raise PreconditionError("order must be a permutation of all vertices")
    cap = n - 1 if max_prefix is None else min(int(max_prefix), n - 1)
    if cap < 1:
        raise PreconditionError("max_prefix must be at least 1")
    want = set(int(a) for a in phi_v_at)

    contrib = np.zeros(n)          # contrib[v] = w(prefix, {v}) for v outside
    inside = np.zeros(n, dtype=bool)
    boundary = np.zeros(cap)
    n_half = np.full(cap, -1, dtype=np.int64)
    run = 0.0
    idx = np.arange(n)
    for a in range(1, cap + 1):
        v = int(order[a - 1])
        run += 1.0 - 2.0 * contrib[v]
        inside[v] = True
        nbrs, ws = graph.neighbors(v)
        contrib[nbrs] += ws
        boundary[a - 1] = run
        if with_phi_v or a in want:
            if run <= _REL_TOL:
                n_half[a - 1] = 0
                continue
            c = np.where(inside, 0.0, contrib)
            srt_order = np.lexsort((idx, -c))
            csum = np.cumsum(c[srt_order])
            target = rho * run - _REL_TOL * max(1.0, run)
            n_half[a - 1] = int(np.argmax(csum >= target)) + 1
    sizes = np.arange(1, cap + 1, dtype=np.float64)
    phi = np.maximum(boundary, 0.0) / sizes
    phi_v = np.where(n_half >= 0, n_half / sizes, np.nan)
    psi = phi * phi_v
    return SweepProfile(order, boundary, phi, n_half, phi_v, psi)
