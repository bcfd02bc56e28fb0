"""Personal pagerank local partitioning.

The pagerank vector is the fixed point r = alpha*chi_s + (1-alpha)*W*r for
the lazy walk W.  This module provides the exact solve, the residual-push
approximation with work counters, level-set sweeps, and executable checks
of the sorted-drop inequality, the escape bound, and the level-set
certificates with explicit constants 36 and 1152.

Note on the drop constant: for the lazy-walk fixed point the sharp provable
inequality is x_a - x_b <= (2*alpha/(1+alpha)) / w([1,a],[b,n]); the looser
folklore form with plain alpha in the numerator fails already on K4, so the
check gates on the sharp constant and reports the loose form separately.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .expansion import ExpansionStats, VertexSet, set_stats, sweep_profile, \
    graph_expansion_bruteforce, _REL_TOL
from .graphs import WeightedGraph
from .partitioner import descending_order, jumping_sequence, prefix_suffix_matrix, \
    _pair_grid
from .reports import CertificateReport, leq_with_slack
from .spectral import apply_lazy_walk, lambda2_pair


@dataclass(frozen=True)
class PagerankVector:
    seed: int
    alpha: float
    values: np.ndarray
    kind: str                        # "exact" or "approximate"
    epsilon: float | None = None     # push tolerance (approximate only)
    residual_q: np.ndarray | None = None
    pushes: int = 0
    edge_touches: int = 0

    def fixed_point_residual(self, graph: WeightedGraph) -> float:
        chi = np.zeros(graph.n)
        chi[self.seed] = 1.0
        if self.kind == "exact":
            target = self.alpha * chi
        else:
            target = self.alpha * (chi - self.residual_q)
        rhs = target + (1.0 - self.alpha) * apply_lazy_walk(graph, self.values)
        return float(np.abs(self.values - rhs).sum())


def exact_pagerank(graph: WeightedGraph, s: int, alpha: float,
                   tol: float = 1e-12) -> PagerankVector:
    """Fixed-point iteration from chi_s; converges geometrically at 1-alpha."""
    if not 0.0 < alpha <= 1.0:
        raise PreconditionError(f"alpha must be in (0, 1], got {alpha}")
    n = graph.n
    if not 0 <= s < n:
        raise PreconditionError(f"seed {s} out of range")
    chi = np.zeros(n)
    chi[s] = 1.0
    r = chi.copy()
    if alpha < 1.0:
        for _ in range(int(math.log(max(tol, 1e-300)) / math.log(1.0 - alpha)) + 64):
            nxt = alpha * chi + (1.0 - alpha) * apply_lazy_walk(graph, r)
            delta = float(np.abs(nxt - r).sum())
            r = nxt
            if delta <= tol:
                break
    return PagerankVector(seed=s, alpha=alpha, values=r, kind="exact")


def approximate_push(graph: WeightedGraph, s: int, alpha: float,
                     eps: float) -> PagerankVector:
    """Residual push: maintain (r', q), repeatedly push the largest residual.

    Terminates with q <= eps everywhere; the output satisfies
    r' = alpha*(chi_s - q) + (1-alpha)*W*r' and sandwiches the exact vector
    entrywise within eps.  Push count is at most 1/(eps*alpha); edge touches
    are reported against the d/(eps*alpha) budget with d the largest
    neighbor count.
    """
    if not 0.0 < alpha <= 1.0:
        raise PreconditionError(f"alpha must be in (0, 1], got {alpha}")
    if eps <= 0.0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    n = graph.n
    if not 0 <= s < n:
        raise PreconditionError(f"seed {s} out of range")
    q = np.zeros(n)
    q[s] = 1.0
    rp = np.zeros(n)
    heap: list[tuple[float, int]] = []
    in_heap = np.zeros(n, dtype=bool)
    if q[s] > eps:
        heapq.heappush(heap, (-q[s], s))
        in_heap[s] = True
    pushes = 0
    touches = 0
    while heap:
        _, u = heapq.heappop(heap)
        in_heap[u] = False
        qu = q[u]
        if qu <= eps:
            continue
        rp[u] += alpha * qu
        rest = (1.0 - alpha) * qu
        nbrs, ws = graph.neighbors(u)
        q[u] = 0.5 * rest
        q[nbrs] += 0.5 * rest * ws
        pushes += 1
        touches += len(nbrs)
        if q[u] > eps and not in_heap[u]:
            heapq.heappush(heap, (-q[u], u))
            in_heap[u] = True
        hot = nbrs[(q[nbrs] > eps) & ~in_heap[nbrs]]
        for v in hot:
            heapq.heappush(heap, (-q[v], int(v)))
            in_heap[v] = True
    return PagerankVector(seed=s, alpha=alpha, values=rp, kind="approximate",
                          epsilon=eps, residual_q=q, pushes=pushes,
                          edge_touches=touches)


# ---- drop inequality -------------------------------------------------------


def drop_constant(alpha: float, eps: float = 0.0) -> float:
    """Sharp numerator of the sorted-drop bound for lazy-walk pagerank.

    Exact vectors satisfy x_a - x_b <= (2a/(1+a))/w; an eps-approximate push
    vector weakens the seed's mass floor by (1 - eps), adding the
    2*alpha*eps/(1-alpha) correction factor.
    """
    base = 2.0 * alpha / (1.0 + alpha)
    if eps > 0.0 and alpha < 1.0:
        base *= 1.0 + 2.0 * alpha * eps / (1.0 - alpha)
    return base


def pagerank_drop_check(graph: WeightedGraph, vec: PagerankVector,
                        samples: int = 2000, seed: int = 0) -> CertificateReport:
    """Sorted-drop inequality for exact and approximate pagerank vectors.

    All pairs are checked when n <= 64, otherwise `samples` random pairs.
    Gates on the sharp constant from drop_constant(); violations of the
    loose alpha/w form are counted and reported, not gated.
    """
    n = graph.n
    order = descending_order(vec.values)
    xs = vec.values[order]
    M = prefix_suffix_matrix(graph, order)
    pairs = _pair_grid(n, samples, seed)
    a, b = pairs[:, 0], pairs[:, 1]
    w = M[a, b]
    valid = w > _REL_TOL
    num = drop_constant(vec.alpha, vec.epsilon or 0.0)
    lhs = xs[a - 1] - xs[b - 1]
    rhs = np.where(valid, num / np.where(valid, w, 1.0), np.inf)
    margins = np.where(valid, lhs - rhs, -np.inf)
    i = int(np.argmax(margins))
    loose = int(np.sum(valid & (lhs * w > vec.alpha * (1 + 1e-8) + 1e-8)))
    ok = bool(leq_with_slack(float(lhs[i]), float(rhs[i]))) if valid.any() else True
    details = {"pairs_checked": int(valid.sum()), "alpha": vec.alpha,
               "kind": vec.kind, "constant": num,
               "max_violation": float(margins[i]) if valid.any() else None,
               "loose_form_violations": loose}
    if ok:
        return CertificateReport("pagerank_drop", True,
                                 lhs=float(lhs[i]) if valid.any() else None,
                                 rhs=float(rhs[i]) if valid.any() else None,
                                 details=details)
    return CertificateReport(
        "pagerank_drop", False, lhs=float(lhs[i]), rhs=float(rhs[i]),
        details=details,
        violation={"pair": [int(a[i]), int(b[i])], "lhs": float(lhs[i]),
                   "rhs": float(rhs[i]),
                   "inequality": "x_a - x_b <= (2 alpha/(1+alpha)) / w(prefix, suffix)"})


# ---- escape bound ----------------------------------------------------------


def _batched_pagerank_masses(graph: WeightedGraph, members: list[int],
                             alpha: float, tol: float) -> dict[int, float]:
    """Mass each seed's exact pagerank keeps on `members`.

    Runs the per-seed fixed-point iterations as one dense matrix iteration;
    column s equals exact_pagerank(graph, s, alpha) up to float association.
    """
    n = graph.n
    sel = np.array(members)
    W = 0.5 * (np.eye(n) + graph.to_dense_adjacency())
    R = np.zeros((n, len(members)))
    R[sel, np.arange(len(members))] = 1.0
    chi = R.copy()
    if alpha < 1.0:
        cap = int(math.log(max(tol, 1e-300)) / math.log(1.0 - alpha)) + 64
        for _ in range(cap):
            nxt = alpha * chi + (1.0 - alpha) * (W @ R)
            delta = float(np.abs(nxt - R).sum(axis=0).max())
            R = nxt
            if delta <= tol:
                break
    return {s: float(R[sel, j].sum()) for j, s in enumerate(members)}


def escape_mass_check(graph: WeightedGraph, S: VertexSet, alpha: float,
                      tol: float = 1e-12) -> CertificateReport:
    """At least half the seeds of S retain mass >= 1 - phi(S)/alpha."""
    S.validate_for(graph.n)
    if S.size > graph.n // 2:
        raise PreconditionError("need |S| <= n/2")
    stats = set_stats(graph, S, with_phi_v=False)
    floor = 1.0 - stats.phi / alpha
    members = list(S.members)
    masses = _batched_pagerank_masses(graph, members, alpha, tol)
    good = [s for s in members if masses[s] >= floor - 1e-9]
    need = (S.size + 1) // 2
    ok = len(good) >= need
    details = {"alpha": alpha, "phi_S": stats.phi, "mass_floor": floor,
               "good_seeds": good, "masses": masses, "needed": need}
    if ok:
        return CertificateReport("pagerank_escape", True, lhs=float(len(good)),
                                 rhs=float(need), details=details)
    return CertificateReport(
        "pagerank_escape", False, lhs=float(len(good)), rhs=float(need),
        details=details,
        violation={"inequality": "#{s: mass_S(r_s) >= 1 - phi/alpha} >= |S|/2",
                   "good": len(good), "needed": need})


# ---- level-set partitioning ------------------------------------------------


def _level_set_sweep(graph: WeightedGraph, values: np.ndarray,
                     cap: int) -> tuple[ExpansionStats, int]:
    """Best level set among prefixes of the sorted positive values."""
    order = descending_order(values)
    support = int(np.sum(values[order] > 0.0))
    hi = min(cap, support if support else len(order), graph.n - 1)
    if hi < 1:
        raise PreconditionError("vector has empty support")
    prof = sweep_profile(graph, order, max_prefix=hi)
    a = prof.best_prefix()
    return set_stats(graph, VertexSet(tuple(int(v) for v in prof.order[:a]))), hi


def pagerank_partition(graph: WeightedGraph, s: int, phi_target: float,
                       size_target: int, mode: str = "exact",
                       eps: float | None = None,
                       tol: float = 1e-12) -> tuple[ExpansionStats, PagerankVector]:
    """Level-set partitioning around a seed with alpha = 3*phi_target.

    Exact mode sweeps level sets up to 3*size_target*ln(size_target); push
    mode uses eps = 1/(6*size_target) and cap 6*size_target*ln(size_target).
    alpha is clamped to 1 when 3*phi_target exceeds it.
    """
    if not 0.0 < phi_target <= 1.0:
        raise PreconditionError(f"phi_target must be in (0, 1], got {phi_target}")
    if size_target < 2:
        raise PreconditionError("size_target must be at least 2")
    if mode not in ("exact", "push"):
        raise PreconditionError(f"unknown mode {mode!r}")
    alpha = min(1.0, 3.0 * phi_target)
    logst = math.log(size_target)
    if mode == "exact":
        vec = exact_pagerank(graph, s, alpha, tol=tol)
        cap = math.ceil(3.0 * size_target * logst)
    else:
        vec = approximate_push(graph, s, alpha,
                               eps if eps is not None else 1.0 / (6.0 * size_target))
        cap = math.ceil(6.0 * size_target * logst)
    best, _ = _level_set_sweep(graph, vec.values, max(1, cap))
    return best, vec


# ---- level-set certificates (constants 36 and 1152) ------------------------


def phi_v_lower_bound(graph: WeightedGraph, seed: int = 0) -> float:
    """Certified lower bound on the global robust vertex expansion.

    phi_v(S) >= phi(S)/2 >= phi(G)/2 >= lambda2/4 for every |S| <= n/2, so
    lambda2/4 is always a sound growth rate for the fixed-rate jump sequence.
    """
    return lambda2_pair(graph, seed=seed).value / 4.0


def pagerank_certificates(graph: WeightedGraph, S: VertexSet, k: int = 2,
                          phi_v_g: float | None = None,
                          phi_k: float | None = None,
                          tol: float = 1e-12) -> CertificateReport:
    """Level-set expansion certificates for good seeds of a target set.

    For every seed that passes the escape bound at alpha = 3*phi(S), checks
    the initial-mass fact (some a <= |S| has x_a >= 2/(3 a ln|S|)), then
    asserts that the fixed-rate vertex sequence reaches a prefix with
    phi <= 36*phi(S)*ln|S|/phi_v_g and the edge-rule sequence one with
    phi <= 1152*k*phi(S)*ln|S|/phi_k, both within 3|S|ln|S| positions.
    """
    S.validate_for(graph.n)
    n = graph.n
    if S.size < 2:
        raise PreconditionError("need |S| >= 2")
    logS = math.log(S.size)
    span = 3.0 * S.size * logS
    if span > n:
        raise PreconditionError(
            f"3|S|ln|S| = {span:.1f} exceeds n = {n}; target set too large")
    stats = set_stats(graph, S, with_phi_v=False)
    phi_S = stats.phi
    if phi_S <= 0:
        raise PreconditionError("target set has zero boundary")
    alpha = min(1.0, 3.0 * phi_S)
    if phi_v_g is None:
        if n <= 20:
            phi_v_g, _ = graph_expansion_bruteforce(graph, mode="phi_v")
            phi_v_src = "bruteforce"
        else:
            phi_v_g = phi_v_lower_bound(graph)
            phi_v_src = "lambda2/4"
    else:
        phi_v_src = "supplied"
    if phi_k is None:
        from .expansion import k_way_expansion_bruteforce
        if n > 14:
            raise PreconditionError("phi_k must be supplied for n > 14")
        phi_k, _ = k_way_expansion_bruteforce(graph, k)
    vertex_rhs = 36.0 * phi_S * logS / phi_v_g
    edge_rhs = 1152.0 * k * phi_S * logS / phi_k
    cap = min(int(math.ceil(span)), n - 1)

    escape = escape_mass_check(graph, S, alpha, tol=tol)
    per_seed = []
    all_ok = escape.passed
    for s in escape.details["good_seeds"]:
        vec = exact_pagerank(graph, s, alpha, tol=tol)
        order = descending_order(vec.values)
        xs = vec.values[order]
        a_idx = None
        for a in range(1, S.size + 1):
            if xs[a - 1] >= 2.0 / (3.0 * a * logS) - 1e-12:
                a_idx = a
                break
        entry = {"seed": s, "initial_index": a_idx}
        if a_idx is None:
            entry["fail"] = "initial-mass fact"
            per_seed.append(entry)
            all_ok = False
            continue
        vseq = jumping_sequence(graph, order, "pagerank_vertex", cap=cap,
                                m0=a_idx, growth=phi_v_g)
        vwit = next((st for st in vseq.stats
                     if leq_with_slack(st.phi, vertex_rhs)), None)
        eseq = jumping_sequence(graph, order, "pagerank_edge", cap=cap, m0=a_idx)
        ewit = next((st for st in eseq.stats
                     if leq_with_slack(st.phi, edge_rhs)), None)
        entry["vertex_witness"] = None if vwit is None else \
            {"prefix": vwit.set.size, "phi": vwit.phi}
        entry["edge_witness"] = None if ewit is None else \
            {"prefix": ewit.set.size, "phi": ewit.phi}
        if vwit is None or ewit is None:
            entry["fail"] = "no witness prefix"
            all_ok = False
        per_seed.append(entry)
    details = {"alpha": alpha, "phi_S": phi_S, "log_S": logS, "cap": cap,
               "phi_v_g": phi_v_g, "phi_v_source": phi_v_src, "phi_k": phi_k,
               "k": k, "vertex_bound": vertex_rhs, "edge_bound": edge_rhs,
               "constants": [36, 1152], "escape_pass": escape.passed,
               "seeds": per_seed}
    if all_ok:
        return CertificateReport("pagerank_level_sets", True, details=details,
                                 rhs=min(vertex_rhs, edge_rhs))
    bad = [e for e in per_seed if "fail" in e]
    return CertificateReport(
        "pagerank_level_sets", False, rhs=min(vertex_rhs, edge_rhs),
        details=details,
        violation={"inequality": "every good seed yields witness prefixes "
                                 "within the 36/1152 bounds",
                   "escape_pass": escape.passed,
                   "failing_seeds": bad})
