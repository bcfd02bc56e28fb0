"""Sweep-cut partitioning on the second eigenvector and the executable
certificates behind the eigenvalue lower bounds: the sorted-vector drop
inequality, jumping sequences with their half-boundary guarantees, the
product-of-expansions certificate (constant 32), the k-way certificate
(constants 256/1024), and the voltage-ordering sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .expansion import (ExpansionStats, SweepProfile, VertexSet,
                        graph_expansion_bruteforce, k_way_expansion_bruteforce,
                        set_stats, sweep_profile, _REL_TOL)
from .graphs import WeightedGraph
from .reports import CertificateReport, leq_with_slack
from .spectral import apply_laplacian, lambda2_pair, laplacian_solve

RULES = ("vertex", "edge", "pagerank_vertex", "pagerank_edge")


def descending_order(x: np.ndarray) -> np.ndarray:
    """Vertices sorted by value descending, ties broken by vertex index."""
    return np.lexsort((np.arange(len(x)), -x))


def prefix_suffix_matrix(graph: WeightedGraph, order: np.ndarray) -> np.ndarray:
    """M[a, b] = w([1, a], [b, n]) for prefix/suffix positions (1-based).

    M has shape (n+1, n+2) with zero guard rows; M[a, b] sums edge weights
    between the first a vertices of the ordering and positions >= b.
    """
    n = graph.n
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(1, n + 1)
    rows = np.repeat(np.arange(n), np.diff(graph.indptr))
    E = np.zeros((n + 1, n + 1))
    np.add.at(E, (pos[rows], pos[graph.indices]), graph.weights)
    M = np.zeros((n + 1, n + 2))
    M[1:, 1:n + 1] = np.cumsum(E[1:, :0:-1], axis=1)[:, ::-1]
    M[1:, :] = np.cumsum(M[1:, :], axis=0)
    return M


# ---- sweep cut ------------------------------------------------------------


def sweep_cut(graph: WeightedGraph, x: np.ndarray,
              max_size: int | None = None) -> tuple[ExpansionStats, SweepProfile]:
    """Best level set of x over prefixes of size <= max_size (default n/2).

    Both x and -x are swept and the better minimizer is returned; ties in
    the vector are broken by vertex index.
    """
    n = graph.n
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise PreconditionError(f"vector has shape {x.shape}, expected ({n},)")
    if float(x.max() - x.min()) == 0.0:
        raise PreconditionError("sweep vector must not be constant")
    cap = n // 2 if max_size is None else min(int(max_size), n - 1)
    best: tuple[float, int, SweepProfile] | None = None
    for sign in (1.0, -1.0):
        prof = sweep_profile(graph, descending_order(sign * x), max_prefix=cap)
        a = prof.best_prefix()
        phi = float(prof.phi[a - 1])
        if best is None or phi < best[0]:
            best = (phi, a, prof)
    _, a, prof = best
    stats = set_stats(graph, VertexSet(tuple(int(v) for v in prof.order[:a])))
    return stats, prof


def current_sweep(graph: WeightedGraph, s: int,
                  max_size: int | None = None, tol: float = 1e-10) -> ExpansionStats:
    """Voltage-ordering sweep: inject n units of current at s, extract one
    unit everywhere, sort by voltage descending, return the best prefix."""
    n = graph.n
    if n < 2:
        raise PreconditionError("need at least two vertices")
    if not 0 <= s < n:
        raise PreconditionError(f"seed vertex {s} out of range")
    b = -np.ones(n)
    b[s] += n
    volt = laplacian_solve(graph, b, tol=tol)
    cap = n // 2 if max_size is None else min(int(max_size), n - 1)
    prof = sweep_profile(graph, descending_order(volt), max_prefix=cap)
    a = prof.best_prefix()
    return set_stats(graph, VertexSet(tuple(int(v) for v in prof.order[:a])))


# ---- drop inequality -------------------------------------------------------


def _pair_grid(n: int, samples: int, seed: int) -> np.ndarray:
    """(a, b) position pairs with a < b: all pairs for n <= 64, else sampled."""
    if n <= 64:
        a, b = np.triu_indices(n, 1)
        return np.column_stack([a + 1, b + 1])
    rng = np.random.default_rng(seed)
    a = rng.integers(1, n, size=samples)
    b = rng.integers(2, n + 1, size=samples)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    keep = lo < hi
    return np.column_stack([lo[keep], hi[keep]])


def drop_lemma_check(graph: WeightedGraph, x: np.ndarray, lam: float,
                     samples: int = 2000, seed: int = 0,
                     require_eigenpair: bool = True) -> CertificateReport:
    """Check x_a - x_b <= lam * sum_{i<=a} x_i / w([1,a],[b,n]) on sorted x.

    All pairs are checked when n <= 64, otherwise `samples` random pairs.
    With require_eigenpair the (lam, x) residual must be <= 1e-8.
    """
    n = graph.n
    x = np.asarray(x, dtype=float)
    res = float(np.linalg.norm(apply_laplacian(graph, x) - lam * x))
    if require_eigenpair and res > 1e-8:
        raise PreconditionError(f"(lam, x) is not an eigenpair: residual {res:.3e}")
    order = descending_order(x)
    xs = x[order]
    psums = np.concatenate([[0.0], np.cumsum(xs)])
    M = prefix_suffix_matrix(graph, order)
    pairs = _pair_grid(n, samples, seed)
    a, b = pairs[:, 0], pairs[:, 1]
    w = M[a, b]
    valid = w > _REL_TOL
    lhs_all = xs[a - 1] - xs[b - 1]
    with np.errstate(divide="ignore"):
        rhs_all = np.where(valid, lam * psums[a] / np.where(valid, w, 1.0), np.inf)
    margins = np.where(valid, lhs_all - rhs_all, -np.inf)
    checked = int(valid.sum())
    worst_pair = None
    worst = -np.inf
    if checked:
        i = int(np.argmax(margins))
        worst = float(margins[i])
        worst_pair = (int(a[i]), int(b[i]), float(lhs_all[i]), float(rhs_all[i]))
    ok = worst_pair is None or leq_with_slack(worst_pair[2], worst_pair[3])
    details = {"pairs_checked": checked, "max_violation": worst,
               "eig_residual": res, "lambda": lam}
    if ok:
        return CertificateReport("drop_lemma", True, details=details,
                                 lhs=worst_pair[2] if worst_pair else None,
                                 rhs=worst_pair[3] if worst_pair else None)
    a, b, lhs, rhs = worst_pair
    return CertificateReport(
        "drop_lemma", False, lhs=lhs, rhs=rhs, details=details,
        violation={"pair": [a, b], "lhs": lhs, "rhs": rhs,
                   "inequality": "x_a - x_b <= lam * prefix_sum / w(prefix, suffix)"})


# ---- jumping sequences ------------------------------------------------------


@dataclass
class JumpingSequence:
    """Index sequence m_0 < m_1 < ... with per-index expansion statistics.

    `indices` holds every term <= cap; `terminal` is the first term beyond
    the cap (None if the rule never left the cap).  half_boundary records,
    per consecutive pair, w([1, m_i], [m_{i+1}, n]) against m_i*phi(m_i)/2.
    """

    order: np.ndarray
    rule: str
    cap: int
    indices: list[int] = field(default_factory=list)
    stats: list[ExpansionStats] = field(default_factory=list)
    half_boundary: list[dict] = field(default_factory=list)
    growth: float | None = None
    terminal: int | None = None

    def stats_at(self, m: int) -> ExpansionStats:
        return self.stats[self.indices.index(m)]


class _IncrementalSweep:
    """Prefix statistics of one ordering, advanced a vertex at a time."""

    def __init__(self, graph: WeightedGraph, order: np.ndarray):
        self.graph = graph
        self.order = order
        self.contrib = np.zeros(graph.n)
        self.inside = np.zeros(graph.n, dtype=bool)
        self.boundary = 0.0
        self.size = 0
        self._idx = np.arange(graph.n)

    def advance_to(self, a: int) -> None:
        while self.size < a:
            v = int(self.order[self.size])
            self.boundary += 1.0 - 2.0 * self.contrib[v]
            self.inside[v] = True
            nbrs, ws = self.graph.neighbors(v)
            self.contrib[nbrs] += ws
            self.size += 1

    def phi(self) -> float:
        return max(self.boundary, 0.0) / self.size

    def n_half(self, rho: float = 0.5) -> int:
        if self.boundary <= _REL_TOL:
            return 0
        c = np.where(self.inside, 0.0, self.contrib)
        csum = np.cumsum(c[np.lexsort((self._idx, -c))])
        target = rho * self.boundary - _REL_TOL * max(1.0, self.boundary)
        return int(np.argmax(csum >= target)) + 1

    def stats(self, with_phi_v: bool) -> ExpansionStats:
        S = VertexSet(tuple(int(v) for v in self.order[:self.size]))
        bw = max(self.boundary, 0.0)
        phi = self.phi()
        if not with_phi_v:
            return ExpansionStats(S, bw, phi)
        nh = self.n_half()
        pv = nh / self.size
        return ExpansionStats(S, bw, phi, nh, pv, phi * pv)


def _next_index(m: int, g: float) -> int:
    # tiny downward bias keeps float noise from overshooting the ceiling
    return max(m + 1, math.ceil(m * (1.0 + g) - 1e-9))


def jumping_sequence(graph: WeightedGraph, order, rule: str, cap: int,
                     m0: int = 1, growth: float | None = None) -> JumpingSequence:
    """Build the index sequence for one of the four jump rules.

    vertex:          m_{i+1} = ceil(m_i * (1 + phi_v(m_i)))
    edge:            m_{i+1} = ceil(m_i * (1 + phi(m_i)/2))
    pagerank_vertex: m_{i+1} = ceil(m_i * (1 + g)) for fixed supplied g
    pagerank_edge:   the edge rule started from an arbitrary m0

    Each consecutive pair is checked against the half-boundary guarantee
    w([1, m_i], [m_{i+1}, n]) >= m_i * phi(m_i) / 2; a violation raises for
    the rules where it is provable (an internal bug signal) and is recorded
    otherwise.
    """
    if rule not in RULES:
        raise PreconditionError(f"unknown rule {rule!r}")
    if rule == "pagerank_vertex" and (growth is None or growth <= 0):
        raise PreconditionError("pagerank_vertex needs a positive growth value")
    n = graph.n
    order = np.asarray(order, dtype=np.int64)
    cap = min(int(cap), n - 1)
    if not 1 <= m0 <= cap:
        raise PreconditionError(f"m0={m0} outside 1..{cap}")
    M = prefix_suffix_matrix(graph, order)
    sweep = _IncrementalSweep(graph, order)
    seq = JumpingSequence(order=order, rule=rule, cap=cap, growth=growth)
    with_phi_v = rule == "vertex"
    m = m0
    while m <= cap:
        sweep.advance_to(m)
        st = sweep.stats(with_phi_v)
        seq.indices.append(m)
        seq.stats.append(st)
        if rule == "vertex":
            g = st.phi_v
        elif rule == "pagerank_vertex":
            g = growth
        else:
            g = 0.5 * st.phi
        nxt = _next_index(m, g)
        if nxt <= n:
            lhs = float(M[m, nxt])
            rhs = 0.5 * m * st.phi
            ok = bool(leq_with_slack(rhs, lhs))
            seq.half_boundary.append(
                {"m": m, "m_next": nxt, "w": lhs, "half_bound": rhs, "ok": ok})
            provable = rule in ("vertex", "edge", "pagerank_edge") or nxt <= n // 2
            if not ok and provable:
                raise AssertionError(
                    f"half-boundary property violated at m={m}: {lhs} < {rhs}")
        if nxt > cap:
            seq.terminal = nxt
            break
        m = nxt
    return seq


# ---- theorem certificates ---------------------------------------------------


def _ejump_margin(xs: np.ndarray, lam: float, seq: JumpingSequence) -> float:
    """Worst margin of the per-step drop bound 2*lam*mean/phi along a sequence."""
    worst = -np.inf
    psums = np.concatenate([[0.0], np.cumsum(xs)])
    steps = seq.indices + ([seq.terminal] if seq.terminal else [])
    for m, nxt in zip(seq.indices, steps[1:]):
        if nxt > len(xs):
            continue
        phi = seq.stats_at(m).phi
        if phi <= _REL_TOL:
            continue
        lhs = xs[m - 1] - xs[nxt - 1]
        rhs = 2.0 * lam * (psums[m] / m) / phi
        worst = max(worst, lhs - rhs)
    return worst


def theorem_product_certificate(graph: WeightedGraph,
                                seed: int = 0) -> CertificateReport:
    """Contrapositive certificate for the product lower bound with constant 32.

    Builds vertex-rule jumping sequences on the second eigenvector and its
    negation; some prefix of size <= n/2 must satisfy psi <= 32*lambda2 or
    phi <= 32*lambda2.  For n <= 20 the exhaustive psi(G)/phi(G) minima are
    cross-checked against the implied bound.
    """
    n = graph.n
    if n < 2:
        raise PreconditionError("certificate needs n >= 2")
    pair = lambda2_pair(graph, seed=seed)
    lam = pair.value
    thr = 32.0 * lam
    witness = None
    scanned = []
    ejump_worst = -np.inf
    for sign, tag in ((1.0, "+x"), (-1.0, "-x")):
        order = descending_order(sign * pair.vector)
        seq = jumping_sequence(graph, order, "vertex", cap=n // 2)
        ejump_worst = max(ejump_worst,
                          _ejump_margin((sign * pair.vector)[order], lam, seq))
        for st in seq.stats:
            scanned.append((tag, st))
            if witness is None and (leq_with_slack(st.psi, thr)
                                    or leq_with_slack(st.phi, thr)):
                witness = (tag, st)
    details = {
        "lambda2": lam, "threshold": thr, "constant": 32,
        "eig_residual": pair.residual,
        "prefixes_scanned": len(scanned),
        "ejump_max_violation": ejump_worst,
        "min_psi_seen": min(st.psi for _, st in scanned),
        "min_phi_seen": min(st.phi for _, st in scanned),
    }
    if n <= 4096:
        # the second eigenspace may be degenerate; keep the vector actually
        # used so the certificate replays bit-identically
        details["eigenvector"] = pair.vector.tolist()
    if n <= 20:
        psi_g, _ = graph_expansion_bruteforce(graph, mode="psi")
        phi_g, _ = graph_expansion_bruteforce(graph, mode="phi")
        details["psi_graph"] = psi_g
        details["phi_graph"] = phi_g
        details["implied_ok"] = bool(leq_with_slack(min(psi_g, phi_g), thr))
    if witness is not None and leq_with_slack(ejump_worst, 0.0):
        tag, st = witness
        side = "psi" if leq_with_slack(st.psi, thr) else "phi"
        return CertificateReport(
            "product_lower_bound", True,
            witness={"direction": tag, "prefix": st.set.size, **st.to_dict()},
            lhs=st.psi if side == "psi" else st.phi, rhs=thr,
            details={**details, "witness_side": side})
    violation = {"inequality": "exists prefix with psi or phi <= 32*lambda2",
                 "min_psi": details["min_psi_seen"],
                 "min_phi": details["min_phi_seen"], "rhs": thr,
                 "ejump_max_violation": ejump_worst}
    return CertificateReport("product_lower_bound", False,
                             lhs=min(details["min_psi_seen"],
                                     details["min_phi_seen"]),
                             rhs=thr, details=details, violation=violation)


def induction_step_check(samples: int = 10 ** 6, seed: int = 0) -> CertificateReport:
    """Pure-arithmetic property test of the induction step's core inequality.

    Samples (c, h, phi, lam) with 2 <= c <= 4, h, phi in (0, 1],
    32*lam <= h*phi and 32*lam <= phi, and checks
    ((c + h)/(1 + h)) * (phi/(phi - 2*lam*c)) <= c.
    """
    rng = np.random.default_rng(seed)
    c = rng.uniform(2.0, 4.0, samples)
    h = rng.uniform(np.finfo(float).tiny, 1.0, samples)
    phi = rng.uniform(np.finfo(float).tiny, 1.0, samples)
    lam = rng.uniform(0.0, np.minimum(h * phi, phi) / 32.0)
    lhs = ((c + h) / (1.0 + h)) * (phi / (phi - 2.0 * lam * c))
    ratio = lhs / c
    worst = int(np.argmax(ratio))
    ok = bool(ratio[worst] <= 1.0 + 1e-12)
    details = {"samples": samples, "max_ratio": float(ratio[worst]),
               "violations": int(np.sum(ratio > 1.0 + 1e-12))}
    if ok:
        return CertificateReport("induction_step_inequality", True,
                                 lhs=float(lhs[worst]), rhs=float(c[worst]),
                                 details=details)
    return CertificateReport(
        "induction_step_inequality", False,
        lhs=float(lhs[worst]), rhs=float(c[worst]), details=details,
        violation={"c": float(c[worst]), "h": float(h[worst]),
                   "phi": float(phi[worst]), "lam": float(lam[worst]),
                   "inequality": "((c+h)/(1+h))*(phi/(phi-2*lam*c)) <= c"})


def lemma_jump_check(graph: WeightedGraph, order, theta: float, k: int,
                     phi_k: float | None = None) -> CertificateReport:
    """At most 16*k/phi_k edge-rule terms may fall in [theta, 2*theta].

    Valid for any vertex ordering; requires theta < phi_k/4 with phi_k exact
    (brute-forced for n <= 14) or supplied.
    """
    if phi_k is None:
        phi_k, _ = k_way_expansion_bruteforce(graph, k)
    if not theta < phi_k / 4.0:
        raise PreconditionError(f"theta={theta} must be below phi_k/4={phi_k / 4}")
    seq = jumping_sequence(graph, order, "edge", cap=graph.n - 1)
    hits = [st.set.size for st in seq.stats if theta <= st.phi <= 2.0 * theta]
    bound = 16.0 * k / phi_k
    ok = len(hits) <= bound + 1e-9
    details = {"terms_in_band": len(hits), "bound": bound, "theta": theta,
               "phi_k": phi_k, "band_indices": hits,
               "sequence_length": len(seq.indices)}
    if ok:
        return CertificateReport("jump_band_count", True, lhs=float(len(hits)),
                                 rhs=bound, details=details)
    return CertificateReport(
        "jump_band_count", False, lhs=float(len(hits)), rhs=bound,
        details=details,
        violation={"inequality": "count(theta <= phi(m_i) <= 2 theta) <= 16k/phi_k",
                   "count": len(hits), "bound": bound})


def theorem_kway_certificate(graph: WeightedGraph, k: int,
                             phi_k: float | None = None,
                             seed: int = 0) -> CertificateReport:
    """Contrapositive k-way certificate with constants 256 and 1024.

    In the nontrivial regime phi_k^2 >= 1024*lambda2, some edge-rule prefix
    of size <= n/2 (on the second eigenvector or its negation) must satisfy
    phi <= 256*k*lambda2/phi_k.  Otherwise the bound holds trivially and the
    report records the regime; a supplied phi_k may be any certified lower
    bound on the true k-way expansion.
    """
    if k < 2:
        raise PreconditionError("need k >= 2")
    if phi_k is None:
        phi_k, _ = k_way_expansion_bruteforce(graph, k)
    n = graph.n
    pair = lambda2_pair(graph, seed=seed)
    lam = pair.value
    details = {"lambda2": lam, "phi_k": phi_k, "k": k,
               "constants": [256, 1024], "eig_residual": pair.residual}
    trivial = phi_k * phi_k < 1024.0 * lam
    bound = 256.0 * k * lam / phi_k
    witness = None
    min_phi = np.inf
    for sign, tag in ((1.0, "+x"), (-1.0, "-x")):
        order = descending_order(sign * pair.vector)
        seq = jumping_sequence(graph, order, "edge", cap=n // 2)
        for st in seq.stats:
            min_phi = min(min_phi, st.phi)
            if witness is None and leq_with_slack(st.phi, bound):
                witness = (tag, st)
    details["bound"] = bound
    details["min_phi_seen"] = min_phi
    details["regime"] = "trivial" if trivial else "contrapositive"
    if trivial:
        if witness is not None:
            tag, st = witness
            details["opportunistic_witness"] = {"direction": tag, **st.to_dict()}
        return CertificateReport("kway_lower_bound", True,
                                 lhs=phi_k * phi_k, rhs=1024.0 * lam,
                                 details=details)
    if witness is not None:
        tag, st = witness
        return CertificateReport(
            "kway_lower_bound", True,
            witness={"direction": tag, "prefix": st.set.size, **st.to_dict()},
            lhs=st.phi, rhs=bound, details=details)
    return CertificateReport(
        "kway_lower_bound", False, lhs=min_phi, rhs=bound, details=details,
        violation={"inequality": "exists prefix with phi <= 256*k*lambda2/phi_k",
                   "min_phi": min_phi, "bound": bound})
