"""Lazy-random-walk local partitioning.

Exact walk vectors p = W^t chi_s, locally-computed truncated vectors with
the entrywise sandwich guarantee, the walk-vector Rayleigh bound, staying
probability (constant 1/200) and spectral sparsity (constant 40000) checks,
threshold rounding to small support, and the level-set partitioners, with
the truncated-chain constants 80000/160000 asserted and all O(.) envelopes
reported as measured values only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .expansion import ExpansionStats, VertexSet, set_stats, sweep_profile
from .graphs import WeightedGraph
from .partitioner import descending_order
from .reports import CertificateReport
from .spectral import apply_lazy_walk, rayleigh_quotient, restricted_eigenvalue


@dataclass(frozen=True)
class WalkVector:
    seed: int
    steps: int
    values: np.ndarray
    kind: str                      # "exact" or "truncated"
    alpha: float | None = None     # end-to-end truncation budget
    round_threshold: float | None = None
    edge_touches: int = 0


def exact_walk(graph: WeightedGraph, s: int, t: int) -> WalkVector:
    """p = W^t chi_s by repeated application of the lazy walk."""
    if t < 0:
        raise PreconditionError("step count must be nonnegative")
    if not 0 <= s < graph.n:
        raise PreconditionError(f"seed {s} out of range")
    p = np.zeros(graph.n)
    p[s] = 1.0
    for _ in range(t):
        p = apply_lazy_walk(graph, p)
    return WalkVector(seed=s, steps=t, values=p, kind="exact")


def truncated_walk(graph: WeightedGraph, s: int, t: int,
                   alpha: float) -> WalkVector:
    """Locally-computed walk: each round applies W on the current support
    and zeroes entries below alpha/t.

    Output p' satisfies p >= p' >= p - alpha and p' >= 0 entrywise against
    the exact vector.  Edge touches are counted for the d*t^2/alpha budget.
    """
    if t < 1:
        raise PreconditionError("need at least one step")
    if alpha <= 0.0:
        raise PreconditionError("alpha must be positive")
    if alpha / t >= 1.0:
        raise PreconditionError("threshold alpha/t >= 1 truncates everything")
    if not 0 <= s < graph.n:
        raise PreconditionError(f"seed {s} out of range")
    thr = alpha / t
    p = np.zeros(graph.n)
    p[s] = 1.0
    touches = 0
    rows = np.repeat(np.arange(graph.n), np.diff(graph.indptr))
    for _ in range(t):
        nxt = 0.5 * p
        live = p[rows] > 0.0           # only edges leaving the current support
        contrib = 0.5 * graph.weights[live] * p[rows[live]]
        np.add.at(nxt, graph.indices[live], contrib)
        touches += int(live.sum())
        nxt[nxt < thr] = 0.0
        p = nxt
    return WalkVector(seed=s, steps=t, values=p, kind="truncated",
                      alpha=alpha, round_threshold=thr, edge_touches=touches)


# ---- per-vector and per-set checks ----------------------------------------


def rayleigh_bound_check(graph: WeightedGraph, vec: WalkVector) -> CertificateReport:
    """R(p_{s,t}) <= 2 - 2*||p||_2^(1/t), slack 1e-9."""
    if vec.steps < 1:
        raise PreconditionError("bound needs t >= 1")
    rq = rayleigh_quotient(graph, vec.values)
    rhs = 2.0 - 2.0 * float(np.linalg.norm(vec.values)) ** (1.0 / vec.steps)
    ok = rq <= rhs + 1e-9
    details = {"t": vec.steps, "rayleigh": rq, "norm2": float(np.linalg.norm(vec.values))}
    if ok:
        return CertificateReport("walk_rayleigh_bound", True, lhs=rq, rhs=rhs,
                                 details=details)
    return CertificateReport(
        "walk_rayleigh_bound", False, lhs=rq, rhs=rhs, details=details,
        violation={"inequality": "R(p) <= 2 - 2||p||^(1/t)", "lhs": rq, "rhs": rhs})


def _seed_walks(graph: WeightedGraph, S: VertexSet, t: int):
    for s in S.members:
        yield s, exact_walk(graph, s, t)


def staying_probability_check(graph: WeightedGraph, S: VertexSet,
                              t: int) -> CertificateReport:
    """Half the seeds keep mass >= (1/200)*(1 - 3 phi(S)/2)^t inside S."""
    stats = set_stats(graph, S, with_phi_v=False)
    if stats.phi >= 2.0 / 3.0:
        raise PreconditionError("phi(S) must be below 2/3 for a positive bound")
    if S.size < 2:
        raise PreconditionError("need |S| >= 2")
    floor = (1.0 - 1.5 * stats.phi) ** t / 200.0
    sel = np.array(S.members)
    masses = {s: float(v.values[sel].sum()) for s, v in _seed_walks(graph, S, t)}
    good = [s for s in S.members if masses[s] >= floor - 1e-12]
    need = (S.size + 1) // 2
    details = {"t": t, "phi_S": stats.phi, "floor": floor, "constant": 200,
               "good_seeds": good, "masses": masses, "needed": need}
    if len(good) >= need:
        return CertificateReport("walk_staying_probability", True,
                                 lhs=float(len(good)), rhs=float(need),
                                 details=details)
    return CertificateReport(
        "walk_staying_probability", False, lhs=float(len(good)), rhs=float(need),
        details=details,
        violation={"inequality": "#{s: mass_S(p_{s,t}) >= (1-3phi/2)^t/200} >= |S|/2",
                   "good": len(good), "needed": need})


def spectral_sparsity_check(graph: WeightedGraph, S: VertexSet,
                            t: int) -> CertificateReport:
    """Half the seeds satisfy ||p||_1^2 <= 40000|S|/(1-3phi/2)^(2t) * ||p||_2^2."""
    stats = set_stats(graph, S, with_phi_v=False)
    if stats.phi >= 2.0 / 3.0:
        raise PreconditionError("phi(S) must be below 2/3")
    if S.size < 2:
        raise PreconditionError("need |S| >= 2")
    decay = (1.0 - 1.5 * stats.phi) ** (2 * t)
    bound = 40000.0 * S.size / decay
    ratios = {}
    for s, v in _seed_walks(graph, S, t):
        l1 = float(np.abs(v.values).sum())
        l2sq = float(v.values @ v.values)
        ratios[s] = l1 * l1 / l2sq
    good = [s for s in S.members if ratios[s] <= bound * (1 + 1e-9)]
    need = (S.size + 1) // 2
    details = {"t": t, "phi_S": stats.phi, "bound": bound, "constant": 40000,
               "sparsity_ratios": ratios, "good_seeds": good, "needed": need}
    if len(good) >= need:
        return CertificateReport("walk_spectral_sparsity", True,
                                 lhs=float(len(good)), rhs=float(need),
                                 details=details)
    return CertificateReport(
        "walk_spectral_sparsity", False, lhs=float(len(good)), rhs=float(need),
        details=details,
        violation={"inequality": "||p||_1^2 <= 40000|S|/(1-3phi/2)^{2t} ||p||_2^2 "
                                 "for half the seeds",
                   "good": len(good), "needed": need})


# ---- threshold rounding -----------------------------------------------------


def spectral_rounding(graph: WeightedGraph, x: np.ndarray,
                      support_cap: int) -> np.ndarray:
    """Smallest-Rayleigh-quotient threshold cut y = max(x - theta, 0) with
    support at most support_cap.

    Scans every distinct value of x as a threshold; among thresholds whose
    strict level set fits the cap, returns the y with minimum R(y).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise PreconditionError("rounding needs a nonnegative vector")
    if not np.any(x > 0.0):
        raise PreconditionError("rounding needs a nonzero vector")
    if support_cap < 1:
        raise PreconditionError("support cap must be at least 1")
    best_y = None
    best_rq = np.inf
    for theta in np.unique(x):
        support = int(np.sum(x > theta))
        if not 1 <= support <= support_cap:
            continue
        y = np.maximum(x - theta, 0.0)
        rq = rayleigh_quotient(graph, y)
        if rq < best_rq:
            best_rq, best_y = rq, y
    if best_y is None:
        raise PreconditionError(
            f"no threshold level set fits the support cap {support_cap}")
    return best_y


def _rounded_sweep(graph: WeightedGraph, values: np.ndarray,
                   cap: int) -> tuple[ExpansionStats, np.ndarray, float]:
    """Round to support <= cap, then sweep the level sets of the result."""
    y = spectral_rounding(graph, values, cap)
    order = descending_order(y)
    support = int(np.sum(y > 0.0))
    prof = sweep_profile(graph, order, max_prefix=min(support, graph.n - 1))
    a = prof.best_prefix()
    stats = set_stats(graph, VertexSet(tuple(int(v) for v in prof.order[:a])))
    return stats, y, rayleigh_quotient(graph, y)


def walk_partition(graph: WeightedGraph, s: int, phi_target: float,
                   size_target: int, epsilon: float = 0.5,
                   mode: str = "exact") -> tuple[ExpansionStats, WalkVector]:
    """Level-set partitioning of a walk vector after threshold rounding.

    Exact mode runs t = ceil(eps*ln(size)/(6*phi)) steps; truncated mode
    runs t = ceil(eps*ln(size)/phi) with per-run truncation budget
    alpha = phi/(160000*size^(1+eps)).  The rounding support cap is
    min(n/2, 80000*size^(1+eps)), and the returned set never exceeds it.
    """
    if not 0.0 < phi_target <= 0.25:
        raise PreconditionError("phi_target must be in (0, 1/4]")
    if size_target < 2:
        raise PreconditionError("size_target must be at least 2")
    if not 0.0 < epsilon <= 1.0:
        raise PreconditionError("epsilon must be in (0, 1]")
    if mode not in ("exact", "truncated"):
        raise PreconditionError(f"unknown mode {mode!r}")
    logst = math.log(size_target)
    grow = float(size_target) ** (1.0 + epsilon)
    if mode == "exact":
        t = max(1, math.ceil(epsilon * logst / (6.0 * phi_target)))
        vec = exact_walk(graph, s, t)
    else:
        t = max(1, math.ceil(epsilon * logst / phi_target))
        alpha = phi_target / (160000.0 * grow)
        vec = truncated_walk(graph, s, t, alpha)
    cap = max(1, min(graph.n // 2, math.ceil(80000.0 * grow)))
    stats, _y, _rq = _rounded_sweep(graph, vec.values, cap)
    return stats, vec


def local_eigen_partition(graph: WeightedGraph, S_hint: VertexSet,
                          epsilon: float = 0.5,
                          phi_target: float | None = None
                          ) -> tuple[ExpansionStats, dict]:
    """Non-local variant: seed the walk at the extreme entry of the
    restricted eigenvector and lengthen the walk using lambda_S.

    The restricted sparsity bound |S|/(1-lambda_S)^(2t) <= |S|^(1+eps) fixes
    t = ceil(eps*ln|S| / (2*ln(1/(1-lambda_S)))).  phi_target is accepted
    for interface parity with walk_partition but the walk length comes from
    lambda_S.
    """
    if S_hint.size < 2:
        raise PreconditionError("single-vertex hints are degenerate (lambda_S = 1)")
    if not 0.0 < epsilon <= 1.0:
        raise PreconditionError("epsilon must be in (0, 1]")
    spec = restricted_eigenvalue(graph, S_hint)
    lam_s = spec.lambda_s
    if lam_s >= 1.0 - 1e-12:
        raise PreconditionError(f"lambda_S = {lam_s} is degenerate")
    u = int(np.argmax(np.abs(spec.vector)))
    t = max(1, math.ceil(epsilon * math.log(S_hint.size)
                         / (2.0 * math.log(1.0 / (1.0 - lam_s)))))
    vec = exact_walk(graph, u, t)
    cap = max(1, min(graph.n // 2,
                     math.ceil(4.0 * float(S_hint.size) ** (1.0 + epsilon))))
    stats, _y, rq = _rounded_sweep(graph, vec.values, cap)
    info = {"lambda_s": lam_s, "start": u, "t": t, "cap": cap,
            "rounded_rayleigh": rq, "eig_residual": spec.residual}
    return stats, info


# ---- truncated-chain certificate -------------------------------------------


def truncated_quality_checks(graph: WeightedGraph, S: VertexSet,
                             epsilon: float = 0.5) -> CertificateReport:
    """Proof-chain inequalities for the truncated walk at its standard
    parameterization.

    With t = ceil(eps*ln|S|/phi) and alpha = phi/(160000*|S|^(1+eps)):
    the sandwich p >= p' >= p - alpha holds for every seed, the norm drop
    ||p'||_2^2 >= ||p||_2^2 - 2*alpha holds for every seed, and for at least
    half the seeds ||p'||_1^2 <= 80000*|S|^(1+eps)*||p'||_2^2.  The ratio
    R(p')*eps/phi is reported as a measured envelope, never gated.
    """
    if S.size < 2:
        raise PreconditionError("need |S| >= 2")
    if not 0.0 < epsilon <= 1.0:
        raise PreconditionError("epsilon must be in (0, 1]")
    stats = set_stats(graph, S, with_phi_v=False)
    phi = stats.phi
    if not 0.0 < phi <= 0.25:
        raise PreconditionError("target set must satisfy 0 < phi(S) <= 1/4")
    grow = float(S.size) ** (1.0 + epsilon)
    t = max(1, math.ceil(epsilon * math.log(S.size) / phi))
    alpha = phi / (160000.0 * grow)
    chain_bound = 80000.0 * grow
    sandwich_ok = True
    norm_ok = True
    chain_good = []
    ratio_env = -np.inf
    per_seed = {}
    for s in S.members:
        p = exact_walk(graph, s, t).values
        vec = truncated_walk(graph, s, t, alpha)
        pp = vec.values
        s_ok = bool(np.all(pp <= p + 1e-12) and np.all(pp >= p - alpha - 1e-12)
                    and np.all(pp >= 0.0))
        n_ok = bool(pp @ pp >= p @ p - 2.0 * alpha - 1e-15)
        l1sq = float(np.abs(pp).sum()) ** 2
        l2sq = float(pp @ pp)
        c_ok = bool(l1sq <= chain_bound * l2sq * (1 + 1e-9))
        rq = rayleigh_quotient(graph, pp) if l2sq > 0 else np.inf
        ratio = rq * epsilon / phi
        ratio_env = max(ratio_env, ratio)
        sandwich_ok &= s_ok
        norm_ok &= n_ok
        if c_ok:
            chain_good.append(s)
        per_seed[s] = {"sandwich": s_ok, "norm_drop": n_ok, "chain": c_ok,
                       "rayleigh_ratio": ratio, "edge_touches": vec.edge_touches}
    need = (S.size + 1) // 2
    ok = sandwich_ok and norm_ok and len(chain_good) >= need
    details = {"t": t, "alpha": alpha, "phi_S": phi, "epsilon": epsilon,
               "chain_bound": chain_bound, "constants": [80000, 160000],
               "chain_good": chain_good, "needed": need,
               "rayleigh_ratio_envelope": ratio_env, "seeds": per_seed,
               "work_budget": graph.max_neighbors() * t * t / alpha}
    if ok:
        return CertificateReport("truncated_walk_chain", True,
                                 lhs=float(len(chain_good)), rhs=float(need),
                                 details=details)
    return CertificateReport(
        "truncated_walk_chain", False, lhs=float(len(chain_good)),
        rhs=float(need), details=details,
        violation={"sandwich_ok": sandwich_ok, "norm_ok": norm_ok,
                   "chain_good": len(chain_good), "needed": need,
                   "inequality": "sandwich + norm drop + 80000-chain for half seeds"})
