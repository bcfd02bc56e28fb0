"""Matrix-free linear algebra on unit-degree graphs.

Laplacian L = I - A (eigenvalues in [0, 2]), lazy walk W = I - L/2.
Eigenpairs come from Lanczos with full reorthogonalization on the shifted
positive operator 2I - L, with explicit deflation and restarts so that
high-multiplicity spectra (complete graphs, hypercubes) are resolved.
Laplacian systems are solved by conjugate gradients on the complement of
the all-ones kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .graphs import VertexSet, WeightedGraph


@dataclass(frozen=True)
class EigenPair:
    value: float            # eigenvalue of L, in [0, 2]
    vector: np.ndarray      # unit 2-norm
    residual: float         # ||L v - value * v||_2


@dataclass(frozen=True)
class RestrictedSpectrum:
    set: VertexSet
    lambda_s: float         # smallest eigenvalue of L restricted to the set
    vector: np.ndarray      # unit norm, zero outside the set
    residual: float


def apply_laplacian(graph: WeightedGraph, x: np.ndarray) -> np.ndarray:
    """(L x)_i = x_i - sum_j w_ij x_j."""
    return x - graph.adjacency_matvec(x)


def apply_lazy_walk(graph: WeightedGraph, x: np.ndarray) -> np.ndarray:
    """W x with W = I - L/2 = (I + A)/2; preserves entry sums."""
    return 0.5 * (x + graph.adjacency_matvec(x))


def rayleigh_quotient(graph: WeightedGraph, x: np.ndarray) -> float:
    """x^T L x / x^T x, with the numerator as a nonnegative edge sum."""
    nrm2 = float(x @ x)
    if nrm2 == 0.0:
        raise PreconditionError("Rayleigh quotient of the zero vector")
    rows = np.repeat(np.arange(graph.n), np.diff(graph.indptr))
    diff = x[rows] - x[graph.indices]
    quad = float(graph.weights @ (diff * diff))  # each edge counted twice
    return 0.5 * quad / nrm2


# ---- Lanczos ------------------------------------------------------------

_BREAKDOWN = 1e-13


def _orthogonalize(w: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if basis.shape[1]:
        w = w - basis @ (basis.T @ w)
        w = w - basis @ (basis.T @ w)
    return w


def _lanczos_sweep(matvec, deflate: np.ndarray, start: np.ndarray,
                   maxiter: int, tol: float, need: int):
    """One Lanczos run on the complement of `deflate`.

    Returns converged (theta, ritz_vector, residual) triples: the top
    contiguous prefix of this Krylov space's sorted Ritz values, at most
    `need` of them.  A Krylov space holds one Ritz copy per eigenspace, so
    duplicate copies of degenerate eigenvalues must be recovered by the
    caller via deflated restarts.
    """
    n = len(start)
    q = _orthogonalize(start.astype(float), deflate)
    nq = np.linalg.norm(q)
    if nq < _BREAKDOWN:
        return []
    q /= nq
    limit = min(maxiter, n)
    Q = np.zeros((n, limit + 1))
    Q[:, 0] = q
    alphas: list[float] = []
    betas: list[float] = []

    def harvest(final: bool) -> list | None:
        T = np.diag(alphas)
        if len(alphas) > 1:
            off = betas[:len(alphas) - 1]
            T = T + np.diag(off, 1) + np.diag(off, -1)
        theta, S = np.linalg.eigh(T)
        order = np.argsort(-theta)
        if not final:
            tail = betas[-1] if len(betas) == len(alphas) else 0.0
            est = tail * np.abs(S[-1, :])
            if any(est[idx] > 0.5 * tol for idx in order[:need]):
                return None
        out = []
        for idx in order:
            y = Q[:, :len(alphas)] @ S[:, idx]
            y = _orthogonalize(y, deflate)
            ny = np.linalg.norm(y)
            if ny < 1e-8:
                break
            y /= ny
            res = float(np.linalg.norm(matvec(y) - theta[idx] * y))
            if res > tol:
                break
            out.append((float(theta[idx]), y, res))
            if len(out) >= need:
                break
        if final or len(out) >= need:
            return out
        return None

    j = 0
    while j < limit:
        w = matvec(Q[:, j])
        alphas.append(float(Q[:, j] @ w))
        w = w - alphas[-1] * Q[:, j]
        if j > 0:
            w = w - betas[-1] * Q[:, j - 1]
        w = _orthogonalize(w, deflate)
        w = w - Q[:, :j + 1] @ (Q[:, :j + 1].T @ w)
        w = w - Q[:, :j + 1] @ (Q[:, :j + 1].T @ w)
        beta = float(np.linalg.norm(w))
        j += 1
        if beta < _BREAKDOWN:
            return harvest(final=True) or []
        betas.append(beta)
        Q[:, j] = w / beta
        if j >= need and j % 5 == 0 and j < limit:
            got = harvest(final=False)
            if got is not None:
                return got
    return harvest(final=True) or []


def eigenpairs(graph: WeightedGraph, k: int, tol: float = 1e-10,
               seed: int = 0) -> list[EigenPair]:
    """The k smallest Laplacian eigenpairs, values ascending.

    lambda_1 is pinned to (0, all-ones); the rest come from deflated Lanczos
    sweeps on 2I - L.  Raises ConvergenceError with the best residual if the
    restart budget is exhausted.
    """
    n = graph.n
    if not 1 <= k <= n:
        raise PreconditionError(f"need 1 <= k <= n, got k={k}, n={n}")
    ones = np.full(n, 1.0 / np.sqrt(n))
    res1 = float(np.linalg.norm(apply_laplacian(graph, ones)))
    pairs = [EigenPair(0.0, ones, res1)]
    if k == 1:
        return pairs

    def matvec(x: np.ndarray) -> np.ndarray:
        return x + graph.adjacency_matvec(x)      # 2I - L = I + A

    rng = np.random.default_rng(seed)
    maxiter = 50 * k + 1000
    found: list[tuple[float, np.ndarray, float]] = []
    deflate = ones[:, None]
    best_res = np.inf
    for _restart in range(2 * k + 20):
        need = (k - 1) - len(found)
        got = _lanczos_sweep(matvec, deflate, rng.standard_normal(n),
                             maxiter, tol, max(1, need))
        if not got:
            # a fresh start vector may have been unlucky; try once more
            got = _lanczos_sweep(matvec, deflate, rng.standard_normal(n),
                                 maxiter, tol, max(1, need))
        if need > 0:
            if not got:
                break
            for theta, vec, res in got:
                found.append((theta, vec, res))
                deflate = np.column_stack([deflate, vec])
                best_res = min(best_res, res)
            continue
        # verification: a Krylov space carries one Ritz copy per eigenspace,
        # so degenerate copies can only be ruled out by deflated re-sweeps
        if not got:
            break
        found.sort(key=lambda t: -t[0])
        floor = found[k - 2][0]
        theta_new, vec_new, res_new = got[0]
        if theta_new > floor + 1e-9:
            found.append((theta_new, vec_new, res_new))
            deflate = np.column_stack([deflate, vec_new])
            continue
        break
    if len(found) < k - 1:
        raise ConvergenceError(
            f"Lanczos found {len(found)}/{k - 1} pairs", best_residual=best_res)
    found.sort(key=lambda t: -t[0])               # theta desc == lambda asc
    for theta, vec, res in found[:k - 1]:
        lam = min(2.0, max(0.0, 2.0 - theta))
        pairs.append(EigenPair(lam, vec, res))
    return pairs


def lambda2_pair(graph: WeightedGraph, tol: float = 1e-10,
                 seed: int = 0) -> EigenPair:
    return eigenpairs(graph, 2, tol=tol, seed=seed)[1]


def dense_spectrum(graph: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Dense symmetric eigendecomposition of L; the test oracle for n <= 256."""
    L = np.eye(graph.n) - graph.to_dense_adjacency()
    return np.linalg.eigh(L)


def restricted_eigenvalue(graph: WeightedGraph, S: VertexSet,
                          tol: float = 1e-10, seed: int = 0) -> RestrictedSpectrum:
    """Smallest eigenpair of L_S, the principal submatrix of L on S.

    Runs the same shifted Lanczos on the subspace of vectors supported on S;
    the returned vector is zero outside S with its largest-magnitude entry
    made positive for reproducibility.
    """
    S.validate_for(graph.n)
    if S.size >= graph.n:
        raise PreconditionError("S must be a proper subset")
    members = np.array(S.members, dtype=np.int64)
    if S.size == 1:
        v = np.zeros(graph.n)
        v[members[0]] = 1.0
        return RestrictedSpectrum(S, 1.0, v, 0.0)
    mask = np.zeros(graph.n, dtype=bool)
    mask[members] = True

    def matvec(x: np.ndarray) -> np.ndarray:
        y = x + graph.adjacency_matvec(x)
        y[~mask] = 0.0
        return y

    rng = np.random.default_rng(seed)
    start = np.zeros(graph.n)
    start[members] = rng.standard_normal(S.size)
    got = _lanczos_sweep(matvec, np.zeros((graph.n, 0)), start,
                         50 + 20 * S.size, tol, 1)
    if not got:
        raise ConvergenceError("restricted Lanczos did not converge")
    theta, vec, res = got[0]
    vec = vec * np.sign(vec[np.argmax(np.abs(vec))] or 1.0)
    return RestrictedSpectrum(S, min(2.0, max(0.0, 2.0 - theta)), vec, res)


# ---- Laplacian linear systems --------------------------------------------


def laplacian_solve(graph: WeightedGraph, b: np.ndarray,
                    tol: float = 1e-10) -> np.ndarray:
    """Solve L x = b on the complement of the all-ones kernel by CG.

    Requires sum(b) = 0 within 1e-9; the returned x has zero mean and
    satisfies ||L x - b|| <= tol * ||b||.
    """
    n = graph.n
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise PreconditionError(f"b has shape {b.shape}, expected ({n},)")
    if abs(float(b.sum())) > 1e-9 * max(1.0, float(np.abs(b).sum())):
        raise PreconditionError("sum(b) must vanish for a consistent system")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n)
    b = b - b.mean()
    x = np.zeros(n)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    cap = max(2000, 40 * n)
    for it in range(cap):
        if np.sqrt(rs) <= tol * bnorm:
            break
        Ap = apply_laplacian(graph, p)
        denom = float(p @ Ap)
        if denom <= 0.0:
            raise ConvergenceError("CG breakdown: non-positive curvature",
                                   best_residual=np.sqrt(rs) / bnorm)
        alpha = rs / denom
        x += alpha * p
        r -= alpha * Ap
        if (it + 1) % 64 == 0:
            r = b - apply_laplacian(graph, x)   # control float drift
            r -= r.mean()
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    else:
        raise ConvergenceError(f"CG did not converge in {cap} iterations",
                               best_residual=np.sqrt(rs) / bnorm)
    return x - x.mean()
