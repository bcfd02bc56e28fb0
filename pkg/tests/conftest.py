import numpy as np
import pytest

from partlab.graphs import (WeightedGraph, gen_complete, gen_cycle,
                            gen_dumbbell, gen_hypercube)


@pytest.fixture(scope="session")
def k4():
    return gen_complete(4)


@pytest.fixture(scope="session")
def q3():
    return gen_hypercube(3)


@pytest.fixture(scope="session")
def c8():
    return gen_cycle(8)


@pytest.fixture(scope="session")
def edge2():
    return WeightedGraph.from_edges(2, [(0, 1, 1.0)])


@pytest.fixture(scope="session")
def d8():
    return gen_dumbbell(8)


def sinkhorn_graph(n: int, seed: int, sparsity: float = 1.0) -> WeightedGraph:
    """Random unit-degree graph: random symmetric positives, degree-scaled."""
    rng = np.random.default_rng(seed)
    M = rng.random((n, n))
    if sparsity < 1.0:
        keep = rng.random((n, n)) < sparsity
        M = np.where(keep, M, 0.0)
    M = np.triu(M, 1)
    M = M + M.T
    M[M == 0] += (np.triu(np.ones((n, n)), 1) + np.triu(np.ones((n, n)), 1).T)[M == 0] * 1e-3
    np.fill_diagonal(M, 0.0)
    for _ in range(400):
        d = M.sum(axis=1)
        if np.max(np.abs(d - 1.0)) < 1e-13:
            break
        s = 1.0 / np.sqrt(d)
        M = M * np.outer(s, s)
    iu, ju = np.triu_indices(n, 1)
    edges = list(zip(iu.tolist(), ju.tolist(), M[iu, ju].tolist()))
    return WeightedGraph.from_edges(n, edges)


@pytest.fixture(scope="session")
def random_graphs():
    return [sinkhorn_graph(n, seed) for n, seed in
            [(5, 0), (8, 1), (11, 2), (16, 3), (24, 4)]]
