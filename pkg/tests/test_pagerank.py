import math

import numpy as np
import pytest

from partlab.errors import PreconditionError
from partlab.expansion import VertexSet, edge_expansion
from partlab.graphs import gen_cycle, gen_dumbbell, gen_planted_partition
from partlab.pagerank import (approximate_push, drop_constant,
                              escape_mass_check, exact_pagerank,
                              pagerank_certificates, pagerank_drop_check,
                              pagerank_partition, phi_v_lower_bound)


def test_exact_pagerank_alpha_one_is_indicator(c8):
    vec = exact_pagerank(c8, 3, 1.0)
    expect = np.zeros(8)
    expect[3] = 1.0
    assert np.array_equal(vec.values, expect)


def test_exact_pagerank_two_vertex_closed_form(edge2):
    for alpha in (0.1, 0.5, 0.9):
        vec = exact_pagerank(edge2, 0, alpha)
        assert vec.values == pytest.approx([(1 + alpha) / 2, (1 - alpha) / 2],
                                           abs=1e-11)


def test_exact_pagerank_invariants(random_graphs):
    rng = np.random.default_rng(0)
    for g in random_graphs:
        alpha = float(rng.uniform(0.05, 1.0))
        s = int(rng.integers(g.n))
        vec = exact_pagerank(g, s, alpha)
        assert np.all(vec.values >= -1e-15)
        assert abs(vec.values.sum() - 1.0) <= 1e-10
        assert vec.fixed_point_residual(g) <= 1e-10


def test_exact_pagerank_rejects_bad_alpha(c8):
    for alpha in (0.0, -0.5, 1.5):
        with pytest.raises(PreconditionError):
            exact_pagerank(c8, 0, alpha)


def test_push_trivial_when_eps_large(edge2):
    vec = approximate_push(edge2, 0, 0.5, 1.0)
    assert vec.pushes == 0
    assert np.array_equal(vec.values, np.zeros(2))
    assert np.array_equal(vec.residual_q, [1.0, 0.0])


def test_push_two_vertex_close_to_exact(edge2):
    vec = approximate_push(edge2, 0, 0.5, 0.01)
    assert np.all(np.abs(vec.values - [0.75, 0.25]) <= 0.01)


def test_push_sandwich_and_q_bound(random_graphs):
    rng = np.random.default_rng(1)
    for g in random_graphs:
        for _ in range(4):
            alpha = float(rng.uniform(0.05, 0.9))
            eps = float(rng.uniform(1e-4, 1e-2))
            s = int(rng.integers(g.n))
            pushed = approximate_push(g, s, alpha, eps)
            exact = exact_pagerank(g, s, alpha)
            assert np.all(pushed.residual_q <= eps + 1e-15)
            assert np.all(pushed.residual_q >= -1e-15)
            assert np.all(pushed.values <= exact.values + 1e-10)
            assert np.all(pushed.values >= exact.values - eps - 1e-10)
            assert pushed.fixed_point_residual(g) <= 1e-10


def test_push_work_counter_bound(random_graphs):
    rng = np.random.default_rng(2)
    count = 0
    for g in random_graphs:
        for _ in range(20):
            alpha = float(rng.uniform(0.05, 0.9))
            eps = float(rng.uniform(1e-4, 1e-2))
            pushed = approximate_push(g, int(rng.integers(g.n)), alpha, eps)
            assert pushed.pushes <= 1.0 / (eps * alpha) + 1e-9
            assert pushed.edge_touches <= g.max_neighbors() * (1.0 / (eps * alpha))
            count += 1
    assert count == 100


def test_drop_constant_forms():
    assert drop_constant(1.0) == pytest.approx(1.0)
    assert drop_constant(0.1) == pytest.approx(0.2 / 1.1)
    assert drop_constant(0.1, eps=0.0) == drop_constant(0.1)
    assert drop_constant(0.5, eps=1e-3) > drop_constant(0.5)


def test_drop_check_exact_vectors(k4, q3, c8):
    for g in (k4, q3, c8):
        for alpha in (0.1, 0.5, 1.0):
            vec = exact_pagerank(g, 0, alpha)
            rep = pagerank_drop_check(g, vec)
            assert rep.passed, rep.violation


def test_drop_check_push_vectors(k4, q3, c8):
    for g in (k4, q3, c8):
        vec = approximate_push(g, 0, 0.1, 1e-4)
        rep = pagerank_drop_check(g, vec)
        assert rep.passed, rep.violation


def test_drop_loose_form_fails_on_k4(k4):
    # the corrected constant 2a/(1+a) is required: the folklore alpha/w
    # form has concrete violations on K4 (counted, not gated)
    vec = exact_pagerank(k4, 0, 0.1)
    rep = pagerank_drop_check(k4, vec)
    assert rep.passed
    assert rep.details["loose_form_violations"] > 0


def test_escape_alpha_one_all_good(c8):
    S = VertexSet((0, 1, 2))
    rep = escape_mass_check(c8, S, 1.0)
    assert rep.passed
    assert len(rep.details["good_seeds"]) == 3


def test_escape_dumbbell_and_cycle(d8):
    S = VertexSet(tuple(range(8)))
    phi = edge_expansion(d8, S)
    rep = escape_mass_check(d8, S, 3 * phi)
    assert rep.passed
    good = rep.details["good_seeds"]
    assert len(good) >= 4
    assert all(rep.details["masses"][s] >= 2 / 3 - 1e-9 for s in good)

    c16 = gen_cycle(16)
    S = VertexSet((0, 1, 2, 3))
    phi = edge_expansion(c16, S)
    rep = escape_mass_check(c16, S, 3 * phi)
    assert rep.passed
    assert all(rep.details["masses"][s] >= 2 / 3 - 1e-9
               for s in rep.details["good_seeds"])


def test_pagerank_partition_dumbbell():
    g = gen_dumbbell(16)
    clique = VertexSet(tuple(range(16)))
    phi_a = edge_expansion(g, clique)
    for mode in ("exact", "push"):
        best, vec = pagerank_partition(g, 3, phi_a, 16, mode=mode)
        assert best.phi <= phi_a + 1e-12
        cap = math.ceil((3 if mode == "exact" else 6) * 16 * math.log(16))
        assert best.set.size <= cap
    with pytest.raises(PreconditionError):
        pagerank_partition(g, 3, 0.0, 16)
    with pytest.raises(PreconditionError):
        pagerank_partition(g, 3, phi_a, 1)


def test_pagerank_certificates_cycle():
    g = gen_cycle(64)
    S = VertexSet(tuple(range(8)))
    rep = pagerank_certificates(g, S, k=2, phi_k=1.0 / 32.0)
    assert rep.passed, rep.violation
    assert rep.details["constants"] == [36, 1152]
    seeds = rep.details["seeds"]
    assert seeds and all(e["initial_index"] is not None for e in seeds)
    assert rep.details["phi_v_source"] == "lambda2/4"


def test_pagerank_certificates_planted():
    g = gen_planted_partition(16, 4, 0.9, 0)
    S = VertexSet((0, 1, 2, 3))
    rep = pagerank_certificates(g, S, k=2,
                                phi_k=phi_v_lower_bound(g) * 2)
    assert rep.passed, rep.violation


def test_pagerank_certificates_bruteforce_paths():
    # n <= 20: phi_v brute-forced; n <= 14: phi_k brute-forced
    g = gen_cycle(14)
    S = VertexSet((0, 1))
    rep = pagerank_certificates(g, S, k=2)
    assert rep.passed
    assert rep.details["phi_v_source"] == "bruteforce"


def test_pagerank_certificates_precondition():
    g = gen_dumbbell(8)
    S = VertexSet(tuple(range(8)))      # 3*8*ln 8 = 49.9 > 16 vertices
    with pytest.raises(PreconditionError):
        pagerank_certificates(g, S)
