"""Acceptance suite: one criterion per test, one printed verdict line each.

Every gate runs at its stated tolerance with the full fixture grid; measured
O(.) constants are emitted by criterion 10 through the harness, never gated.
"""

import math
import time

import numpy as np
import pytest

from partlab.expansion import VertexSet, edge_expansion
from partlab.graphs import (gen_complete, gen_cycle, gen_dumbbell,
                            gen_hypercube, gen_planted_partition, planted_part)
from partlab.pagerank import (approximate_push, exact_pagerank,
                              escape_mass_check, pagerank_certificates,
                              pagerank_drop_check, pagerank_partition)
from partlab.partitioner import (current_sweep, drop_lemma_check, sweep_cut,
                                 theorem_kway_certificate,
                                 theorem_product_certificate)
from partlab.powering import (power_spectrum_check, reduction_checks,
                              sqrt_t_power_check)
from partlab.spectral import dense_spectrum, eigenpairs, lambda2_pair
from partlab.walks import (rayleigh_bound_check, exact_walk,
                           spectral_sparsity_check, staying_probability_check,
                           truncated_quality_checks, walk_partition)

PLANTED_GRIDS = [(2, 64, 0.9), (4, 16, 0.9)]
PLANTED_SEEDS = list(range(20))


def _grid():
    instances = []
    for n in range(4, 257):
        instances.append((f"cycle{n}", gen_cycle(n)))
    for d in range(1, 9):
        instances.append((f"hypercube{d}", gen_hypercube(d)))
    for n in range(3, 65):
        instances.append((f"complete{n}", gen_complete(n)))
    for m in range(3, 33):
        instances.append((f"dumbbell{m}", gen_dumbbell(m)))
    for k, m, p in PLANTED_GRIDS:
        for seed in PLANTED_SEEDS:
            instances.append((f"planted{k}x{m}s{seed}",
                              gen_planted_partition(k, m, p, seed)))
    return instances


@pytest.fixture(scope="module")
def grid():
    return _grid()


_LAMBDA2_CACHE: dict = {}


def _lam(name, g):
    if name not in _LAMBDA2_CACHE:
        _LAMBDA2_CACHE[name] = lambda2_pair(g)
    return _LAMBDA2_CACHE[name]


def _verdict(num, ok, elapsed, budget, detail):
    line = (f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} "
            f"[{elapsed:.1f}s/{budget:.0f}s] {detail}")
    print(line)
    assert ok, line
    assert elapsed <= budget, f"criterion {num} exceeded its runtime budget"


def test_criterion_1_cheeger_sandwich(grid):
    t0 = time.time()
    worst = ("", 0.0)
    ok = True
    for name, g in grid:
        pair = _lam(name, g)
        best, _ = sweep_cut(g, pair.vector)
        lo, hi = 0.5 * pair.value, math.sqrt(2.0 * pair.value)
        if not (best.phi >= lo * (1 - 1e-7) - 1e-12
                and best.phi <= hi * (1 + 1e-7) + 1e-12):
            ok = False
            worst = (name, best.phi)
            break
    _verdict(1, ok, time.time() - t0, 120,
             f"lambda2/2 <= phi(sweep) <= sqrt(2 lambda2) on {len(grid)} "
             f"instances" + ("" if ok else f"; first failure {worst}"))


def test_criterion_2_product_certificate(grid):
    t0 = time.time()
    failures = []
    for name, g in grid:
        rep = theorem_product_certificate(g)
        if not rep.passed:
            failures.append(name)
    _verdict(2, not failures, time.time() - t0, 120,
             f"constant-32 product certificate on {len(grid)} instances"
             + (f"; failures {failures}" if failures else ""))


def test_criterion_3_kway_certificate(grid):
    t0 = time.time()
    count = 0
    failures = []
    for name, g in grid:
        if g.n > 14:
            continue
        for k in (2, 3):
            if k > g.n:
                continue
            rep = theorem_kway_certificate(g, k)
            count += 1
            if not rep.passed:
                failures.append((name, k))
    _verdict(3, not failures, time.time() - t0, 180,
             f"constants 256/1024 k-way certificate on {count} (instance, k) "
             f"pairs" + (f"; failures {failures}" if failures else ""))


def test_criterion_4_drop_inequalities(grid):
    t0 = time.time()
    failures = []
    count = 0
    for name, g in grid:
        if g.n > 64:
            continue
        pair = _lam(name, g)
        reps = [drop_lemma_check(g, pair.vector, pair.value),
                pagerank_drop_check(g, exact_pagerank(g, 0, 0.1)),
                pagerank_drop_check(g, approximate_push(g, 0, 0.1, 1e-4))]
        count += 1
        failures.extend((name, r.theorem_id) for r in reps if not r.passed)
    _verdict(4, not failures, time.time() - t0, 120,
             f"all-pairs drop inequalities (eigen, exact pagerank, push "
             f"eps=1e-4) on {count} instances with n <= 64"
             + (f"; failures {failures}" if failures else ""))


def test_criterion_5_dense_oracle(grid):
    t0 = time.time()
    failures = []
    count = 0
    for name, g in grid:
        if g.n > 256:
            continue
        k = min(5, g.n)
        pairs = eigenpairs(g, k)
        dense, _ = dense_spectrum(g)
        count += 1
        if max(abs(pairs[i].value - dense[i]) for i in range(k)) > 1e-7:
            failures.append(name)
    q3_vals = np.sort(dense_spectrum(gen_hypercube(3))[0])
    q3_expected = np.array([0] + [2 / 3] * 3 + [4 / 3] * 3 + [2])
    if not np.allclose(q3_vals, q3_expected, atol=1e-9):
        failures.append("q3-spectrum")
    if abs(eigenpairs(gen_complete(4), 2)[1].value - 4 / 3) > 1e-8:
        failures.append("k4-lambda2")
    _verdict(5, not failures, time.time() - t0, 120,
             f"lambda2..lambda5 vs dense oracle (1e-7) on {count} instances, "
             f"Q3 spectrum, K4 lambda2"
             + (f"; failures {failures}" if failures else ""))


def _pagerank_fixtures():
    out = []
    for m in (8, 16):
        g = gen_dumbbell(m)
        out.append((f"dumbbell{m}", g, VertexSet(tuple(range(m)))))
    for n, size in ((16, 4), (32, 8), (64, 8), (128, 8)):
        out.append((f"cycle{n}", gen_cycle(n), VertexSet(tuple(range(size)))))
    for seed in (0, 1):
        g = gen_planted_partition(16, 4, 0.9, seed)
        out.append((f"planted16x4s{seed}", g, planted_part(16, 4, 0)))
    return out


def test_criterion_6_pagerank_certificates():
    t0 = time.time()
    failures = []
    escapes = certs = sandwiches = 0
    for name, g, S in _pagerank_fixtures():
        phi = edge_expansion(g, S)
        alpha = min(1.0, 3.0 * phi)
        rep = escape_mass_check(g, S, alpha)
        escapes += 1
        if not rep.passed:
            failures.append((name, "escape"))
        # push sandwich entrywise against the exact oracle, plus work gate
        eps = 1.0 / (6.0 * S.size)
        exact = exact_pagerank(g, S.members[0], alpha)
        pushed = approximate_push(g, S.members[0], alpha, eps)
        sandwiches += 1
        if not (np.all(pushed.values <= exact.values + 1e-9)
                and np.all(pushed.values >= exact.values - eps - 1e-9)):
            failures.append((name, "push-sandwich"))
        if pushed.pushes > 1.0 / (eps * alpha) + 1e-9:
            failures.append((name, "push-work"))
        if 3.0 * S.size * math.log(S.size) <= g.n:
            phi2_lb = (1.0 / (g.n // 2) if name.startswith("cycle")
                       else lambda2_pair(g).value / 2.0)
            rep = pagerank_certificates(g, S, k=2, phi_k=phi2_lb)
            certs += 1
            if not rep.passed:
                failures.append((name, "certificates"))
    _verdict(6, not failures, time.time() - t0, 180,
             f"escape bound ({escapes}), push sandwich+work ({sandwiches}), "
             f"36/1152 level-set certificates ({certs})"
             + (f"; failures {failures}" if failures else ""))


def _walk_fixtures():
    out = []
    for m in (8, 16):
        out.append((f"dumbbell{m}", gen_dumbbell(m),
                    VertexSet(tuple(range(m)))))
    for n in (32, 64):
        out.append((f"cycle{n}", gen_cycle(n), VertexSet(tuple(range(8)))))
    out.append(("hypercube4", gen_hypercube(4),
                VertexSet(tuple(range(8)))))
    out.append(("planted2x64", gen_planted_partition(2, 64, 0.9, 0),
                planted_part(2, 64, 0)))
    return out


def test_criterion_7_walk_certificates():
    t0 = time.time()
    failures = []
    checks = 0
    for name, g, S in _walk_fixtures():
        phi = edge_expansion(g, S)
        t = min(200, max(1, math.ceil(1.0 / phi)))
        for tt in (1, t):
            if not rayleigh_bound_check(g, exact_walk(g, S.members[0], tt)).passed:
                failures.append((name, f"rayleigh t={tt}"))
        if not staying_probability_check(g, S, t).passed:
            failures.append((name, "staying"))
        if not spectral_sparsity_check(g, S, t).passed:
            failures.append((name, "sparsity"))
        if phi <= 0.25:
            rep = truncated_quality_checks(g, S, epsilon=0.5)
            if not rep.passed:
                failures.append((name, "truncated-chain"))
        checks += 1
    _verdict(7, not failures, time.time() - t0, 180,
             f"rayleigh bound (1e-9), staying 1/200, sparsity 40000, "
             f"truncation sandwich, 80000/160000 chain on {checks} fixtures"
             + (f"; failures {failures}" if failures else ""))


def test_criterion_8_powering(grid):
    t0 = time.time()
    failures = []
    sqrt_checks = map_checks = 0
    for name, g in grid:
        if g.n <= 14:
            for t in (1, 2, 4, 9, 16):
                if not sqrt_t_power_check(g, t).passed:
                    failures.append((name, f"sqrt-t t={t}"))
                sqrt_checks += 1
        if g.n <= 64:
            rep = power_spectrum_check(g, 4, tol=1e-8)
            map_checks += 1
            if not rep.passed:
                failures.append((name, "spectrum-map"))
    for fixture, g, k in (("Q3", gen_hypercube(3), 3),
                          ("K4", gen_complete(4), 4),
                          ("C8", gen_cycle(8), 3)):
        rep = reduction_checks(g, k)
        if not rep.passed:
            failures.append((fixture, "reduction"))
    _verdict(8, not failures, time.time() - t0, 120,
             f"1/20 power bound ({sqrt_checks}), spectrum mapping 1e-8 "
             f"({map_checks}), reduction chain on Q3/K4/C8"
             + (f"; failures {failures}" if failures else ""))


def test_criterion_9_partition_quality():
    t0 = time.time()
    failures = []
    fixtures = [("dumbbell16", gen_dumbbell(16),
                 VertexSet(tuple(range(16))))]
    for seed in range(5):
        fixtures.append((f"planted2x64s{seed}",
                         gen_planted_partition(2, 64, 0.9, seed),
                         planted_part(2, 64, 0)))
    for name, g, S in fixtures:
        phi_s = edge_expansion(g, S)
        size = S.size
        s0 = S.members[0]
        outputs = {}
        pair = lambda2_pair(g)
        best, _ = sweep_cut(g, pair.vector)
        outputs["spectral"] = (best.phi, best.set.size, None)
        for mode in ("exact", "push"):
            b, _v = pagerank_partition(g, s0, phi_s, size, mode=mode)
            cap = math.ceil((3 if mode == "exact" else 6) * size * math.log(size))
            outputs[f"pagerank_{mode}"] = (b.phi, b.set.size, cap)
        for mode in ("exact", "truncated"):
            b, _v = walk_partition(g, s0, phi_s, size, epsilon=0.5, mode=mode)
            cap = min(g.n // 2, math.ceil(80000 * size ** 1.5))
            outputs[f"walk_{mode}"] = (b.phi, b.set.size, cap)
        b = current_sweep(g, s0)
        outputs["current"] = (b.phi, b.set.size, None)
        for algo, (phi, sz, cap) in outputs.items():
            if phi > phi_s + 1e-12:
                failures.append((name, algo, "quality"))
            if cap is not None and sz > cap:
                failures.append((name, algo, "size-cap"))
    _verdict(9, not failures, time.time() - t0, 180,
             f"spectral/pagerank/walk/current all reach phi <= phi(target) "
             f"with size caps on {len(fixtures)} fixtures"
             + (f"; failures {failures}" if failures else ""))


def test_criterion_10_measured_constant_ledger(tmp_path):
    t0 = time.time()
    cfg = tmp_path / "ledger.toml"
    cfg.write_text("""
[[families]]
generator = "dumbbell"
m = 16

[[families]]
generator = "planted"
k = 2
m = 64
p_in = 0.9
seeds = [0]

[[suites]]
name = "pagerank"

[[suites]]
name = "walks"

[[suites]]
name = "partition_quality"
""")
    from partlab.harness import run
    code = run(cfg, output_dir=tmp_path / "out")
    table = (tmp_path / "out" / "measured_constants.csv").read_text().splitlines()
    header, rows = table[0], table[1:]
    bounds = {line.split(",")[3] for line in rows}
    expected = {"push_work_over_budget", "truncated_rayleigh_eps_over_phi",
                "pagerank_quality_vs_philog_over_phiv",
                "walks_quality_eps_phik_over_kphi",
                "current_sweep_vs_sqrt_philog"}
    ok = (code == 0
          and header == "family,n,seed,bound,value"
          and expected <= bounds
          and (tmp_path / "out" / "figures" / "measured_constants.png").exists())
    _verdict(10, ok, time.time() - t0, 120,
             f"harness emits {len(rows)} measured-constant rows covering "
             f"{sorted(bounds)} plus figures")
