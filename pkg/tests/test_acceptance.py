"""Acceptance suite: one test and one printed verdict line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``; the verdict lines
appear in the "acceptance" section of the terminal summary.
"""

import itertools
import math
import statistics
import time

import pytest

from conftest import ACCEPTANCE
from streamspanner import streamsort
from streamspanner.core import build_sampling_hierarchy
from streamspanner.graph_io import distinct_edges, gen_complete, gen_gnp, sort_by_weight
from streamspanner.incremental import run_single_pass, run_sorted_weighted
from streamspanner.verifier import (
    BuildStats,
    check_cluster_invariants,
    check_cluster_radius,
    check_deletion_witnesses,
    check_property_P,
    check_size_and_work,
    check_streamsort_accounting,
    check_stretch,
    size_bound,
)

KS = (1, 2, 3)
NS = (60, 120)
PS = (0.1, 0.3)
SEEDS = range(25)
CONFIGS = list(itertools.product(KS, NS, PS))


def verdict(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE[num] = line
    print(line)


def _seed(k, n, p, s):
    # hierarchy seed, distinct from the graph seed
    return 1000 * k + 10 * n + int(p * 100) * 7 + s


def _graph(n, p, s, weights=None):
    return gen_gnp(n, p, s, weights)


def test_stretch_all_pairs():
    start = time.perf_counter()
    runs = fails = 0
    worst = 1.0
    for k, n, p in CONFIGS:
        for s in SEEDS:
            g = _graph(n, p, s)
            state = run_single_pass(build_sampling_hierarchy(n, k, _seed(k, n, p, s)), g)
            r = check_stretch(n, g, state.spanner_edges(), 2 * k - 1, mode="pairs")
            runs += 1
            fails += not r.ok
            worst = max(worst, r.metrics["max_stretch_ratio"] / (2 * k - 1))
    elapsed = time.perf_counter() - start
    ok = fails == 0 and elapsed < 60
    verdict(1, ok, f"runs={runs} failures={fails} worst_ratio/(2k-1)={worst:.3f} seconds={elapsed:.1f}")
    assert ok


def test_prefix_spanners():
    runs = fails = 0
    for k, n, p in CONFIGS:
        for s in SEEDS:
            edges = _graph(n, p, s).edges()
            m = len(edges)
            cuts = {m // 4, m // 2, 3 * m // 4, m}
            state = run_single_pass(build_sampling_hierarchy(n, k, _seed(k, n, p, s)), [])
            for idx, e in enumerate(edges, start=1):
                state.process_edge(*e)
                if idx in cuts:
                    runs += 1
                    fails += not check_stretch(n, edges[:idx], state.spanner_edges(), 2 * k - 1, mode="pairs").ok
    verdict(2, fails == 0, f"prefix_checks={runs} failures={fails}")
    assert fails == 0


def test_sorted_weighted_stretch():
    runs = fails = 0
    for k, n, p in itertools.product((2, 3), NS, PS):
        for s in SEEDS:
            g = _graph(n, p, s, (1, 100))
            state = run_sorted_weighted(build_sampling_hierarchy(n, k, _seed(k, n, p, s)), sort_by_weight(g))
            runs += 1
            fails += not check_stretch(n, g, state.spanner_edges(), 2 * k - 1, mode="pairs").ok
    verdict(3, fails == 0, f"runs={runs} failures={fails}")
    assert fails == 0


@pytest.fixture(scope="module")
def streamsort_runs():
    out = []
    for k, n, p in CONFIGS:
        for s in SEEDS:
            g = _graph(n, p, s, (1, 100))
            res = streamsort.run(k, _seed(k, n, p, s), g, n, snapshots=True)
            out.append((k, n, g, res))
    return out


def test_streamsort(streamsort_runs):
    fails = 0
    passes = {}
    max_state = 0
    for k, n, g, res in streamsort_runs:
        r = check_stretch(n, g, res.spanner, 2 * k - 1, mode="pairs").merge(check_streamsort_accounting(res))
        fails += not r.ok
        passes[k] = max(passes.get(k, 0), res.accounting.total_passes)
        max_state = max(max_state, res.accounting.max_state_records)
    c = streamsort.PASS_CONSTANT
    ok = fails == 0 and c <= 12 and max_state <= 4 and all(v <= c * k for k, v in passes.items())
    verdict(4, ok, f"runs={len(streamsort_runs)} failures={fails} c={c} "
                   f"max_passes={passes} max_state_records={max_state}")
    assert ok


def test_size_complete_graph():
    n, k = 300, 2
    runs = []
    for s in range(20):
        g = gen_complete(n, s)
        state = run_single_pass(build_sampling_hierarchy(n, k, s), g)
        runs.append(BuildStats.from_state(state))
    report = check_size_and_work(runs, size_factor=4)
    m = runs[0].m
    mean = report.metrics["mean_size"]
    hooks_ok = all(r.hook_edges <= n * (k - 1) for r in runs)
    ok = mean <= 4 * size_bound(n, k) and mean <= m / 3 and hooks_ok
    verdict(5, ok, f"mean_size={mean:.0f} 4*bound={4 * size_bound(n, k):.0f} m/3={m / 3:.0f} "
                   f"max_hooks={report.metrics['max_hook_edges']} hook_bound={n * (k - 1)}")
    assert ok


def test_amortized_prune_work():
    n = 300
    worst_bound = 0.0
    bound_ok = True
    spreads = {}
    for k in (2, 3):
        means = []
        for p in (0.05, 0.1, 0.2, 0.4):
            ratios = []
            for s in range(5):
                g = gen_gnp(n, p, s)
                st = run_single_pass(build_sampling_hierarchy(n, k, s), g)
                m = st.edges_processed
                bound_ok &= st.prune_scans <= 10 * (m + k * n)
                worst_bound = max(worst_bound, st.prune_scans / (m + k * n))
                ratios.append(st.prune_scans / m)
            means.append(statistics.mean(ratios))
        spreads[k] = max(max(a, b) / min(a, b) for a, b in zip(means, means[1:]))
    ok = bound_ok and all(v < 2 for v in spreads.values())
    detail = " ".join(f"k{k}_max_step_change={v:.3f}" for k, v in spreads.items())
    verdict(6, ok, f"max_scans/(m+kn)={worst_bound:.3f} {detail}")
    assert ok


def test_debug_suites(streamsort_runs):
    failed = []
    runs = 0
    for k, n, p in CONFIGS:
        for s in SEEDS:
            for weighted in (False, True):
                g = _graph(n, p, s, (1, 100) if weighted else None)
                h = build_sampling_hierarchy(n, k, _seed(k, n, p, s))
                if weighted:
                    st = run_sorted_weighted(h, sort_by_weight(g), check_invariants=True)
                else:
                    st = run_single_pass(h, g, check_invariants=True)
                r = check_cluster_invariants(st).merge(check_cluster_radius(st))
                runs += 1
                if not r.ok:
                    failed.append((k, n, p, s, weighted))
    for k, n, g, res in streamsort_runs:
        r = check_deletion_witnesses(res)
        for snap in res.snapshots:
            r.merge(check_property_P(snap, n))
        runs += 1
        if not r.ok:
            failed.append(("streamsort", k, n))
    verdict(7, not failed, f"suites={runs} violations={len(failed)}")
    assert not failed


def test_k1_is_identity():
    mismatches = 0
    for n, p in itertools.product(NS, PS):
        for s in range(5):
            g = _graph(n, p, s, (1, 100))
            edges = g.edges()
            edges += edges[: len(edges) // 5]  # repeated edges must collapse
            want = distinct_edges(edges)
            single = run_single_pass(build_sampling_hierarchy(n, 1, s), edges).spanner_edges()
            ordered = sorted(edges, key=lambda e: e[2])
            weighted = run_sorted_weighted(build_sampling_hierarchy(n, 1, s), ordered).spanner_edges()
            stream = streamsort.run(1, s, edges, n).edge_set()
            mismatches += (single != want) + (weighted != want) + (stream != want)
    verdict(8, mismatches == 0, f"mismatches={mismatches}")
    assert mismatches == 0


@pytest.mark.slow
def test_geometric_cluster_adjacency():
    n, k = 10_000, 2
    per_seed = []
    for s in range(20):
        st = run_single_pass(build_sampling_hierarchy(n, k, s), gen_gnp(n, 0.03, s))
        per_seed.append(statistics.mean(st.rep_counts[0][1:]))
    mean = statistics.mean(per_seed)
    se = statistics.stdev(per_seed) / math.sqrt(len(per_seed))
    target = n ** (1 / k)
    ok = mean <= target + 3 * se
    verdict(9, ok, f"mean={mean:.2f} se={se:.3f} target={target:.0f}")
    assert ok
