"""Acceptance criteria A1-A10.

Each test appends one PASS/FAIL line that is echoed in the terminal summary.
Magnitude thresholds were frozen from a pilot batch run on separate seeds
(pilot values noted next to each threshold).
"""
import itertools
import os
from types import SimpleNamespace

import networkx as nx
import numpy as np
import pytest

import test_measures as tm
from conftest import ACCEPTANCE_LINES
from interdiff.batch import emit, run_batch, run_replications
from interdiff.cli import threshold_table
from interdiff.dynamics import SimConfig
from interdiff.graphs import KnowledgeGraph, bounded_distance, caveman_ring, dodecahedron
from interdiff.measures import bootstrap_mean_ci, degree_preserving_shuffle
from interdiff.toymodels import knowledge_graph_beliefs, triangle_rule_converge

N_PAIRS = 500
N_FOCUS = 1000
WORKERS = os.cpu_count() or 1


def report(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def final_gap(runs, field):
    a = np.array([getattr(r.inter[-1], field) for r in runs])
    b = np.array([getattr(r.indep[-1], field) for r in runs])
    d = a - b
    return d[~np.isnan(d)]


def ci(d, seed=0):
    return bootstrap_mean_ci(d, np.random.default_rng(seed), n_boot=4000)


@pytest.fixture(scope="module")
def start_matched():
    return run_replications(SimConfig(t_match=0, seed=20260001), N_PAIRS, WORKERS)


@pytest.fixture(scope="module")
def final_matched():
    return run_replications(SimConfig(t_match=9, seed=20260002), N_FOCUS, WORKERS)


def test_a1_adoption_divergence(start_matched):
    d = final_gap(start_matched, "frac_adopting")
    lo, hi = ci(d)
    ok = d.mean() > 0.30 and lo > 0   # pilot gap 0.468
    report("A1", ok, f"adopted inter-indep at t=10 = {d.mean():.4f}, 95% CI [{lo:.4f}, {hi:.4f}], threshold 0.30")


def test_a2_prediction_decay(final_matched):
    d = -final_gap(final_matched[:N_PAIRS], "prediction_correlation")
    lo, hi = ci(d)
    ok = d.mean() > 0 and lo > 0   # pilot 0.458
    report("A2", ok, f"prediction corr indep-inter at t=10 = {d.mean():.4f}, 95% CI [{lo:.4f}, {hi:.4f}]")


def focus_group_rate(runs, cond, lo=1.2, hi=1.3):
    """Share of belief pairs, pooled over runs, whose more-susceptible member ends more popular.

    Pairs are ordered (i, j) with s0[i] / s0[j] in [lo, hi]: a roughly 25% difference.
    """
    wins = total = 0
    for r in runs:
        counts = getattr(r, f"{cond}_counts")
        s0 = counts.initial_susceptible.astype(float)
        pop = counts.final_popularity
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = s0[:, None] / s0[None, :]
        i, j = np.nonzero((ratio >= lo - 1e-12) & (ratio <= hi + 1e-12) & (s0[None, :] > 0))
        wins += int((pop[i] > pop[j]).sum())
        total += i.shape[0]
    return wins / total, total


def test_a3_focus_group(final_matched):
    indep, n_i = focus_group_rate(final_matched, "indep")
    inter, n_d = focus_group_rate(final_matched, "inter")
    ok = indep > 0.94 and 0.50 <= inter <= 0.65   # pilot 0.982 / 0.572
    report("A3", ok, f"more-susceptible belief wins: indep {indep:.3f} ({n_i} pairs), inter {inter:.3f} ({n_d} pairs)")


def test_a4_popular_clustering(final_matched):
    runs = final_matched[:N_PAIRS]
    d = final_gap(runs, "popular_clustering")
    lo, hi = ci(d)
    table = threshold_table(SimpleNamespace(runs=runs), [0.05, 0.1, 0.2, 0.3, 0.4])
    gaps = {row["threshold"]: row["popular belief clustering (inter)"] - row["popular belief clustering (indep)"]
            for row in table}
    ok = d.mean() > 0 and lo > 0 and all(g > 0 for g in gaps.values())
    sweep = ", ".join(f"{t:g}:{g:+.4f}" for t, g in gaps.items())
    report("A4", ok, f"clustering gap at 10% = {d.mean():.4f}, CI [{lo:.4f}, {hi:.4f}]; by threshold {sweep}")


def test_a5_polarization(final_matched):
    runs = final_matched[:N_PAIRS]
    top = final_gap(runs, "sim_p95")
    bottom = -final_gap(runs, "sim_p05")
    (tl, th), (bl, bh) = ci(top), ci(bottom, 1)
    ok = tl > 0 and bl > 0
    report("A5", ok, f"95% similarity inter-indep {top.mean():.4f} CI [{tl:.4f}, {th:.4f}]; "
                     f"5% similarity indep-inter {bottom.mean():.4f} CI [{bl:.4f}, {bh:.4f}]")


def test_a6_axis_alignment(final_matched):
    d = final_gap(final_matched[:N_PAIRS], "pc1_pct")
    lo, hi = ci(d)
    report("A6", d.mean() > 0 and lo > 0, f"PC1 % inter-indep = {d.mean():.3f}, CI [{lo:.3f}, {hi:.3f}]")


def _enumerate_triangle_closure():
    """Every subset of K4's edges closed one triangle at a time; returns per-edge new adoptions."""
    edges = list(itertools.combinations(range(4), 2))
    new = dict.fromkeys(edges, 0)
    for k in range(2 ** 6):
        held = {e for i, e in enumerate(edges) if k >> i & 1}
        start = set(held)
        grew = True
        while grew:
            grew = False
            for a, b, c in itertools.permutations(range(4), 3):
                if tuple(sorted((a, b))) in held and tuple(sorted((b, c))) in held:
                    e = tuple(sorted((a, c)))
                    if e not in held:
                        held.add(e)
                        grew = True
        for e in held - start:
            new[e] += 1
    return [new[e] for e in edges]


def test_a7_toy_symmetry():
    res = triangle_rule_converge(4)
    counts = res.new_adoptions.tolist()
    oracle = _enumerate_triangle_closure()
    assert knowledge_graph_beliefs(4) == list(itertools.combinations(range(4), 2))
    ok = counts == oracle and len(set(counts)) == 1
    report("A7", ok, f"triangle rule new adoptions {counts}, enumerator {oracle}")


def _all_8_node_graphs():
    """Every 8-node graph up to isomorphism: a 7-node atlas graph plus a vertex joined to any subset."""
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() != 7:
            continue
        base = nx.to_numpy_array(g, nodelist=range(7)) > 0
        for mask in range(128):
            adj = np.zeros((8, 8), dtype=bool)
            adj[:7, :7] = base
            link = (mask >> np.arange(7)) & 1 == 1
            adj[7, :7] = adj[:7, 7] = link
            yield adj


def test_a8_oracle_suite():
    """Bounded BFS over every 8-node graph, then the measure oracles from test_measures."""
    checked = 0
    pairs = np.array(list(itertools.combinations(range(8), 2)))
    for adj in _all_8_node_graphs():
        reach2 = adj | ((adj.astype(np.int64) @ adj.astype(np.int64)) > 0)
        kg = KnowledgeGraph.from_adjacency(adj)
        for a, b in pairs:
            want = 1 if adj[a, b] else 2 if reach2[a, b] else None
            if bounded_distance(kg, int(a), int(b), 2) != want:
                report("A8", False, f"bounded BFS disagrees on {adj.astype(int).tolist()} ({a},{b})")
        checked += 1

    tm.test_popular_clustering_matches_triangle_oracle()
    tm.test_pc1_matches_covariance_eigendecomposition()
    tm.test_pearson_equals_phi_on_binary_rows()
    rng = np.random.default_rng(8)
    for seed in range(50):
        m = rng.random((20, 22)) < rng.uniform(0.1, 0.9)
        s = degree_preserving_shuffle(m, np.random.default_rng(seed))
        assert (s.sum(0) == m.sum(0)).all() and (s.sum(1) == m.sum(1)).all()
    for df, t_crit, alpha in [(9, 1.8331, 0.05), (29, 2.4620, 0.01)]:
        tm.test_ttest_against_t_table(df, t_crit, alpha)
    report("A8", True, f"bounded BFS agrees on all {checked} extended 8-node graphs; "
                       "clustering, PC1, phi, shuffle margins and t-table oracles agree")


def test_a9_determinism(tmp_path):
    cfg = SimConfig(seed=99)
    one = emit(run_batch(cfg, 16, n_workers=1), "csv", tmp_path / "w1.csv")
    eight = emit(run_batch(cfg, 16, n_workers=8), "csv", tmp_path / "w8.csv")
    same = (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w8.csv").read_bytes() and one == eight
    report("A9", same, f"16 pairs, workers 1 vs 8: {'byte-identical' if same else 'differ'}")


def test_a10_structural_networks():
    dod, cave = dodecahedron(), caveman_ring()
    dod_c, dod_l = dod.average_clustering(), dod.mean_shortest_path()
    cave_c, cave_l = cave.average_clustering(), cave.mean_shortest_path()
    checks = {
        "dodecahedron clustering 0": dod_c == 0.0,
        "dodecahedron path 2.6+-0.05": abs(dod_l - 2.6) <= 0.05,
        "caveman clustering 0.5+-0.01": abs(cave_c - 0.5) <= 0.01,
        "caveman path 4+-0.05": abs(cave_l - 4) <= 0.05,
    }
    failed = [k for k, v in checks.items() if not v]
    report("A10", not failed,
           f"dodecahedron C={dod_c:.3f} L={dod_l:.4f}; caveman C={cave_c:.3f} L={cave_l:.4f}"
           + (f"; failing: {', '.join(failed)}" if failed else ""))
