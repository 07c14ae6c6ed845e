import io
import itertools
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_lift, digraphs
from digcomm import engine
from digcomm.centrality import CentralityMethod, node_scores
from digcomm.engine import ModificationPlan, compare_methods, run_brute_force, run_greedy, run_rank2
from digcomm.errors import CapacityError, MethodInapplicable, ParameterError
from digcomm.graph import (
    DOWNDATE,
    CandidateSet,
    UPDATE,
    Digraph,
    apply_modification,
    enumerate_candidates,
    iter_candidate_blocks,
    permute,
    random_digraph,
)

DETERMINISTIC = ["hits", "gtc", "tc", "b:eig", "b:tc", "b:deg"]


def oracle_totals(a):
    """T_hC and T_aC read off the diagonal blocks of scipy's expm of the lift."""
    n = a.shape[0]
    e = scipy.linalg.expm(dense_lift(a))
    return e[:n, :n].sum(), e[n:, n:].sum()


def test_plan_validation():
    with pytest.raises(ParameterError):
        ModificationPlan(UPDATE, 0, CentralityMethod("gtc"))
    with pytest.raises(ParameterError):
        ModificationPlan("grow", 1, CentralityMethod("gtc"))
    with pytest.raises(ParameterError):
        ModificationPlan(UPDATE, 1, CentralityMethod("gtc"), fraction=0)
    assert ModificationPlan(UPDATE, 1, "gtc.no").method == CentralityMethod("gtc", False)


# -- selection ---------------------------------------------------------------------


@given(st.lists(st.integers(0, 4), min_size=1, max_size=60), st.integers(1, 8), st.booleans(),
       st.integers(1, 7))
def test_select_extreme_matches_sorting(values, k, largest, block):
    n = 10
    src = np.arange(len(values)) // n
    dst = np.arange(len(values)) % n
    score = np.array(values, dtype=float)

    def blocks():
        for s in range(0, len(values), block):
            yield CandidateSet(UPDATE, src[s:s + block], dst[s:s + block])

    lookup = {(i, j): v for i, j, v in zip(src, dst, score)}
    got = engine.select_extreme(blocks(), lambda a, b: np.array([lookup[(x, y)] for x, y in zip(a, b)]),
                                k, largest)
    order = sorted(lookup, key=lambda p: (-lookup[p] if largest else lookup[p], p))
    assert got == [(int(i), int(j)) for i, j in order[:k]]


@given(digraphs(min_edges=1, max_n=9), st.sampled_from(DETERMINISTIC))
def test_fast_argmax_matches_generic(g, method):
    ns = node_scores(g, CentralityMethod.parse(method))
    q = engine.tie_quantum(ns)
    generic = engine.select_extreme(iter_candidate_blocks(g, UPDATE), ns.score, 1, True, q)
    assert engine._best_virtual_edge(g, ns, None, q) == generic


def test_rounding_noise_ties_go_to_smallest_pair():
    # nodes 1 and 2 are interchangeable, so (0, 1) and (0, 2) tie in exact arithmetic
    g = Digraph.from_edges(4, [(1, 3), (2, 3), (3, 1), (3, 2), (0, 3)])
    for method in DETERMINISTIC:
        t = run_greedy(g, ModificationPlan(UPDATE, 1, CentralityMethod.parse(method)))
        e = t.chosen_edges[0]
        swapped = tuple({1: 2, 2: 1}.get(x, x) for x in e)
        assert e <= swapped, method


# -- greedy runs ---------------------------------------------------------------------


def test_gtc_first_update_on_example(ex):
    table_h = np.array([1.1752, 2.7366, 1.3683, 1.3683])
    table_a = np.array([1.3683, 2.7366, 1.1752, 1.3683])
    cand = enumerate_candidates(ex, UPDATE)
    products = {p: table_h[p[0]] * table_a[p[1]] for p in cand}
    best = max(products.values())
    expected = min(p for p, v in products.items() if abs(v - best) < 1e-9)
    t = run_greedy(ex, ModificationPlan(UPDATE, 1, CentralityMethod("gtc")))
    assert t.chosen_edges == [expected] == [(0, 1)]
    assert len(t) == 2


def test_downdate_to_empty(ex):
    t = run_greedy(ex, ModificationPlan(DOWNDATE, ex.m, CentralityMethod("gtc")))
    assert t.steps[-1].thc == pytest.approx(4, abs=1e-12)
    assert t.steps[-1].tac == pytest.approx(4, abs=1e-12)
    assert t.final_graph.m == 0
    assert sorted(t.chosen_edges) == ex.edge_list()


def test_random_is_reproducible(ex):
    a = run_greedy(ex, ModificationPlan(UPDATE, 4, CentralityMethod("random"), seed=3))
    b = run_greedy(ex, ModificationPlan(UPDATE, 4, CentralityMethod("random"), seed=3))
    assert a.chosen_edges == b.chosen_edges


@pytest.mark.parametrize("method", DETERMINISTIC + ["random"])
def test_update_trajectory_contract(method):
    g = random_digraph(15, 0.15, seed=11)
    t = run_greedy(g, ModificationPlan(UPDATE, 6, CentralityMethod.parse(method)))
    assert len(t) == 7 and t.scoring_passes == 6
    assert np.all(np.diff(t.thc) >= -1e-10) and np.all(np.diff(t.tac) >= -1e-10)
    assert len(set(t.chosen_edges)) == 6
    h = g
    for e in t.chosen_edges:
        h = apply_modification(h, e, UPDATE)
    assert h == t.final_graph
    for step in t.steps:
        assert step.elapsed_s >= 0


@pytest.mark.parametrize("method", DETERMINISTIC + ["random"])
def test_no_variant_single_scoring_pass(method):
    g = random_digraph(15, 0.15, seed=12)
    t = run_greedy(g, ModificationPlan(UPDATE, 6, CentralityMethod.parse(method + ".no")))
    assert t.scoring_passes == 1 and len(t) == 7


def test_no_variant_takes_top_k_of_initial_scores():
    g = random_digraph(12, 0.2, seed=5)
    cand = enumerate_candidates(g, UPDATE)
    ns = node_scores(g, CentralityMethod("gtc"))
    s = ns.score(cand.src, cand.dst)
    order = sorted(range(cand.tau), key=lambda c: (-s[c], cand.pairs[c]))[:5]
    t = run_greedy(g, ModificationPlan(UPDATE, 5, CentralityMethod("gtc", False)))
    assert t.chosen_edges == [cand.pairs[c] for c in order]


def test_no_variant_downdate_takes_bottom_k():
    g = random_digraph(12, 0.3, seed=6)
    ns = node_scores(g, CentralityMethod("hits"))
    s = ns.score(g.edges[:, 0], g.edges[:, 1])
    order = sorted(range(g.m), key=lambda c: (s[c], g.edge_list()[c]))[:4]
    t = run_greedy(g, ModificationPlan(DOWNDATE, 4, CentralityMethod("hits", False)))
    assert t.chosen_edges == [g.edge_list()[c] for c in order]


def test_truncation_when_candidates_run_out(ex):
    with pytest.warns(RuntimeWarning):
        t = run_greedy(ex, ModificationPlan(UPDATE, 10, CentralityMethod("gtc")))
    assert t.truncated and len(t) == 8
    with pytest.warns(RuntimeWarning):
        t = run_greedy(ex, ModificationPlan(UPDATE, 10, CentralityMethod("gtc", False)))
    assert t.truncated and len(t) == 8


def test_inapplicable_method_raises_before_mutation(single_edge):
    with pytest.raises(MethodInapplicable):
        run_greedy(single_edge, ModificationPlan(UPDATE, 1, CentralityMethod("eig")))


def test_downdate_sigma_sandwich():
    g = random_digraph(14, 0.25, seed=9)
    t = run_greedy(g, ModificationPlan(DOWNDATE, 12, CentralityMethod("hits")))
    h = g
    prev = np.linalg.norm(h.dense(), 2)
    for e in t.chosen_edges:
        h = apply_modification(h, e, DOWNDATE)
        cur = np.linalg.norm(h.dense(), 2)
        assert cur <= prev + 1e-12
        prev = cur


def test_restricted_candidates_stay_inside_top_nodes():
    g = random_digraph(40, 0.08, seed=13)
    from digcomm.graph import top_nodes
    nodes = set(top_nodes(g, 0.25).tolist())
    t = run_greedy(g, ModificationPlan(UPDATE, 5, CentralityMethod("gtc"), fraction=0.25))
    assert all(i in nodes and j in nodes for i, j in t.chosen_edges)


@pytest.mark.parametrize("method", DETERMINISTIC)
def test_permutation_equivariance(method):
    g = random_digraph(10, 0.25, seed=0)
    p = np.random.default_rng(4).permutation(g.n)
    m = CentralityMethod.parse(method)
    cand = enumerate_candidates(g, UPDATE)
    s = np.sort(node_scores(g, m).score(cand.src, cand.dst))
    assert s[-1] - s[-2] > 1e-9 * s[-1]  # tie-free maximizer
    t = run_greedy(g, ModificationPlan(UPDATE, 1, m))
    tp = run_greedy(permute(g, p), ModificationPlan(UPDATE, 1, m))
    assert tp.chosen_edges == [(int(p[i]), int(p[j])) for i, j in t.chosen_edges]


# -- trajectory I/O -------------------------------------------------------------------


def test_trajectory_csv_roundtrip(ex):
    t = run_greedy(ex, ModificationPlan(UPDATE, 3, CentralityMethod("tc")), track_tc=True)
    text = t.to_csv()
    header = text.splitlines()[0].split(",")
    assert header[:9] == ["step", "edge_src", "edge_dst", "thc", "tac", "tc", "thc_per_edge",
                          "tac_per_edge", "elapsed_s"]
    back = engine.read_trajectory_csv(io.StringIO(text), t.label, UPDATE, ex.n)
    assert back.steps == t.steps
    assert back.m0 == ex.m
    assert back.steps[1].tc > back.steps[0].tc


def test_metrics_off_records_nan_after_step0(ex):
    t = run_greedy(ex, ModificationPlan(UPDATE, 2, CentralityMethod("gtc")), metrics=False)
    assert np.isfinite(t.steps[0].thc) and math.isnan(t.steps[2].thc)


# -- brute force ----------------------------------------------------------------------


def test_brute_force_single_edge(single_edge):
    t = run_brute_force(single_edge, UPDATE, 1, "sum")
    assert t.chosen_edges == [(1, 0)]


def test_brute_force_guard():
    with pytest.raises(CapacityError, match="100"):
        run_brute_force(random_digraph(101, 0.01, seed=1), UPDATE, 1)
    with pytest.raises(ParameterError):
        run_brute_force(Digraph.from_edges(2, [(0, 1)]), UPDATE, 1, "max")


def exhaustive_greedy(g, kind, k, objective):
    a = g.dense()
    chosen = []
    for _ in range(k):
        best = None
        if kind == UPDATE:
            cand = [(i, j) for i in range(g.n) for j in range(g.n) if i != j and a[i, j] == 0]
        else:
            cand = [(i, j) for i in range(g.n) for j in range(g.n) if a[i, j] == 1]
        for i, j in cand:
            b = a.copy()
            b[i, j] = 1 - b[i, j]
            h, au = oracle_totals(b)
            val = h + au if objective == "sum" else h * au
            if best is None or val > best[0] + 1e-9 * abs(best[0]):
                best = (val, (i, j))
        chosen.append(best[1])
        a[best[1]] = 1 - a[best[1]]
    return chosen


@pytest.mark.parametrize("kind,objective", [(UPDATE, "sum"), (UPDATE, "prod"), (DOWNDATE, "sum")])
def test_brute_force_matches_independent_greedy(kind, objective):
    g = random_digraph(8, 0.3, seed=17)
    t = run_brute_force(g, kind, 3, objective)
    assert t.chosen_edges == exhaustive_greedy(g, kind, 3, objective)
    a = t.final_graph.dense()
    np.testing.assert_allclose(oracle_totals(a), (t.steps[-1].thc, t.steps[-1].tac), rtol=1e-10)


def test_brute_force_objectives_coincide_under_dominance():
    # star 0->1: adding 1->0 dominates every other single update in both indices
    g = Digraph.from_edges(3, [(0, 1), (0, 2)])
    cand = enumerate_candidates(g, UPDATE)
    vals = [oracle_totals(apply_modification(g, e, UPDATE).dense()) for e in cand]
    best_h = max(range(len(vals)), key=lambda c: vals[c][0])
    best_a = max(range(len(vals)), key=lambda c: vals[c][1])
    if best_h == best_a:
        s = run_brute_force(g, UPDATE, 1, "sum").chosen_edges
        p = run_brute_force(g, UPDATE, 1, "prod").chosen_edges
        assert s == p == [cand.pairs[best_h]]


@given(digraphs(min_edges=1, max_n=8))
def test_brute_force_dominates_heuristics_at_first_step(g):
    if enumerate_candidates(g, UPDATE).tau == 0:
        return
    opt = run_brute_force(g, UPDATE, 1, "sum").final_objective("sum")
    for method in DETERMINISTIC:
        t = run_greedy(g, ModificationPlan(UPDATE, 1, CentralityMethod.parse(method)))
        assert t.final_objective("sum") <= opt + 1e-10


def test_brute_force_truncates(ex):
    with pytest.warns(RuntimeWarning):
        t = run_brute_force(ex, UPDATE, 9)
    assert t.truncated and len(t) == 8


# -- rank two ------------------------------------------------------------------------


def test_rank2_single_edge_has_no_candidates(single_edge):
    with pytest.warns(RuntimeWarning):
        t = run_rank2(single_edge, ModificationPlan(UPDATE, 1, CentralityMethod("gtc")))
    assert t.truncated and len(t) == 1


def test_rank2_applies_both_directions(ex):
    t = run_rank2(ex, ModificationPlan(UPDATE, 2, CentralityMethod("b_deg")))
    for pair in t.chosen:
        (i, j), (k, l) = pair
        assert (k, l) == (j, i)
    assert t.final_graph.m == ex.m + 4


def test_rank2_degree_score_on_example(ex):
    ns = node_scores(ex, CentralityMethod("b_deg"))
    # [d_in(i) + d_out(j)] + [d_out(i) + d_in(j)] for {0, 3}
    assert ns.score_rank2(np.array([0]), np.array([3]))[0] == (1 + 1) + (1 + 1)


def test_rank2_first_pair_matches_rank1_on_symmetric_graphs():
    checked = 0
    for seed in range(60):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 8))
        und = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.4]
        g = Digraph.from_edges(n, und + [(j, i) for i, j in und])
        cand = enumerate_candidates(g, UPDATE)
        if cand.tau == 0:
            continue
        ns = node_scores(g, CentralityMethod("gtc"))
        s = ns.score(cand.src, cand.dst)
        top = {tuple(sorted(p)) for p, v in zip(cand.pairs, s) if v >= s.max() * (1 - 1e-9)}
        if len(top) > 1:
            continue
        r1 = run_greedy(g, ModificationPlan(UPDATE, 1, CentralityMethod("gtc")))
        r2 = run_rank2(g, ModificationPlan(UPDATE, 1, CentralityMethod("gtc")))
        assert tuple(sorted(r1.chosen_edges[0])) == r2.chosen_edges[0]
        checked += 1
    assert checked > 20


def test_rank2_downdate(ex):
    t = run_rank2(ex, ModificationPlan(DOWNDATE, 1, CentralityMethod("gtc")))
    assert set(t.chosen_edges) == {(1, 3), (3, 1)}


# -- comparisons ---------------------------------------------------------------------


def test_compare_gtc_beats_random_mean():
    g = random_digraph(20, 0.12, seed=31)
    table = compare_methods(g, UPDATE, ["gtc", "random"], 5, seeds=range(10))
    gtc = table.get("gtc").trajectory.final_objective("sum")
    assert gtc >= table.random_mean_final("sum")
    assert len([r for r in table.results if r.label.startswith("random")]) == 10


def test_compare_single_and_inapplicable(tmp_path):
    dag = Digraph.from_edges(4, [(0, 1), (1, 2), (0, 3)])
    table = compare_methods(dag, UPDATE, ["gtc", "eig"], 2, out_dir=tmp_path)
    assert table.get("gtc").status == "ok"
    assert table.get("eig").status == "inapplicable"
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["comparison.csv", "timing.csv", "traj_gtc.csv"]
    assert "inapplicable" in (tmp_path / "timing.csv").read_text()
    single = compare_methods(dag, UPDATE, ["b:deg"], 1)
    assert len(single.results) == 1
