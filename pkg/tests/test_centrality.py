import io
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_lift, digraphs
from digcomm import centrality as ce
from digcomm.centrality import CentralityMethod
from digcomm.errors import MethodInapplicable, ParameterError
from digcomm.graph import DOWNDATE, UPDATE, CandidateSet, Digraph, enumerate_candidates


def pairs(*ps):
    a = np.array(ps, dtype=np.int64).reshape(-1, 2)
    return CandidateSet(UPDATE, a[:, 0], a[:, 1])


def test_method_parsing():
    m = CentralityMethod.parse("b:tc.no")
    assert (m.name, m.recompute, m.rank2) == ("b_tc", False, False)
    assert m.label == "b:tc.no"
    assert CentralityMethod.parse("HITS").label == "hits"
    assert CentralityMethod.parse("b_random").name == "random"
    assert CentralityMethod.parse("gtc", rank2=True).label == "gtc.r2"
    assert not CentralityMethod.parse("random").deterministic
    with pytest.raises(ParameterError):
        CentralityMethod.parse("pagerank")


def test_hits_scores_example(ex):
    # constant-start HITS limit: u1^2 = (0, 2/3, 1/6, 1/6), v1^2 = (1/3, 1/3, 0, 1/3)
    t = ce.score_hits(ex, pairs((3, 1), (1, 2)))
    np.testing.assert_allclose(t.score, [math.sqrt(1 / 6) * math.sqrt(1 / 3), 0.0], atol=1e-10)


def test_hits_scores_small(single_edge, two_cycle):
    assert ce.score_hits(single_edge, pairs((1, 0))).score[0] == pytest.approx(0, abs=1e-14)
    assert ce.score_hits(two_cycle, pairs((0, 1))).score[0] == pytest.approx(0.5)


def test_gtc_scores_example(ex):
    t = ce.score_gtc(ex, pairs((1, 0), (0, 1)))
    np.testing.assert_allclose(t.score, [2.7366 * 1.3683, 1.1752 * 2.7366], atol=2e-4)
    assert ce.score_gtc(Digraph(3, []), pairs((0, 1), (2, 0))).score.tolist() == [0, 0]


def test_eig_scores(two_cycle, three_cycle, single_edge):
    assert ce.score_eig(two_cycle, pairs((1, 0))).score[0] == pytest.approx(0.5)
    assert ce.score_eig(three_cycle, pairs((1, 0))).score[0] == pytest.approx(1 / 3)
    with pytest.raises(MethodInapplicable):
        ce.score_eig(single_edge, pairs((1, 0)))


def test_tc_scores(two_cycle, ex):
    assert ce.score_tc(Digraph(2, []), pairs((0, 1))).score[0] == 1
    assert ce.score_tc(two_cycle, pairs((0, 1))).score[0] == pytest.approx(math.e ** 2)
    e = scipy.linalg.expm(ex.dense())
    cand = enumerate_candidates(ex, UPDATE)
    expected = e.sum(axis=1)[cand.src] * e.sum(axis=0)[cand.dst]
    np.testing.assert_allclose(ce.score_tc(ex, cand).score, expected, atol=1e-10)


def test_bipartite_deg_example(ex):
    assert ce.score_bipartite_deg(ex, pairs((1, 3))).score[0] == 3


def test_bipartite_eig_single_edge(single_edge):
    cand = CandidateSet(DOWNDATE, np.array([0]), np.array([1]))
    assert ce.score_bipartite_eig(single_edge, cand).score[0] == pytest.approx(0.5, abs=1e-10)


@given(digraphs(min_edges=1, max_n=10))
def test_bipartite_tc_matches_lift_exponential(g):
    cand = enumerate_candidates(g, UPDATE)
    if not cand.tau:
        return
    w = scipy.linalg.expm(dense_lift(g.dense())).sum(axis=1)
    expected = w[cand.src] * w[cand.dst + g.n]
    np.testing.assert_allclose(ce.score_bipartite_tc(g, cand).score, expected, rtol=1e-10)


@given(digraphs(max_n=10))
def test_bipartite_tc_exceeds_gtc(g):
    cand = enumerate_candidates(g, UPDATE)
    if not cand.tau:
        return
    diff, closed = ce.bipartite_tc_divergence(g, cand)
    assert np.all(diff > 0)
    np.testing.assert_allclose(diff, closed, rtol=1e-10, atol=1e-10)
    direct = ce.score_bipartite_tc(g, cand).score - ce.score_gtc(g, cand).score
    np.testing.assert_allclose(diff, direct, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("method", ["hits", "gtc", "tc", "eig"])
def test_orientation_contract(method):
    g = Digraph.from_edges(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (1, 4)])
    cand = enumerate_candidates(g, UPDATE)
    rev = CandidateSet(UPDATE, cand.dst, cand.src)
    fwd = ce.score_candidates(g, cand, method).score
    back = ce.score_candidates(g.transpose(), rev, method).score
    np.testing.assert_allclose(fwd, back, rtol=1e-9, atol=1e-12)


def test_symmetric_graph_hits_and_lift_argmax_agree():
    g = Digraph.from_edges(5, [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (1, 3), (3, 1), (3, 4),
                               (4, 3)])
    cand = enumerate_candidates(g, UPDATE)
    h = ce.score_hits(g, cand).score
    b = ce.score_bipartite_eig(g, cand).score
    np.testing.assert_allclose(b / b.max(), h / h.max(), rtol=1e-8)
    assert np.flatnonzero(np.isclose(h, h.max())).tolist() == \
        np.flatnonzero(np.isclose(b, b.max())).tolist()


def test_rank2_scores(ex):
    ns = ce.node_scores(ex, "hits")
    i, j = np.array([0]), np.array([3])
    assert ns.score_rank2(i, j)[0] == pytest.approx(ns.source[0] * ns.target[3] + ns.source[3] * ns.target[0])
    deg = ce.node_scores(ex, "b_deg")
    assert deg.score_rank2(np.array([0]), np.array([1]))[0] == 6


def test_symmetrize_rank2_tables(ex):
    fwd = ce.score_candidates(ex, enumerate_candidates(ex, UPDATE), "gtc")
    sym = ce.symmetrize_rank2(fwd, fwd)
    # virtual pairs with both directions virtual: {0,3} and {2,3}
    assert list(zip(sym.src.tolist(), sym.dst.tolist())) == [(0, 3), (2, 3)]
    d = fwd.as_dict()
    assert sym.score[0] == pytest.approx(d[(0, 3)] + d[(3, 0)])
    assert sym.filtered == 3


@given(digraphs(max_n=8))
def test_symmetrize_is_swap_symmetric(g):
    cand = enumerate_candidates(g, UPDATE)
    fwd = ce.score_candidates(g, cand, "b_deg")
    sym = ce.symmetrize_rank2(fwd, fwd)
    d = fwd.as_dict()
    for (i, j), s in sym.entries:
        assert s == d[(i, j)] + d[(j, i)] == d[(j, i)] + d[(i, j)]


def test_score_csv_roundtrip(ex):
    t = ce.score_gtc(ex, enumerate_candidates(ex, UPDATE))
    back = ce.read_score_csv(io.StringIO(t.to_csv()))
    assert back.method == "gtc"
    np.testing.assert_array_equal(back.src, t.src)
    np.testing.assert_array_equal(back.score, t.score)


@given(digraphs(min_edges=1, max_n=10), st.sampled_from(["hits", "gtc", "tc", "b_eig", "b_tc", "b_deg"]))
def test_scores_finite_and_nonnegative(g, method):
    cand = enumerate_candidates(g, UPDATE)
    t = ce.score_candidates(g, cand, method)
    assert len(t) == cand.tau
    assert np.all(np.isfinite(t.score)) and np.all(t.score >= -1e-12)
    assert t.provenance == g.fingerprint
