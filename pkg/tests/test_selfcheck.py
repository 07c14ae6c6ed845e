import numpy as np

from digcomm import oracles, selfcheck
from digcomm.graph import random_digraph


def test_all_identities_pass():
    results = selfcheck.run_selfcheck()
    assert all(r.passed for r in results), selfcheck.format_report(results)
    for r in results:
        if r.tol == selfcheck.IDENTITY_TOL:
            assert r.residual <= 1e-10


def test_perturbation_is_detected():
    results = selfcheck.run_selfcheck(perturb=1e-6)
    failed = [r for r in results if not r.passed]
    assert failed
    assert all(r.residual > 0 for r in failed)
    assert "FAIL" in selfcheck.format_report(results)


def test_sinh_three_ways_agree():
    g = random_digraph(12, 0.2, seed=1)
    a, b, c = oracles.sinh_gen_three_ways(g.dense())
    np.testing.assert_allclose(a, b, atol=1e-12)
    np.testing.assert_allclose(a, c, atol=1e-12)


def test_bound_slacks_nonnegative():
    g = random_digraph(10, 0.2, seed=2)
    up, lo, hi = oracles.bound_slacks(g)
    assert len(up) == 90 - g.m and len(lo) == g.m
    assert up.min() >= -1e-10 and lo.min() >= -1e-10 and hi.min() >= -1e-10
