"""Identity suite run by ``digcomm selfcheck``.

Each check compares a production kernel against an independent reference
and reports the largest residual seen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracles, spectral
from .communicability import bipartite_exp_blocks, node_communicabilities
from .graph import Digraph, random_digraph

# Reference values for the 4-node example graph, rounded to 4 decimals.
TABLE_C_H = np.array([1.1752, 2.7366, 1.3683, 1.3683])
TABLE_C_A = np.array([1.3683, 2.7366, 1.1752, 1.3683])
TABLE_V1_SQ = np.array([1 / 3, 1 / 3, 0.0, 1 / 3])
TABLE_TOL = 5e-5
IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<32} residual={self.residual:.3e}  tol={self.tol:.0e}"


def _family(seed: int = 7, count: int = 6, n_max: int = 25, p: float = 0.15):
    rng = np.random.default_rng(seed)
    graphs = [oracles.example_graph()]
    for _ in range(count):
        graphs.append(random_digraph(int(rng.integers(3, n_max + 1)), p, seed=rng))
    return graphs


def run_selfcheck(perturb: float = 0.0, seed: int = 7) -> list[CheckResult]:
    """Run every identity; ``perturb`` is added to each computed quantity.

    A nonzero ``perturb`` simulates a broken kernel and must make checks fail.
    """
    graphs = _family(seed)
    results = []

    def maxdiff(x, y):
        return float(np.max(np.abs(np.asarray(x) + perturb - np.asarray(y)), initial=0.0))

    res = 0.0
    for g in graphs:
        lift = oracles.lift_dense(g.dense())
        ref = oracles.expm_taylor_reference(lift)
        res = max(res, maxdiff(spectral.expm_dense(lift), ref) / max(1.0, np.abs(ref).max()))
    results.append(CheckResult("expm vs Taylor series", res, IDENTITY_TOL))

    res = 0.0
    for g in graphs:
        tl, tr, bl, br = bipartite_exp_blocks(g)
        assembled = np.block([[tl, tr], [bl, br]])
        res = max(res, maxdiff(assembled, spectral.expm_dense(oracles.lift_dense(g.dense()))))
    results.append(CheckResult("lift exponential blocks", res, IDENTITY_TOL))

    res = 0.0
    for g in graphs:
        ref = spectral.compact_svd(g).gmf(np.sinh)
        for other in oracles.sinh_gen_three_ways(g.dense()):
            res = max(res, maxdiff(ref, other))
    results.append(CheckResult("sinh_gen factorizations", res, IDENTITY_TOL))

    res = 0.0
    for g in graphs[:4]:
        if g.m == 0:
            continue
        up, lo, hi = oracles.bound_slacks(g)
        worst = min(np.min(up, initial=np.inf), np.min(lo, initial=np.inf), np.min(hi, initial=np.inf))
        res = max(res, max(0.0, -(worst - perturb)))
    results.append(CheckResult("singular value bounds", res, IDENTITY_TOL))

    g = oracles.example_graph()
    c = node_communicabilities(g, "dense")
    results.append(CheckResult("example C_h", maxdiff(c.c_h, TABLE_C_H), TABLE_TOL))
    results.append(CheckResult("example C_a", maxdiff(c.c_a, TABLE_C_A), TABLE_TOL))
    t = spectral.dominant_triplet(g)
    results.append(CheckResult("example authority vector", maxdiff(t.v1 ** 2, TABLE_V1_SQ), TABLE_TOL))

    gexp = spectral.generalized_matrix_function(g, np.exp, full=True) + perturb
    results.append(CheckResult("generalized exp sign pattern",
                               max(0.0, max(gexp[2, 0], gexp[3, 3]) + 1e-6), 0.0))

    res = 0.0
    for g in graphs[1:4]:
        if g.m == 0:
            continue
        d = spectral.hub_authority_totals(g, "dense")
        k = spectral.hub_authority_totals(g, "krylov")
        res = max(res, max(abs(x + perturb - y) / abs(y) for x, y in zip(k, d)))
    results.append(CheckResult("krylov vs dense totals", res, 1e-8))
    return results


def format_report(results: list[CheckResult]) -> str:
    return "\n".join(r.line() for r in results)


def example_digraph() -> Digraph:
    return oracles.example_graph()
