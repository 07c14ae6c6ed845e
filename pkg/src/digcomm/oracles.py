"""Plain reference computations used to cross-check the production kernels.

Everything here is deliberately naive: dense matrices, straight series
summation and full SVDs. Use only on small graphs.
"""

from __future__ import annotations

import numpy as np

from .graph import Digraph, enumerate_candidates
from .spectral import dominant_triplet

# 4-node digraph whose Gram matrices are reducible; one-based edges
# 1->3, 2->1, 2->4, 3->2, 4->2.
EXAMPLE_EDGES = ((0, 2), (1, 0), (1, 3), (2, 1), (3, 1))


def example_graph() -> Digraph:
    return Digraph.from_edges(4, EXAMPLE_EDGES)


def expm_taylor_reference(m: np.ndarray, rtol: float = 1e-17, max_terms: int = 400) -> np.ndarray:
    """``sum_k M^k / k!`` summed until the next term is negligible."""
    m = np.asarray(m, dtype=float)
    out = np.eye(m.shape[0])
    term = np.eye(m.shape[0])
    for k in range(1, max_terms):
        term = term @ m / k
        out += term
        if np.abs(term).max() <= rtol * np.abs(out).max():
            break
    return out


def lift_dense(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    z = np.zeros((n, n))
    return np.block([[z, a], [a.T, z]])


def sinh_gen_three_ways(a: np.ndarray, rank_tol: float = 1e-12):
    """``U sinh(S) V^T``, ``(sum sinh(s)/s u u^T) A`` and ``A (sum sinh(s)/s v v^T)``."""
    U, s, Vt = np.linalg.svd(a)
    keep = s > rank_tol * (s[0] if len(s) and s[0] > 0 else 1.0)
    U, s, V = U[:, keep], s[keep], Vt[keep].T
    w = np.sinh(s) / s
    return ((U * np.sinh(s)) @ V.T, ((U * w) @ U.T) @ a, a @ ((V * w) @ V.T))


def bound_slacks(g: Digraph):
    """Slack of the dominant singular value bounds for every single-edge change.

    Returns ``(update, downdate_lower, downdate_upper)`` arrays; all entries are
    nonnegative when the bounds hold. ``downdate_upper`` is ``s1^2 - s1_new^2``.
    """
    t = dominant_triplet(g)
    s1, u, v = t.sigma1, t.u1, t.v1
    a = g.dense()

    def slacks(kind, value, sign):
        cand = enumerate_candidates(g, kind)
        if cand.tau == 0:
            return np.empty(0), np.empty(0)
        new_s1 = np.empty(cand.tau)
        for c, (i, j) in enumerate(cand):
            b = a.copy()
            b[i, j] = value
            new_s1[c] = np.linalg.norm(b, 2)
        ui, vj = u[cand.src], v[cand.dst]
        bound = s1 ** 2 + sign * 2 * s1 * ui * vj + np.maximum(ui ** 2, vj ** 2)
        return new_s1 ** 2 - bound, s1 ** 2 - new_s1 ** 2

    up, _ = slacks("update", 1.0, +1)
    lo, hi = slacks("downdate", 0.0, -1)
    return up, lo, hi
