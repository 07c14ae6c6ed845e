"""Global and node-level communicability indices of a digraph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import CapacityError, ParameterError
from .graph import Digraph, degrees
from .spectral import COSH_SQRT, MatrixFunctionSpec

NORMALIZATIONS = ("raw", "per_node", "per_edge")


@dataclass(frozen=True)
class GlobalIndices:
    tc: float
    thc: float
    tac: float
    normalization: str = "raw"


@dataclass(frozen=True)
class NodeCommunicabilities:
    c_h: np.ndarray
    c_a: np.ndarray


def total_communicability(g: Digraph, backend: str = "auto") -> float:
    """``1^T e^A 1`` on the nonsymmetric adjacency matrix."""
    if g.m == 0:
        return float(g.n)
    if spectral.resolve_backend(g.n, backend) == "dense":
        return float(spectral.expm_dense(g.dense()).sum())
    return float(np.sum(spectral.expm_action_arnoldi(g.adjacency, np.ones(g.n))))


def total_hub_communicability(g: Digraph, backend: str = "auto") -> float:
    """``1^T cosh(sqrt(A A^T)) 1``."""
    return spectral.quad_form(g, "hub", COSH_SQRT, backend=backend)


def total_authority_communicability(g: Digraph, backend: str = "auto") -> float:
    """``1^T cosh(sqrt(A^T A)) 1``."""
    return spectral.quad_form(g, "authority", COSH_SQRT, backend=backend)


def generic_total_f_communicability(g: Digraph, which: str, f: MatrixFunctionSpec,
                                    backend: str = "auto") -> float:
    if not f.is_admissible():
        raise ParameterError(f"{f.name} has a negative series coefficient")
    return spectral.quad_form(g, which, f, backend=backend)


def global_indices(g: Digraph, normalization: str = "raw", backend: str = "auto") -> GlobalIndices:
    if normalization not in NORMALIZATIONS:
        raise ParameterError(f"normalization must be one of {NORMALIZATIONS}")
    thc, tac = spectral.hub_authority_totals(g, backend)
    tc = total_communicability(g, backend)
    scale = {"raw": 1.0, "per_node": g.n, "per_edge": g.m}[normalization]
    if scale == 0:
        return GlobalIndices(np.nan, np.nan, np.nan, normalization)
    return GlobalIndices(tc / scale, thc / scale, tac / scale, normalization)


def node_communicabilities(g: Digraph, backend: str = "auto") -> NodeCommunicabilities:
    """Row and column sums of ``sinh^gen(A)``: hub and authority communicability per node."""
    if g.m == 0:
        return NodeCommunicabilities(np.zeros(g.n), np.zeros(g.n))
    if spectral.resolve_backend(g.n, backend) == "dense":
        svd = spectral.compact_svd(g)
        ones = np.ones(g.n)
        sh = np.sinh(svd.sigma)
        return NodeCommunicabilities(svd.U @ (sh * (svd.V.T @ ones)),
                                     svd.V @ (sh * (svd.U.T @ ones)))
    return NodeCommunicabilities(spectral.gmf_sinh_action(g, "row_sums", backend="krylov"),
                                 spectral.gmf_sinh_action(g, "col_sums", backend="krylov"))


def node_communicabilities_degree_form(g: Digraph) -> NodeCommunicabilities:
    """Same quantities via ``sinh(s)/s`` weights on ``u_k u_k^T d_out`` and ``v_k v_k^T d_in``."""
    svd = spectral.compact_svd(g)
    d = degrees(g)
    w = np.sinh(svd.sigma) / svd.sigma if svd.r else np.empty(0)
    return NodeCommunicabilities(svd.U @ (w * (svd.U.T @ d.d_out)),
                                 svd.V @ (w * (svd.V.T @ d.d_in)))


def node_communicabilities_neighbor_form(g: Digraph) -> NodeCommunicabilities:
    """Same quantities via sums of singular-vector entries over out-/in-neighbours."""
    svd = spectral.compact_svd(g)
    a = g.adjacency
    ones = np.ones(g.n)
    w = np.sinh(svd.sigma) / svd.sigma if svd.r else np.empty(0)
    c_h = (a @ svd.V) @ (w * (svd.V.T @ ones))
    c_a = (a.T @ svd.U) @ (w * (svd.U.T @ ones))
    return NodeCommunicabilities(np.asarray(c_h), np.asarray(c_a))


def bipartite_exp_blocks(g: Digraph):
    """The four blocks of ``exp`` of the bipartite lift, assembled from the compact SVD.

    Returns ``(cosh(sqrt(A A^T)), sinh^gen(A), sinh^gen(A)^T, cosh(sqrt(A^T A)))``.
    """
    if 2 * g.n > spectral.EXPM_MAX_DIM:
        raise CapacityError(f"n={g.n} exceeds the dense block cap {spectral.EXPM_MAX_DIM // 2}")
    svd = spectral.compact_svd(g)
    eye = np.eye(g.n)
    ch = np.cosh(svd.sigma) - 1
    top_left = eye + (svd.U * ch) @ svd.U.T
    bottom_right = eye + (svd.V * ch) @ svd.V.T
    top_right = svd.gmf(np.sinh)
    return top_left, top_right, top_right.T.copy(), bottom_right
